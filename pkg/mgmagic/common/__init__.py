"""Shared infrastructure utilities used by every mgmagic module."""
