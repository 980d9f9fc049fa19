"""Matchgate circuit simulation and magic-state toolkit."""
