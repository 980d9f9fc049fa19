"""Tests for environment-driven settings."""

import pytest

from mgmagic.common.config import MgmagicSettings, override_tolerances, settings


def test_env_prefix(monkeypatch):
    monkeypatch.setenv("MGMAGIC_SEED", "42")
    monkeypatch.setenv("MGMAGIC_EPS_GAUSS", "1e-7")
    loaded = MgmagicSettings()
    assert loaded.seed == 42
    assert loaded.eps_gauss == 1e-7


def test_override_returns_previous_values():
    before = settings.eps_phi
    previous = override_tolerances(eps_phi=1e-4)
    try:
        assert settings.eps_phi == 1e-4
        assert previous == {"eps_phi": before}
    finally:
        override_tolerances(**previous)
    assert settings.eps_phi == before


def test_override_rejects_unknown_and_non_positive():
    with pytest.raises(ValueError):
        override_tolerances(max_qubits=3)
    with pytest.raises(ValueError):
        override_tolerances(eps_norm=0.0)
