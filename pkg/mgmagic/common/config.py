"""Central environment-driven settings shared by the library and the CLI.

Tolerances live in one record so that the double-precision drift budget is
visible to tests. Every field can be set through an `MGMAGIC_` environment
variable (see `.env.example`).
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class MgmagicSettings(BaseSettings):
    """Typed view of runtime configuration from environment variables."""

    log_level: str = "WARNING"
    seed: int | None = None
    max_qubits: int = 14
    workers: int = 1
    pipeline_doubling: bool = False
    reduce_retry_budget: int = 20

    eps_norm: float = 1e-10
    eps_amp: float = 1e-12
    eps_prob: float = 1e-12
    eps_recon: float = 1e-9
    eps_gauss: float = 1e-9
    eps_unitary: float = 1e-8
    eps_det: float = 1e-10
    eps_basis: float = 1e-9
    eps_phi: float = 1e-6
    eps_theta: float = 1e-9
    model_config = SettingsConfigDict(env_prefix="MGMAGIC_", env_file=".env", extra="ignore")


TOLERANCE_FIELDS = frozenset(name for name in MgmagicSettings.model_fields if name.startswith("eps_"))

settings = MgmagicSettings()


def override_tolerances(**values: float) -> dict[str, float]:
    """Apply a tolerance override block in place and return the previous values."""

    unknown = set(values) - TOLERANCE_FIELDS
    if unknown:
        raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
    previous = {}
    for key, value in values.items():
        if value <= 0:
            raise ValueError(f"tolerance {key} must be positive")
        previous[key] = getattr(settings, key)
        setattr(settings, key, float(value))
    return previous
