"""Startup-time helpers for safe config logging."""

from mgmagic.common.config import settings
from mgmagic.common.logging import logger


def log_startup_config(command: str, keys: list[str]) -> None:
    """Log selected settings for quick troubleshooting of a run."""

    config: dict[str, object] = {"command": command}
    for key in keys:
        config[key] = getattr(settings, key, "<unset>")
    logger.info("startup_config=%s", config)
