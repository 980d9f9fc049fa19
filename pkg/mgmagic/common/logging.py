"""Structured JSON logging with run/trial context fields."""

import logging
import sys
from contextvars import ContextVar

from pythonjsonlogger.json import JsonFormatter

from mgmagic.common.config import settings


command_ctx: ContextVar[str] = ContextVar("command", default="")
run_seed_ctx: ContextVar[str] = ContextVar("run_seed", default="")
trial_ctx: ContextVar[str] = ContextVar("trial", default="")


class ContextFilter(logging.Filter):
    """Inject command and seeding identifiers into every log record."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = command_ctx.get()
        record.run_seed = run_seed_ctx.get()
        record.trial = trial_ctx.get()
        return True


def configure_logging() -> None:
    """Configure root logger once per process.

    Records go to stderr; stdout is reserved for JSON reports.
    """

    handler = logging.StreamHandler(sys.stderr)
    context_filter = ContextFilter()
    handler.addFilter(context_filter)
    formatter = JsonFormatter("%(asctime)s %(levelname)s %(command)s %(run_seed)s %(trial)s %(message)s")
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(settings.log_level)
    root.addFilter(context_filter)


logger = logging.getLogger("mgmagic")
