"""Prometheus metric definitions shared across protocols."""

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest


REGISTRY = CollectorRegistry()

gadget_runs_total = Counter(
    "gadget_runs_total",
    "Gadget executions by gadget and outcome",
    ["gadget", "outcome"],
    registry=REGISTRY,
)
magic_copies_consumed_total = Counter(
    "magic_copies_consumed_total",
    "Magic-state copies consumed",
    ["protocol"],
    registry=REGISTRY,
)
measurements_total = Counter(
    "measurements_total",
    "Computational-basis measurements performed",
    ["mode"],
    registry=REGISTRY,
)
reduction_steps_total = Counter(
    "reduction_steps_total",
    "Single-qubit reductions by proof case",
    ["case"],
    registry=REGISTRY,
)
doubling_attempts_total = Counter(
    "doubling_attempts_total",
    "Phase-doubling attempts by outcome",
    ["outcome"],
    registry=REGISTRY,
)
cphi_protocol_rounds = Histogram(
    "cphi_protocol_rounds",
    "Rounds used by the controlled-phase protocol",
    buckets=(1, 2, 3, 4, 5, 6, 8, 10, 12, 16),
    registry=REGISTRY,
)


def metrics_text() -> str:
    """Render all registered metrics in the Prometheus text format."""

    return generate_latest(REGISTRY).decode("utf-8")
