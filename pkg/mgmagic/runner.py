"""Free-operation executor.

Protocols drive a `FreeOperationRunner`: it applies catalog matchgates,
adjoins and drops computational-basis ancillas at the fringe, and measures
lines in the computational basis. Every action is logged, so the set of gates
a protocol used can be audited afterwards.
"""

from collections.abc import Iterable, Iterator
from typing import Literal, Protocol

import numpy as np
from pydantic import BaseModel

from mgmagic.common.config import settings
from mgmagic.common.errors import BasisStateError, MatchgateError
from mgmagic.common.metrics import measurements_total
from mgmagic.matchgate import (
    Matchgate,
    MatchgateCircuit,
    Placement,
    basis_move_gates,
    giz,
    gxx,
    gzz,
    local_phase,
)
from mgmagic.statevector import (
    QubitState,
    adjoin_basis,
    apply_two_qubit_unchecked,
    drop_basis_qubit,
    project,
    tensor,
)


class GateEvent(BaseModel):
    kind: Literal["gate"] = "gate"
    name: str
    j: int
    param: float | None = None


class MeasureEvent(BaseModel):
    kind: Literal["measure"] = "measure"
    line: int
    outcome: int
    prob: float
    label: str = ""


class LineEvent(BaseModel):
    """Ancilla or resource lines entering/leaving the register."""

    kind: Literal["adjoin", "drop", "resource"]
    line: int
    bit: int | None = None
    width: int = 1


Event = GateEvent | MeasureEvent | LineEvent


class OutcomeSource(Protocol):
    mode: str

    def choose(self, state: QubitState, line: int) -> int: ...


class SampledOutcomes:
    """Born-rule sampling from a numpy Generator."""

    mode = "sampled"

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def choose(self, state: QubitState, line: int) -> int:
        p0 = project(state, line, 0).prob
        return 0 if self.rng.random() < p0 else 1


class ForcedOutcomes:
    """Replays a fixed outcome sequence (branch enumeration)."""

    mode = "forced"

    def __init__(self, bits: Iterable[int]) -> None:
        self._bits: Iterator[int] = iter(bits)

    def choose(self, state: QubitState, line: int) -> int:
        try:
            bit = int(next(self._bits))
        except StopIteration as exc:
            raise MatchgateError("forced outcome sequence exhausted") from exc
        if project(state, line, bit).prob <= settings.eps_prob:
            raise MatchgateError(f"forced outcome {bit} on line {line} has zero probability")
        return bit


class FreeOperationRunner:
    """Mutable working register plus an action log."""

    def __init__(self, state: QubitState, source: OutcomeSource | None = None) -> None:
        self.state = state
        self.source = source
        self.events: list[Event] = []
        self.placements: list[Placement] = []
        self.outcomes: list[tuple[str, int]] = []

    @property
    def n(self) -> int:
        return self.state.n

    def apply(self, gate: Matchgate, j: int, param: float | None = None) -> None:
        self.state = apply_two_qubit_unchecked(self.state, gate.matrix, j)
        self.placements.append(Placement(gate=gate, j=j, param=param))
        self.events.append(GateEvent(name=gate.label, j=j, param=param))

    def apply_circuit(self, circuit: MatchgateCircuit, offset: int = 0) -> None:
        """Run a circuit whose line 1 sits at register line offset + 1."""

        for placement in circuit.gates:
            self.apply(placement.gate, placement.j + offset, placement.param)

    def measure(self, line: int, label: str = "") -> int:
        if self.source is None:
            raise MatchgateError("runner has no outcome source for measurements")
        bit = self.source.choose(self.state, line)
        outcome = project(self.state, line, bit)
        self.state = outcome.post
        self.events.append(MeasureEvent(line=line, outcome=bit, prob=outcome.prob, label=label))
        self.outcomes.append((label or f"line{line}", bit))
        measurements_total.labels(mode=self.source.mode).inc()
        return bit

    def postselect(self, line: int, bit: int, label: str = "") -> float:
        """Project onto `bit` without sampling (simulator-only)."""

        outcome = project(self.state, line, bit)
        if outcome.zero:
            raise MatchgateError(f"outcome {bit} on line {line} has zero probability")
        self.state = outcome.post
        self.events.append(MeasureEvent(line=line, outcome=bit, prob=outcome.prob, label=label or "postselect"))
        self.outcomes.append((label or f"line{line}", bit))
        measurements_total.labels(mode="forced").inc()
        return outcome.prob

    def adjoin(self, bit: int) -> int:
        """Adjoin |bit> at the right fringe; returns its line."""

        self.state = adjoin_basis(self.state, bit, side="right")
        self.events.append(LineEvent(kind="adjoin", line=self.n, bit=bit))
        return self.n

    def adjoin_resource(self, resource: QubitState) -> int:
        """Place a resource state on new lines at the right fringe; returns its first line."""

        first = self.n + 1
        self.state = tensor(self.state, resource)
        self.events.append(LineEvent(kind="resource", line=first, width=resource.n))
        return first

    def drop(self, line: int, bit: int) -> None:
        self.state = drop_basis_qubit(self.state, line, bit)
        self.events.append(LineEvent(kind="drop", line=line, bit=bit))

    def move_basis(self, src: int, dst: int, bit: int) -> None:
        if project(self.state, src, bit).prob < 1.0 - settings.eps_basis:
            raise BasisStateError(f"line {src} is not in |{bit}>")
        for placement in basis_move_gates(src, dst, bit):
            self.apply(placement.gate, placement.j)

    def discard(self, line: int, bit: int) -> None:
        """Move a measured |bit> line to the right fringe and drop it."""

        self.move_basis(line, self.n, bit)
        self.drop(self.n, bit)

    def z_on(self, line: int) -> None:
        if line < self.n:
            self.apply(gzz(), line)
        else:
            self.apply(giz(), line - 1)

    def x_on(self, line: int) -> None:
        """X on one line: a |0> ancilla is moved next to it, G(X,X) fires, the |1> is moved out."""

        ancilla = self.adjoin(0)
        self.move_basis(ancilla, line + 1, 0)
        self.apply(gxx(), line)
        self.move_basis(line + 1, self.n, 1)
        self.drop(self.n, 1)

    def phase_on(self, line: int, phi: float) -> None:
        """diag(1, e^{i phi}) on one line via a phase matchgate."""

        if line < self.n:
            self.apply(local_phase(phi, "left"), line, param=phi)
        else:
            self.apply(local_phase(phi, "right"), line - 1, param=phi)
