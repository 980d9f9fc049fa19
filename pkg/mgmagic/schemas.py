"""JSON file schemas for states, circuits and command reports."""

import json
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, Field, model_validator

from mgmagic.matchgate import MatchgateCircuit, Placement, gate_from_name, make_matchgate
from mgmagic.statevector import QubitState

FORMAT_VERSION = 1

Complex = tuple[float, float]
Model = TypeVar("Model", bound=BaseModel)


def _pairs(values: np.ndarray) -> list[Complex]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values).reshape(-1)]


def _complex(pairs: list[Complex]) -> np.ndarray:
    return np.array([re + 1j * im for re, im in pairs], dtype=complex)


class StateFile(BaseModel):
    """Amplitudes as [re, im] pairs in computational-basis order (line 1 = high bit)."""

    format_version: int = FORMAT_VERSION
    n: int = Field(ge=1)
    amps: list[Complex]

    def to_state(self) -> QubitState:
        return QubitState(n=self.n, amps=_complex(self.amps))

    @classmethod
    def from_state(cls, state: QubitState) -> "StateFile":
        return cls(n=state.n, amps=_pairs(state.amps))


class GateSpec(BaseModel):
    """Either a catalog gate (`name`, optional `param`) or explicit 2x2 blocks `a`, `b`."""

    j: int = Field(ge=1)
    name: str | None = None
    param: float | None = None
    a: list[list[Complex]] | None = None
    b: list[list[Complex]] | None = None

    @model_validator(mode="after")
    def _one_form(self) -> "GateSpec":
        if (self.name is None) == (self.a is None or self.b is None):
            raise ValueError("gate needs either a catalog name or both blocks a and b")
        return self

    def to_placement(self) -> Placement:
        if self.name is not None:
            return Placement(gate=gate_from_name(self.name, self.param), j=self.j, param=self.param)
        a = np.array([_complex(row) for row in self.a])
        b = np.array([_complex(row) for row in self.b])
        return Placement(gate=make_matchgate(a, b), j=self.j)


class CircuitFile(BaseModel):
    format_version: int = FORMAT_VERSION
    n: int = Field(ge=1)
    gates: list[GateSpec] = []

    def to_circuit(self) -> MatchgateCircuit:
        return MatchgateCircuit(n=self.n, gates=tuple(g.to_placement() for g in self.gates))

    @classmethod
    def from_circuit(cls, circuit: MatchgateCircuit) -> "CircuitFile":
        gates = [
            GateSpec(
                j=p.j,
                a=[_pairs(row) for row in p.gate.a],
                b=[_pairs(row) for row in p.gate.b],
            )
            for p in circuit.gates
        ]
        return cls(n=circuit.n, gates=gates)


class ClassifyReport(BaseModel):
    format_version: int = FORMAT_VERSION
    n: int
    parity: str
    lambda_norm_sq: float | None
    gaussian: bool | None
    phi: float | None = None


class CanonicalizeReport(BaseModel):
    format_version: int = FORMAT_VERSION
    phi: float
    used_ancilla: bool
    depth: int
    schmidt_values: tuple[float, float]
    fidelity: float
    circuit: CircuitFile


class ReduceReport(BaseModel):
    format_version: int = FORMAT_VERSION
    mode: str
    seed: int | None
    phi: float
    steps: list[dict[str, Any]]
    output: StateFile


class GadgetReport(BaseModel):
    format_version: int = FORMAT_VERSION
    gadget: str
    seed: int | None
    trials: int
    phi: float | None = None
    epsilon: float | None = None
    rounds: int | None = None
    supply: int | None = None
    success_frequency: float
    mean_consumed: float
    p50_consumed: float
    p95_consumed: float
    p99_consumed: float
    expected_consumed: int | None = None
    rounds_histogram: dict[int, int] = {}
    min_fidelity: float | None = None


def dumps(model: BaseModel) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""

    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, model: BaseModel) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def read_json(path: str | Path, schema: type[Model]) -> Model:
    return schema.model_validate_json(Path(path).read_text(encoding="utf-8"))


def load_state(path: str | Path) -> QubitState:
    return read_json(path, StateFile).to_state()


def save_state(path: str | Path, state: QubitState) -> None:
    write_json(path, StateFile.from_state(state))
