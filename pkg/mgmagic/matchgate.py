"""Matchgates G(A, B), the named-gate catalog, n.n. circuits and basis-qubit moves.

Two-qubit basis order is |00>, |01>, |10>, |11> with the left line as the high
bit. A acts on the even block {|00>, |11>} (indices 0 and 3) and B on the odd
block {|01>, |10>} (indices 1 and 2).
"""

from collections import deque
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.stats import unitary_group

from mgmagic.common.config import settings
from mgmagic.common.errors import BasisStateError, DeterminantMismatchError, DimensionError, MatchgateError, NotUnitaryError
from mgmagic.statevector import QubitState, apply_two_qubit_unchecked, project


EVEN_BLOCK = [0, 3]
ODD_BLOCK = [1, 2]

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class Matchgate(BaseModel):
    """Validated G(A, B) with its 4x4 matrix."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: np.ndarray
    b: np.ndarray
    matrix: np.ndarray
    label: str = "custom"

    def adjoint(self) -> "Matchgate":
        return make_matchgate(self.a.conj().T, self.b.conj().T, label=f"{self.label}^dag")


def _is_unitary(m: np.ndarray) -> bool:
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= settings.eps_unitary)


def embed_blocks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A (+) B as a 4x4 matrix in the computational basis."""

    matrix = np.zeros((4, 4), dtype=complex)
    matrix[np.ix_(EVEN_BLOCK, EVEN_BLOCK)] = a
    matrix[np.ix_(ODD_BLOCK, ODD_BLOCK)] = b
    return matrix


def make_matchgate(a: np.ndarray, b: np.ndarray, label: str = "custom") -> Matchgate:
    """G(A, B); rejects non-unitary blocks and det A != det B."""

    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError("matchgate blocks must be 2x2")
    if not (_is_unitary(a) and _is_unitary(b)):
        raise NotUnitaryError("matchgate blocks must be unitary")
    if abs(np.linalg.det(a) - np.linalg.det(b)) > settings.eps_det:
        raise DeterminantMismatchError(f"det A = {np.linalg.det(a):.6f} != det B = {np.linalg.det(b):.6f}")
    for arr in (a, b):
        arr.setflags(write=False)
    matrix = embed_blocks(a, b)
    matrix.setflags(write=False)
    return Matchgate(a=a, b=b, matrix=matrix, label=label)


@lru_cache(maxsize=None)
def fswap() -> Matchgate:
    return make_matchgate(_Z, _X, label="fswap")


@lru_cache(maxsize=None)
def fswap_minus() -> Matchgate:
    return make_matchgate(-_Z, _X, label="fswap_minus")


@lru_cache(maxsize=None)
def ghh() -> Matchgate:
    return make_matchgate(_H, _H, label="ghh")


@lru_cache(maxsize=None)
def gxx() -> Matchgate:
    return make_matchgate(_X, _X, label="gxx")


@lru_cache(maxsize=None)
def gzz() -> Matchgate:
    """Z on the left line: Z x I = G(Z, Z)."""

    return make_matchgate(_Z, _Z, label="gzz")


@lru_cache(maxsize=None)
def giz() -> Matchgate:
    """Z on the right line: I x Z = G(Z, -Z)."""

    return make_matchgate(_Z, -_Z, label="giz")


def local_phase(phi: float, side: str = "left") -> Matchgate:
    """diag(1, e^{i phi}) on one line, extended by the identity on the other."""

    phase = np.exp(1j * phi)
    a = np.diag([1.0, phase])
    b = np.diag([1.0, phase]) if side == "left" else np.diag([phase, 1.0])
    return make_matchgate(a, b, label=f"phase_{side}")


def even_block_gate(a: np.ndarray) -> Matchgate:
    """G(A, e^{i xi/2} I) with e^{i xi} = det A: A on the even block, a phase on the odd one."""

    xi = np.angle(np.linalg.det(a))
    return make_matchgate(a, np.exp(0.5j * xi) * _I, label="even_block")


def odd_block_gate(b: np.ndarray) -> Matchgate:
    """G(e^{i eta/2} I, B) with e^{i eta} = det B."""

    eta = np.angle(np.linalg.det(b))
    return make_matchgate(np.exp(0.5j * eta) * _I, b, label="odd_block")


def block_pair_gate(a: np.ndarray, b: np.ndarray) -> Matchgate:
    """Product of even_block_gate(A) and odd_block_gate(B); the two commute."""

    xi = np.angle(np.linalg.det(a))
    eta = np.angle(np.linalg.det(b))
    return make_matchgate(np.exp(0.5j * eta) * a, np.exp(0.5j * xi) * b, label="block_pair")


def named_gates() -> dict[str, Callable[..., Matchgate]]:
    """Catalog of named gate factories; `phase_left`/`phase_right` take an angle."""

    return {
        "fswap": fswap,
        "fswap_minus": fswap_minus,
        "ghh": ghh,
        "gxx": gxx,
        "gzz": gzz,
        "giz": giz,
        "phase_left": lambda phi: local_phase(phi, "left"),
        "phase_right": lambda phi: local_phase(phi, "right"),
    }


def gate_from_name(name: str, param: float | None = None) -> Matchgate:
    catalog = named_gates()
    if name not in catalog:
        raise MatchgateError(f"unknown gate name {name!r}")
    if name.startswith("phase_"):
        if param is None:
            raise MatchgateError(f"gate {name} needs a phase parameter")
        return catalog[name](param)
    return catalog[name]()


class Placement(BaseModel):
    """A gate acting on lines (j, j+1)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gate: Matchgate
    j: int
    param: float | None = None


class MatchgateCircuit(BaseModel):
    """Ordered nearest-neighbor gate placements on `n` lines."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    gates: tuple[Placement, ...] = ()

    @model_validator(mode="after")
    def _nearest_neighbor(self) -> "MatchgateCircuit":
        for placement in self.gates:
            if not 1 <= placement.j <= self.n - 1:
                raise DimensionError(f"placement {placement.j} outside 1..{self.n - 1}")
        return self

    def then(self, gate: Matchgate, j: int, param: float | None = None) -> "MatchgateCircuit":
        return MatchgateCircuit(n=self.n, gates=self.gates + (Placement(gate=gate, j=j, param=param),))

    def extend(self, other: "MatchgateCircuit") -> "MatchgateCircuit":
        if other.n != self.n:
            raise DimensionError("circuits act on different numbers of lines")
        return MatchgateCircuit(n=self.n, gates=self.gates + other.gates)

    def inverse(self) -> "MatchgateCircuit":
        reversed_gates = tuple(Placement(gate=p.gate.adjoint(), j=p.j) for p in reversed(self.gates))
        return MatchgateCircuit(n=self.n, gates=reversed_gates)

    def depth(self) -> int:
        busy = [0] * (self.n + 2)
        deepest = 0
        for placement in self.gates:
            layer = max(busy[placement.j], busy[placement.j + 1]) + 1
            busy[placement.j] = busy[placement.j + 1] = layer
            deepest = max(deepest, layer)
        return deepest

    def operator(self) -> np.ndarray:
        out = np.eye(1 << self.n, dtype=complex)
        for placement in self.gates:
            out = embed_two_qubit(placement.gate.matrix, placement.j, self.n) @ out
        return out


def embed_two_qubit(u: np.ndarray, j: int, n: int) -> np.ndarray:
    """Full 2^n matrix of a two-qubit gate on lines (j, j+1)."""

    if not 1 <= j <= n - 1:
        raise DimensionError(f"gate position {j} outside 1..{n - 1}")
    return np.kron(np.kron(np.eye(1 << (j - 1)), u), np.eye(1 << (n - j - 1)))


def run_circuit(state: QubitState, circuit: MatchgateCircuit) -> QubitState:
    if circuit.n != state.n:
        raise DimensionError(f"circuit on {circuit.n} lines, state on {state.n}")
    for placement in circuit.gates:
        state = apply_two_qubit_unchecked(state, placement.gate.matrix, placement.j)
    return state


def basis_move_gates(src: int, dst: int, b: int) -> list[Placement]:
    """fswap (b=0) or fswap_minus (b=1) chain carrying a |b> line from src to dst."""

    gate = fswap() if b == 0 else fswap_minus()
    if src <= dst:
        positions = range(src, dst)
    else:
        positions = range(src - 1, dst - 1, -1)
    return [Placement(gate=gate, j=j) for j in positions]


def move_basis_qubit(state: QubitState, src: int, dst: int, b: int) -> QubitState:
    """Move a |b> product line from `src` to `dst`; the other lines keep their order and amplitudes."""

    for line in (src, dst):
        if not 1 <= line <= state.n:
            raise DimensionError(f"line {line} outside 1..{state.n}")
    if project(state, src, b).prob < 1.0 - settings.eps_basis:
        raise BasisStateError(f"line {src} is not in |{b}>")
    for placement in basis_move_gates(src, dst, b):
        state = apply_two_qubit_unchecked(state, placement.gate.matrix, placement.j)
    return state


def connect_basis_states(src: str, dst: str) -> MatchgateCircuit:
    """Breadth-first search for a gxx/fswap circuit mapping |src> to +-|dst>."""

    if len(src) != len(dst):
        raise DimensionError("bitstrings differ in length")
    if src.count("1") % 2 != dst.count("1") % 2:
        raise MatchgateError("basis states of different parity are not MG-equivalent without ancillas")
    n = len(src)
    moves = {"fswap": fswap(), "gxx": gxx()}
    parents: dict[str, tuple[str, str, int] | None] = {src: None}
    queue = deque([src])
    while queue:
        current = queue.popleft()
        if current == dst:
            break
        for j in range(1, n):
            bits = list(current)
            left, right = bits[j - 1], bits[j]
            candidates = {
                "fswap": bits[: j - 1] + [right, left] + bits[j + 1 :],
                "gxx": bits[: j - 1] + [str(1 - int(left)), str(1 - int(right))] + bits[j + 1 :],
            }
            for name, nxt in candidates.items():
                key = "".join(nxt)
                if key not in parents:
                    parents[key] = (current, name, j)
                    queue.append(key)
    steps = []
    node = dst
    while parents[node] is not None:
        prev, name, j = parents[node]
        steps.append(Placement(gate=moves[name], j=j))
        node = prev
    return MatchgateCircuit(n=n, gates=tuple(reversed(steps)))


def random_matchgate(rng: np.random.Generator) -> Matchgate:
    """Haar blocks with B rescaled by a phase so det B = det A."""

    a = unitary_group.rvs(2, random_state=rng)
    b = unitary_group.rvs(2, random_state=rng)
    b = b * np.sqrt(np.linalg.det(a) / np.linalg.det(b))
    return make_matchgate(a, b, label="random")


def random_circuit(n: int, depth: int, rng: np.random.Generator) -> MatchgateCircuit:
    gates = tuple(Placement(gate=random_matchgate(rng), j=int(rng.integers(1, n))) for _ in range(depth))
    return MatchgateCircuit(n=n, gates=gates)
