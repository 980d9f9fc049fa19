"""Dense n-qubit states: basis convention, parity, gates, projection, Schmidt form.

Lines are numbered from 1. Line 1 is the most significant bit of the amplitude
index, so `amps[i]` is the amplitude of the bitstring of `i` written with `n`
digits, read left to right as lines 1..n.
"""

from collections.abc import Iterable
from enum import Enum
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mgmagic.common.config import settings
from mgmagic.common.errors import BasisStateError, DimensionError, NotUnitaryError


class Parity(str, Enum):
    """Eigenvalue class of Z^n (or of Z on a block of lines)."""

    EVEN = "even"
    ODD = "odd"
    INDEFINITE = "indefinite"


class QubitState(BaseModel):
    """Immutable amplitude vector over `n` lines.

    `normalized=False` marks intermediate projection results; every other
    state has unit norm within `eps_norm`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    amps: np.ndarray
    normalized: bool = True

    @field_validator("amps", mode="before")
    @classmethod
    def _as_complex_vector(cls, value: object) -> np.ndarray:
        arr = np.array(value, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape_and_norm(self) -> "QubitState":
        if not 1 <= self.n <= settings.max_qubits:
            raise DimensionError(f"qubit count {self.n} outside 1..{settings.max_qubits}")
        if self.amps.shape != (1 << self.n,):
            raise DimensionError(f"expected {1 << self.n} amplitudes, got {self.amps.shape[0]}")
        if self.normalized and abs(np.linalg.norm(self.amps) - 1.0) > settings.eps_norm:
            raise ValueError("state marked normalized but norm differs from 1")
        return self

    @property
    def dim(self) -> int:
        return 1 << self.n


class Projection(BaseModel):
    """Outcome of applying P_b on one line."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    prob: float
    post: QubitState
    zero: bool


class SchmidtDecomposition(BaseModel):
    """Schmidt data for a bipartition `left | right`.

    Applying `u_left` to the left lines and `u_right` to the right lines maps
    the state to sum_k coeffs[k] |k>|k>, with both factors ordered by
    ascending line number.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    left: tuple[int, ...]
    right: tuple[int, ...]
    coeffs: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray


def wrap(amps: np.ndarray, n: int, normalized: bool = True) -> QubitState:
    """Build a state from trusted internal arrays without re-validation."""

    arr = np.ascontiguousarray(amps, dtype=complex)
    arr.setflags(write=False)
    return QubitState.model_construct(n=n, amps=arr, normalized=normalized)


@lru_cache(maxsize=None)
def bit_parity(n: int) -> np.ndarray:
    """Bit-sum parity (0/1) of every basis index on n lines."""

    idx = np.arange(1 << n)
    par = np.zeros(1 << n, dtype=np.int64)
    for shift in range(n):
        par ^= (idx >> shift) & 1
    par.setflags(write=False)
    return par


@lru_cache(maxsize=None)
def line_bits(n: int, line: int) -> np.ndarray:
    """Value of `line` in every basis index on n lines."""

    bits = (np.arange(1 << n) >> (n - line)) & 1
    bits.setflags(write=False)
    return bits


def _check_line(n: int, line: int) -> None:
    if not 1 <= line <= n:
        raise DimensionError(f"line {line} outside 1..{n}")


def parity(state: QubitState) -> Parity:
    """Parity of the support of `state` (amplitudes above eps_amp count)."""

    support = np.abs(state.amps) > settings.eps_amp
    if not support.any():
        return Parity.INDEFINITE
    par = bit_parity(state.n)[support]
    if not par.any():
        return Parity.EVEN
    if par.all():
        return Parity.ODD
    return Parity.INDEFINITE


def block_parity(state: QubitState, lines: Iterable[int]) -> Parity:
    """Parity of the restriction to `lines`, from the expectation of Z on the block."""

    par = np.zeros(state.dim, dtype=np.int64)
    for line in lines:
        _check_line(state.n, line)
        par ^= line_bits(state.n, line)
    weights = np.abs(state.amps) ** 2
    expectation = float(np.sum(weights * (1 - 2 * par)) / np.sum(weights))
    if expectation > 1.0 - settings.eps_basis:
        return Parity.EVEN
    if expectation < -1.0 + settings.eps_basis:
        return Parity.ODD
    return Parity.INDEFINITE


def apply_two_qubit_unchecked(state: QubitState, u: np.ndarray, j: int) -> QubitState:
    """Apply a pre-validated 4x4 matrix to lines (j, j+1)."""

    psi = state.amps.reshape(1 << (j - 1), 4, 1 << (state.n - j - 1))
    out = np.einsum("ab,ibk->iak", u, psi)
    return wrap(out.reshape(-1), state.n, state.normalized)


def apply_two_qubit(state: QubitState, u: np.ndarray, j: int) -> QubitState:
    """Apply the 4x4 unitary `u` to lines (j, j+1), line j being the high bit."""

    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DimensionError(f"two-qubit gate must be 4x4, got {u.shape}")
    if not 1 <= j <= state.n - 1:
        raise DimensionError(f"gate position {j} outside 1..{state.n - 1}")
    if np.max(np.abs(u.conj().T @ u - np.eye(4))) > settings.eps_unitary:
        raise NotUnitaryError("gate matrix is not unitary")
    return apply_two_qubit_unchecked(state, u, j)


def project(state: QubitState, j: int, b: int) -> Projection:
    """Apply P_b on line j; renormalize unless the branch has zero weight."""

    _check_line(state.n, j)
    projected = np.where(line_bits(state.n, j) == b, state.amps, 0.0)
    total = float(np.vdot(state.amps, state.amps).real)
    prob = float(np.vdot(projected, projected).real) / total
    if prob > settings.eps_prob:
        return Projection(prob=prob, post=wrap(projected / np.sqrt(prob * total), state.n), zero=False)
    return Projection(prob=prob, post=wrap(projected, state.n, normalized=False), zero=True)


def measure(state: QubitState, j: int, rng: np.random.Generator) -> tuple[int, QubitState]:
    """Computational-basis measurement of line j with Born-rule sampling."""

    p0 = project(state, j, 0).prob
    outcome = 0 if rng.random() < p0 else 1
    return outcome, project(state, j, outcome).post


def tensor(first: QubitState, second: QubitState) -> QubitState:
    """Product state with `second` placed on the lines after `first`."""

    return wrap(np.kron(first.amps, second.amps), first.n + second.n, first.normalized and second.normalized)


def adjoin_basis(state: QubitState, b: int, side: str = "right") -> QubitState:
    """Adjoin a fresh |b> ancilla at the left or right fringe."""

    ket = np.zeros(2, dtype=complex)
    ket[b] = 1.0
    amps = np.kron(state.amps, ket) if side == "right" else np.kron(ket, state.amps)
    return wrap(amps, state.n + 1, state.normalized)


def drop_basis_qubit(state: QubitState, line: int, b: int) -> QubitState:
    """Remove a line that is a |b> product factor of the state."""

    _check_line(state.n, line)
    if state.n < 2:
        raise DimensionError("cannot drop the only line of a state")
    outcome = project(state, line, b)
    if outcome.prob < 1.0 - settings.eps_basis:
        raise BasisStateError(f"line {line} is not in |{b}> (weight {outcome.prob:.3e})")
    amps = state.amps.reshape(1 << (line - 1), 2, 1 << (state.n - line))[:, b, :]
    amps = amps.reshape(-1)
    return wrap(amps / np.linalg.norm(amps), state.n - 1, state.normalized)


def overlap(first: QubitState, second: QubitState) -> complex:
    """Inner product <first|second>."""

    if first.n != second.n:
        raise DimensionError("states live on different numbers of lines")
    return complex(np.vdot(first.amps, second.amps))


def fidelity(first: QubitState, second: QubitState) -> float:
    return abs(overlap(first, second)) ** 2


def _canonical_phase(vh: np.ndarray, u: np.ndarray, rank: int) -> None:
    for k in range(rank):
        row = vh[k]
        lead = int(np.argmax(np.abs(row) > 1e-12))
        phase = row[lead] / abs(row[lead])
        vh[k] *= np.conj(phase)
        u[:, k] *= phase


def _break_ties(s: np.ndarray, u: np.ndarray, vh: np.ndarray) -> None:
    start = 0
    while start < len(s):
        stop = start + 1
        while stop < len(s) and abs(s[stop] - s[start]) < settings.eps_recon:
            stop += 1
        if stop - start > 1:
            block = list(range(start, stop))
            keys = {k: tuple(np.round(np.abs(vh[k]), 9)) + tuple(np.round(np.angle(vh[k]), 9)) for k in block}
            order = sorted(block, key=lambda k: keys[k], reverse=True)
            vh[block] = vh[order]
            u[:, block] = u[:, order]
        start = stop


def canonical_svd(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD with phase-fixed singular vectors and ordered degenerate blocks."""

    u, s, vh = np.linalg.svd(matrix)
    u = np.array(u, dtype=complex)
    vh = np.array(vh, dtype=complex)
    _canonical_phase(vh, u, len(s))
    _break_ties(s, u, vh)
    return u, s, vh


def schmidt(state: QubitState, left: Iterable[int]) -> SchmidtDecomposition:
    """Schmidt decomposition across `left | rest` via SVD of the reshaped amplitudes.

    Singular vectors are phase-fixed (first significant right entry real
    positive) and degenerate singular values are ordered lexicographically by
    their right singular vectors, so the output is deterministic.
    """

    left_lines = tuple(sorted(set(left)))
    for line in left_lines:
        _check_line(state.n, line)
    if not 0 < len(left_lines) < state.n:
        raise DimensionError("left must be a proper nonempty subset of lines")
    right_lines = tuple(q for q in range(1, state.n + 1) if q not in left_lines)
    order = [q - 1 for q in left_lines + right_lines]
    matrix = state.amps.reshape([2] * state.n).transpose(order).reshape(1 << len(left_lines), -1)
    u, s, vh = canonical_svd(matrix)
    return SchmidtDecomposition(
        left=left_lines,
        right=right_lines,
        coeffs=s,
        u_left=u.conj().T,
        u_right=vh.conj(),
    )


def schmidt_residual(state: QubitState, decomposition: SchmidtDecomposition) -> float:
    """Max entrywise deviation of (U_left x U_right)|psi> from the diagonal Schmidt vector."""

    order = [q - 1 for q in decomposition.left + decomposition.right]
    matrix = state.amps.reshape([2] * state.n).transpose(order).reshape(1 << len(decomposition.left), -1)
    rotated = decomposition.u_left @ matrix @ decomposition.u_right.T
    target = np.zeros_like(rotated)
    rank = len(decomposition.coeffs)
    target[np.arange(rank), np.arange(rank)] = decomposition.coeffs
    return float(np.max(np.abs(rotated - target)))
