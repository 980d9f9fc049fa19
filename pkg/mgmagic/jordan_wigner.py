"""Jordan-Wigner operator algebra and the Lambda-operator Gaussianity tests.

c_{2j-1} = Z x ... x Z x X_j x I x ... x I and c_{2j} is the same string with
Y at line j. Lambda_n = sum_i c_i x c_i acts on two copies of the register.
"""

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mgmagic.common.config import settings
from mgmagic.common.errors import DimensionError, NotEvenError, NotFermionicError, NotUnitaryError
from mgmagic.common.logging import logger
from mgmagic.statevector import Parity, QubitState, bit_parity, parity, wrap


_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (left, right) -> (phase, letter) for the single-qubit product left * right.
_PRODUCT = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


class PauliString(BaseModel):
    """phase * P_1 x ... x P_n with letters from IXYZ."""

    model_config = ConfigDict(frozen=True)

    n: int
    letters: str
    phase: complex = 1.0 + 0.0j

    @field_validator("letters")
    @classmethod
    def _known_letters(cls, value: str) -> str:
        if set(value) - set("IXYZ"):
            raise ValueError(f"unknown Pauli letters in {value!r}")
        return value

    @model_validator(mode="after")
    def _length_matches(self) -> "PauliString":
        if len(self.letters) != self.n:
            raise ValueError("letters must have length n")
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError("phase must have unit modulus")
        return self

    def masks(self) -> tuple[int, int, int]:
        """(flip mask, sign mask, number of Y letters) with line q at bit n - q."""

        flip = sign = 0
        for q, letter in enumerate(self.letters, start=1):
            bit = 1 << (self.n - q)
            if letter in "XY":
                flip |= bit
            if letter in "ZY":
                sign |= bit
        return flip, sign, self.letters.count("Y")

    def to_matrix(self) -> np.ndarray:
        out = np.array([[self.phase]], dtype=complex)
        for letter in self.letters:
            out = np.kron(out, _SINGLE[letter])
        return out


def compose(left: PauliString, right: PauliString) -> PauliString:
    """Operator product left * right."""

    if left.n != right.n:
        raise DimensionError("Pauli strings act on different numbers of lines")
    phase = left.phase * right.phase
    letters = []
    for a, b in zip(left.letters, right.letters):
        if a == "I":
            letters.append(b)
        elif b == "I":
            letters.append(a)
        elif a == b:
            letters.append("I")
        else:
            factor, letter = _PRODUCT[(a, b)]
            phase *= factor
            letters.append(letter)
    return PauliString(n=left.n, letters="".join(letters), phase=phase)


def jw_operator(n: int, l: int) -> PauliString:
    """The JW operator c_l on n lines (1 <= l <= 2n)."""

    if not 1 <= l <= 2 * n:
        raise DimensionError(f"JW index {l} outside 1..{2 * n}")
    j = (l + 1) // 2
    letter = "X" if l % 2 == 1 else "Y"
    return PauliString(n=n, letters="Z" * (j - 1) + letter + "I" * (n - j))


def _apply_pauli_amps(amps: np.ndarray, n: int, p: PauliString) -> np.ndarray:
    flip, sign_mask, y_count = p.masks()
    idx = np.arange(1 << n)
    signs = 1 - 2 * bit_parity(n)[idx & sign_mask]
    out = np.empty_like(amps)
    out[idx ^ flip] = (p.phase * 1j**y_count) * signs * amps
    return out


def apply_pauli(state: QubitState, p: PauliString) -> QubitState:
    """Signed bit-flip action of a Pauli string."""

    if p.n != state.n:
        raise DimensionError(f"Pauli string on {p.n} lines applied to {state.n}-line state")
    return wrap(_apply_pauli_amps(state.amps, state.n, p), state.n, state.normalized)


def jw_images(amps: np.ndarray, n: int) -> np.ndarray:
    """Rows c_l |psi> for l = 1..2n."""

    return np.stack([_apply_pauli_amps(amps, n, jw_operator(n, l)) for l in range(1, 2 * n + 1)])


class CorrelationMatrix(BaseModel):
    """M[i][j] = <psi| c_i c_j |psi> (0-based indices for c_1..c_2n)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    m: np.ndarray

    def anticommutator_defect(self) -> float:
        """max |M + M^T - 2I|; zero for normalized states."""

        size = self.m.shape[0]
        return float(np.max(np.abs(self.m + self.m.T - 2 * np.eye(size))))


def correlation_matrix(state: QubitState) -> CorrelationMatrix:
    images = jw_images(state.amps, state.n)
    return CorrelationMatrix(m=images.conj() @ images.T)


def lambda_norm_sq(state: QubitState) -> float:
    """||Lambda_n |psi>^{x2}||^2 = sum_ij <psi|c_i c_j|psi>^2."""

    m = correlation_matrix(state).m
    value = complex(np.sum(m * m))
    if abs(value.imag) > 1e-9:
        logger.warning("lambda_norm_sq imaginary residue=%s n=%s", value.imag, state.n)
    return max(value.real, 0.0)


@lru_cache(maxsize=None)
def jw_matrices(n: int) -> np.ndarray:
    """Dense stack of the 2n JW matrices (2n, 2^n, 2^n)."""

    stack = np.stack([jw_operator(n, l).to_matrix() for l in range(1, 2 * n + 1)])
    stack.setflags(write=False)
    return stack


@lru_cache(maxsize=None)
def lambda_matrix(n: int) -> np.ndarray:
    """Materialized Lambda_n on the doubled register (oracle for small n)."""

    if n > 5:
        raise DimensionError("materialized Lambda is limited to n <= 5")
    out = sum(np.kron(c, c) for c in jw_matrices(n))
    out.setflags(write=False)
    return out


def lambda_norm_sq_bruteforce(state: QubitState) -> float:
    doubled = np.kron(state.amps, state.amps)
    v = lambda_matrix(state.n) @ doubled
    return float(np.vdot(v, v).real)


def is_gaussian_state(state: QubitState) -> bool:
    """Lambda criterion; defined for fermionic states only."""

    if parity(state) is Parity.INDEFINITE:
        raise NotFermionicError("Gaussianity criterion needs a state of definite parity")
    return lambda_norm_sq(state) < settings.eps_gauss


def _qubit_count(u: np.ndarray) -> int:
    dim = u.shape[0]
    if u.ndim != 2 or u.shape[1] != dim or dim < 2 or dim & (dim - 1):
        raise DimensionError(f"expected a square 2^n matrix, got shape {u.shape}")
    return dim.bit_length() - 1


def check_even_unitary(u: np.ndarray) -> int:
    """Validate unitarity and evenness; return the qubit count."""

    n = _qubit_count(u)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > settings.eps_unitary:
        raise NotUnitaryError("operator is not unitary")
    par = bit_parity(n)
    if np.max(np.abs(u[par[:, None] != par[None, :]]), initial=0.0) > settings.eps_unitary:
        raise NotEvenError("operator mixes parity subspaces")
    return n


def span_residual(u: np.ndarray) -> float:
    """Largest distance of U c_i U^dag from span{c_1..c_2n}."""

    n = _qubit_count(u)
    cs = jw_matrices(n)
    conjugated = np.einsum("ab,ibc,cd->iad", u, cs, u.conj().T)
    coeffs = np.einsum("kab,iba->ik", cs, conjugated) / u.shape[0]
    recon = np.einsum("ik,kab->iab", coeffs, cs)
    return float(np.max(np.abs(conjugated - recon)))


def commutator_residual(u: np.ndarray) -> float:
    """max |[Lambda_n, U x U]|, the literal criterion (small n only)."""

    n = _qubit_count(u)
    if n > 3:
        raise DimensionError("literal commutator check is limited to n <= 3")
    doubled = np.kron(u, u)
    lam = lambda_matrix(n)
    return float(np.max(np.abs(lam @ doubled - doubled @ lam)))


def is_gaussian_unitary(u: np.ndarray, method: str = "span") -> bool:
    """Gaussianity of an even unitary on n <= 6 lines.

    `span` checks that conjugation keeps every c_i inside the JW span;
    `commutator` evaluates [Lambda, U x U] directly (n <= 3).
    """

    u = np.asarray(u, dtype=complex)
    n = check_even_unitary(u)
    if n > 6:
        raise DimensionError("unitary Gaussianity check is limited to n <= 6")
    if method == "commutator":
        return commutator_residual(u) < settings.eps_unitary
    return span_residual(u) < settings.eps_unitary
