"""Named and random states used by protocols, the CLI and tests."""

from collections.abc import Sequence

import numpy as np

from mgmagic.common.errors import DimensionError
from mgmagic.statevector import Parity, QubitState, bit_parity, wrap


def basis_state(bits: str | Sequence[int]) -> QubitState:
    """|b_1 ... b_n> from a bitstring such as "0110"."""

    values = [int(b) for b in bits]
    if not values or any(b not in (0, 1) for b in values):
        raise DimensionError(f"invalid bitstring {bits!r}")
    index = int("".join(str(b) for b in values), 2)
    amps = np.zeros(1 << len(values), dtype=complex)
    amps[index] = 1.0
    return wrap(amps, len(values))


def psi_phi(phi: float) -> QubitState:
    """1/2 (|0000> + |0011> + |1100> + e^{i phi} |1111>)."""

    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = 0.5
    amps[0b0011] = 0.5
    amps[0b1100] = 0.5
    amps[0b1111] = 0.5 * np.exp(1j * phi)
    return wrap(amps, 4)


def magic_m() -> QubitState:
    """|phi+>_13 |phi+>_24, the Choi state of SWAP for the 14|23 split."""

    amps = np.zeros(16, dtype=complex)
    for index in (0b0000, 0b0101, 0b1010, 0b1111):
        amps[index] = 0.5
    return wrap(amps, 4)


def ghz(n: int = 4) -> QubitState:
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return wrap(amps, n)


def bell_state() -> QubitState:
    return wrap(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2), 2)


def plus_state() -> QubitState:
    return wrap(np.array([1, 1], dtype=complex) / np.sqrt(2), 1)


def random_state(n: int, rng: np.random.Generator) -> QubitState:
    """Haar-random state on n lines."""

    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return wrap(amps / np.linalg.norm(amps), n)


def random_fermionic_state(n: int, rng: np.random.Generator, parity: Parity | None = None) -> QubitState:
    """Haar-random state on the even or odd subspace (random choice when `parity` is None)."""

    if parity is None:
        parity = Parity.EVEN if rng.random() < 0.5 else Parity.ODD
    if parity is Parity.INDEFINITE:
        raise DimensionError("fermionic states have definite parity")
    wanted = 0 if parity is Parity.EVEN else 1
    mask = bit_parity(n) == wanted
    amps = np.zeros(1 << n, dtype=complex)
    count = int(mask.sum())
    amps[mask] = rng.normal(size=count) + 1j * rng.normal(size=count)
    return wrap(amps / np.linalg.norm(amps), n)
