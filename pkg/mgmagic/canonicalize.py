"""Four-line fermionic states to the psi_phi family by a depth-3 matchgate circuit.

Two-line blocks are split into the e-pair (|00>, |11>) and the d-pair
(|01>, |10>). The circuit first diagonalizes the e- and d-parts across the
12|34 cut, then an fswap on lines 2,3 folds the d-support into the e-subspace,
and a last pair of even-block gates rotates the Schmidt form onto psi_phi.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict

from mgmagic.common.config import settings
from mgmagic.common.errors import DimensionError, NotFermionicError
from mgmagic.common.logging import logger
from mgmagic.matchgate import (
    EVEN_BLOCK,
    ODD_BLOCK,
    MatchgateCircuit,
    Placement,
    block_pair_gate,
    even_block_gate,
    fswap,
    gxx,
    run_circuit,
)
from mgmagic.statevector import (
    Parity,
    QubitState,
    adjoin_basis,
    canonical_svd,
    drop_basis_qubit,
    parity,
    schmidt,
)
from mgmagic.states import psi_phi


class CanonicalForm(BaseModel):
    """Canonical phase plus the circuit reaching psi_phi.

    With `used_ancilla` the circuit acts on five lines: the input followed by
    a |0> ancilla, which ends in |`ancilla_bit`>.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    phi: float
    circuit: MatchgateCircuit
    used_ancilla: bool = False
    ancilla_bit: int | None = None
    schmidt_values: tuple[float, float]


class LiftedState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    state: QubitState
    circuit: MatchgateCircuit
    ancilla_bit: int = 1


def _require_four_lines(state: QubitState) -> Parity:
    if state.n != 4:
        raise DimensionError(f"canonical form is defined for 4 lines, got {state.n}")
    par = parity(state)
    if par is Parity.INDEFINITE:
        raise NotFermionicError("canonical form needs a state of definite parity")
    return par


def lift_odd_to_even(state: QubitState) -> LiftedState:
    """G(X,X) on line 4 and a fresh |0> ancilla; the ancilla leaves in |1>."""

    if _require_four_lines(state) is not Parity.ODD:
        raise NotFermionicError("lift_odd_to_even expects an odd state")
    circuit = MatchgateCircuit(n=5, gates=(Placement(gate=gxx(), j=4),))
    lifted = run_circuit(adjoin_basis(state, 0), circuit)
    return LiftedState(state=drop_basis_qubit(lifted, 5, 1), circuit=circuit)


def _blocks(state: QubitState) -> tuple[np.ndarray, np.ndarray]:
    grid = state.amps.reshape(4, 4)
    return grid[np.ix_(EVEN_BLOCK, EVEN_BLOCK)], grid[np.ix_(ODD_BLOCK, ODD_BLOCK)]


def _rotations(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(L, R) with L @ block @ R.T diagonal; identities on an empty block."""

    if np.linalg.norm(block) <= settings.eps_amp:
        return np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    u, _, vh = canonical_svd(block)
    return u.conj().T, vh.conj()


def phi_from_schmidt(values: np.ndarray) -> float:
    """phi in [0, pi] from the two Schmidt coefficients of psi_phi across 12|34."""

    big, small = sorted((float(v) for v in values), reverse=True)
    return float(2.0 * np.arctan2(2.0 * big * small, big * big - small * small))


def _even_canonical(state: QubitState) -> tuple[float, list[Placement], tuple[float, float]]:
    gates: list[Placement] = []

    even, odd = _blocks(state)
    a12, a34 = _rotations(even)
    b12, b34 = _rotations(odd)
    gates.append(Placement(gate=block_pair_gate(a12, b12), j=1))
    gates.append(Placement(gate=block_pair_gate(a34, b34), j=3))
    gates.append(Placement(gate=fswap(), j=2))

    folded = run_circuit(state, MatchgateCircuit(n=4, gates=tuple(gates)))
    f_block, leftover = _blocks(folded)
    if np.linalg.norm(leftover) > 1e-8:
        logger.warning("canonicalize: odd-block residue %.3e after folding", np.linalg.norm(leftover))

    u1, sigma, v1h = canonical_svd(f_block)
    sigma = sigma / np.linalg.norm(sigma)
    phi = phi_from_schmidt(sigma)
    target = 0.5 * np.array([[1.0, 1.0], [1.0, np.exp(1j * phi)]], dtype=complex)
    u2, _, v2h = canonical_svd(target)
    gates.append(Placement(gate=even_block_gate(u2 @ u1.conj().T), j=1))
    gates.append(Placement(gate=even_block_gate(v2h.T @ v1h.conj()), j=3))
    return phi, gates, (float(sigma[0] ** 2), float(sigma[1] ** 2))


def canonical_form(state: QubitState) -> CanonicalForm:
    """Circuit mapping `state` to psi_phi with phi folded into [0, pi]."""

    if _require_four_lines(state) is Parity.ODD:
        lifted = lift_odd_to_even(state)
        phi, gates, values = _even_canonical(lifted.state)
        circuit = lifted.circuit.extend(MatchgateCircuit(n=5, gates=tuple(gates)))
        return CanonicalForm(phi=phi, circuit=circuit, used_ancilla=True, ancilla_bit=1, schmidt_values=values)
    phi, gates, values = _even_canonical(state)
    return CanonicalForm(phi=phi, circuit=MatchgateCircuit(n=4, gates=tuple(gates)), schmidt_values=values)


def to_psi_phi(state: QubitState) -> tuple[CanonicalForm, QubitState]:
    """Run the canonical circuit and return the resulting 4-line state."""

    form = canonical_form(state)
    return form, _run(state, form)


def canonical_fidelity(form: CanonicalForm, out: QubitState) -> float:
    """Overlap of a canonical-circuit output with psi_phi at the form's phase."""

    return float(abs(np.vdot(psi_phi(form.phi).amps, out.amps)) ** 2)


def reconstruction_fidelity(state: QubitState) -> float:
    return canonical_fidelity(*to_psi_phi(state))


def _run(state: QubitState, form: CanonicalForm) -> QubitState:
    if form.used_ancilla:
        return drop_basis_qubit(run_circuit(adjoin_basis(state, 0), form.circuit), 5, form.ancilla_bit)
    return run_circuit(state, form.circuit)


def mg_equivalent_4q(first: QubitState, second: QubitState) -> bool:
    """Matchgate equivalence of two fermionic 4-line states via the canonical phase."""

    return abs(canonical_form(first).phi - canonical_form(second).phi) <= 1e-8


def output_schmidt_values(form: CanonicalForm, state: QubitState) -> np.ndarray:
    """Squared Schmidt coefficients of the canonical output across 12|34."""

    return schmidt(_run(state, form), [1, 2]).coeffs[:2] ** 2
