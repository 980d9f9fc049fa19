"""Tests for the psi_phi canonical form of 4-line fermionic states."""

import numpy as np
import pytest

from mgmagic.canonicalize import (
    canonical_form,
    lift_odd_to_even,
    mg_equivalent_4q,
    output_schmidt_values,
    reconstruction_fidelity,
)
from mgmagic.common.errors import DimensionError, NotFermionicError
from mgmagic.jordan_wigner import is_gaussian_state, is_gaussian_unitary
from mgmagic.matchgate import run_circuit, random_circuit
from mgmagic.states import basis_state, ghz, magic_m, psi_phi, random_fermionic_state, random_state
from mgmagic.statevector import Parity, parity, wrap


def test_psi_phi_is_a_fixed_point():
    for phi in (0.0, 0.4, np.pi / 2, 2.5, np.pi):
        form = canonical_form(psi_phi(phi))
        assert form.phi == pytest.approx(phi, abs=1e-9)
        assert reconstruction_fidelity(psi_phi(phi)) == pytest.approx(1.0, abs=1e-9)


def test_phi_folds_into_upper_half():
    assert canonical_form(psi_phi(2 * np.pi - 0.7)).phi == pytest.approx(0.7, abs=1e-9)


def test_choi_state_of_swap_is_pi():
    assert canonical_form(magic_m()).phi == pytest.approx(np.pi, abs=1e-9)


def test_ghz_is_pi_and_reconstructs():
    form = canonical_form(ghz(4))
    assert form.phi == pytest.approx(np.pi, abs=1e-9)
    assert reconstruction_fidelity(ghz(4)) >= 1 - 1e-9


def test_random_fermionic_states_reconstruct(rng):
    for _ in range(200):
        state = random_fermionic_state(4, rng)
        form = canonical_form(state)
        assert form.circuit.depth() <= 4 if form.used_ancilla else form.circuit.depth() <= 3
        assert reconstruction_fidelity(state) >= 1 - 1e-9
        for placement in form.circuit.gates:
            assert is_gaussian_unitary(placement.gate.matrix)


def test_schmidt_law(rng):
    state = random_fermionic_state(4, rng, Parity.EVEN)
    form = canonical_form(state)
    half = 0.5 * abs(np.cos(form.phi / 2))
    assert np.allclose(sorted(output_schmidt_values(form, state), reverse=True), [0.5 + half, 0.5 - half], atol=1e-9)
    assert np.allclose(form.schmidt_values, [0.5 + half, 0.5 - half], atol=1e-9)


def test_phi_zero_iff_gaussian(rng):
    for _ in range(40):
        state = random_fermionic_state(4, rng)
        assert (canonical_form(state).phi < 1e-6) == is_gaussian_state(state)
    assert canonical_form(basis_state("0110")).phi < 1e-6


def test_phi_invariant_under_matchgate_circuits(rng):
    for _ in range(20):
        state = random_fermionic_state(4, rng)
        moved = run_circuit(state, random_circuit(4, 10, rng))
        assert canonical_form(moved).phi == pytest.approx(canonical_form(state).phi, abs=1e-8)


def test_mg_equivalence_cases():
    assert mg_equivalent_4q(psi_phi(np.pi), ghz(4))
    assert mg_equivalent_4q(psi_phi(0.0), basis_state("0000"))
    assert not mg_equivalent_4q(psi_phi(np.pi / 2), psi_phi(np.pi))


def test_lift_basis_state():
    lifted = lift_odd_to_even(basis_state("1000"))
    assert parity(lifted.state) is Parity.EVEN
    assert abs(lifted.state.amps[0b1001]) == pytest.approx(1.0)
    assert lifted.ancilla_bit == 1


def test_lift_superposition():
    amps = np.zeros(16, dtype=complex)
    amps[0b1000] = amps[0b0010] = 1 / np.sqrt(2)
    lifted = lift_odd_to_even(wrap(amps, 4))
    assert parity(lifted.state) is Parity.EVEN


def test_lift_keeps_non_gaussianity(rng):
    state = random_fermionic_state(4, rng, Parity.ODD)
    lifted = lift_odd_to_even(state)
    assert is_gaussian_state(lifted.state) == is_gaussian_state(state)


def test_lift_rejects_even_input():
    with pytest.raises(NotFermionicError):
        lift_odd_to_even(basis_state("0000"))


def test_rejects_bad_inputs(rng):
    with pytest.raises(DimensionError):
        canonical_form(basis_state("00000"))
    with pytest.raises(NotFermionicError):
        canonical_form(random_state(4, rng))
