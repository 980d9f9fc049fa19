"""Tests for case classification and the reduction to 4-line magic states."""

import numpy as np
import pytest

import mgmagic.reduce as reduce_module
from mgmagic.common.errors import Case2bViolation, DimensionError, GaussianInputError, RetryBudgetExhausted
from mgmagic.jordan_wigner import is_gaussian_state, is_gaussian_unitary, lambda_norm_sq
from mgmagic.matchgate import gate_from_name
from mgmagic.reduce import (
    CaseTag,
    antidiagonal_matrix,
    antidiagonal_rank,
    classify_case,
    is_antidiagonal,
    projected_v_norm_sq,
    projected_v_norm_sq_bruteforce,
    random_non_gaussian_state,
    reduce_once,
    reduce_to_magic4,
    sign_constrained_coefficients,
    sign_constraint_residual,
    v_matrix,
)
from mgmagic.states import basis_state, psi_phi, random_fermionic_state
from mgmagic.statevector import Parity, adjoin_basis, bit_parity, fidelity


def embedded_psi_pi():
    return adjoin_basis(psi_phi(np.pi), 0)


def test_gaussian_state_projects_to_zero():
    state = basis_state("0110")
    for j in range(1, 5):
        for b in (0, 1):
            assert projected_v_norm_sq(state, j, b) < 1e-12


def test_psi_pi_projects_to_zero():
    for j in range(1, 5):
        for b in (0, 1):
            assert projected_v_norm_sq(psi_phi(np.pi), j, b) < 1e-12
            assert projected_v_norm_sq_bruteforce(psi_phi(np.pi), j, b) < 1e-12


def test_gram_matches_doubled_register(rng):
    for _ in range(10):
        state = random_fermionic_state(4, rng)
        for j in range(1, 5):
            for b in (0, 1):
                assert projected_v_norm_sq(state, j, b) == pytest.approx(projected_v_norm_sq_bruteforce(state, j, b), abs=1e-8)
            if j < 4:
                assert projected_v_norm_sq(state, j, 1, pre_gate=j) == pytest.approx(
                    projected_v_norm_sq_bruteforce(state, j, 1, pre_gate=j), abs=1e-8
                )


def test_embedded_psi_pi_is_case1_on_last_line():
    case = classify_case(embedded_psi_pi())
    assert case.tag is CaseTag.CASE1
    assert (case.j, case.b) == (5, 0)


def test_random_states_never_hit_case2b(rng):
    for k in (5, 6, 7):
        for _ in range(70):
            case = classify_case(random_non_gaussian_state(k, rng))
            assert case.tag in (CaseTag.CASE1, CaseTag.CASE2A)
            assert case.witness_norm > 1e-9


def test_missing_witness_raises_with_rank(monkeypatch):
    monkeypatch.setattr(reduce_module, "projected_v_norm_sq", lambda *args, **kwargs: 0.0)
    with pytest.raises(Case2bViolation) as info:
        classify_case(embedded_psi_pi())
    assert info.value.rank == 8
    assert info.value.rank == np.linalg.matrix_rank(v_matrix(embedded_psi_pi()), tol=1e-9)
    assert "not anti-diagonal" in str(info.value)


def test_classify_preconditions():
    with pytest.raises(DimensionError):
        classify_case(psi_phi(1.0))
    with pytest.raises(GaussianInputError):
        classify_case(basis_state("01100"))


def test_psi_pi_v_is_antidiagonal_with_rank_eight():
    v = v_matrix(psi_phi(np.pi))
    assert is_antidiagonal(v)
    assert antidiagonal_rank(v) == 8


def test_sign_constrained_family_matches_psi_pi_count(rng):
    lambdas = sign_constrained_coefficients(4, rng)
    assert sign_constraint_residual(lambdas) < 1e-12
    assert antidiagonal_rank(antidiagonal_matrix(lambdas)) == 8 == antidiagonal_rank(v_matrix(psi_phi(np.pi)))


def test_sign_constrained_family_exceeds_rank_bound(rng):
    """The synthetic family has 2^(k-1) anti-diagonal entries, more than 2k."""

    k = 5
    lambdas = sign_constrained_coefficients(k, rng)
    assert sign_constraint_residual(lambdas) < 1e-12
    v = antidiagonal_matrix(lambdas)
    assert antidiagonal_rank(v) == 2 ** (k - 1) > 2 * k


@pytest.mark.parametrize("wanted, bit", [(Parity.ODD, 1), (Parity.EVEN, 0)])
def test_sign_constrained_family_stays_in_one_parity_class(rng, wanted, bit):
    lambdas = sign_constrained_coefficients(6, rng, wanted)
    support = np.flatnonzero(np.abs(lambdas) > 0)
    assert len(support) == 32
    assert np.all(bit_parity(6)[support] == bit)
    with pytest.raises(ValueError):
        sign_constrained_coefficients(6, rng, Parity.INDEFINITE)


def test_v_matrix_rank_is_at_most_2k(rng):
    state = random_non_gaussian_state(5, rng)
    assert np.linalg.matrix_rank(v_matrix(state), tol=1e-9) <= 10


def test_reduce_once_embedded_example():
    out, step = reduce_once(embedded_psi_pi())
    assert out.n == 4
    assert fidelity(out, psi_phi(np.pi)) == pytest.approx(1.0, abs=1e-9)
    assert step.case.tag is CaseTag.CASE1


def test_force_reduction_keeps_non_gaussianity(rng):
    for _ in range(100):
        out, step = reduce_once(random_non_gaussian_state(6, rng))
        assert out.n == 5
        assert lambda_norm_sq(out) > 1e-9
        assert step.lambda_norm_sq > 1e-9
        for event in step.gates:
            assert is_gaussian_unitary(gate_from_name(event.name, event.param).matrix)


def test_reduce_rejects_gaussian_input():
    with pytest.raises(GaussianInputError):
        reduce_once(basis_state("00000"))


def test_reduce_to_magic4_base_case():
    form, chain = reduce_to_magic4(psi_phi(0.8))
    assert chain.steps == []
    assert form.phi == pytest.approx(0.8, abs=1e-9)


def test_reduce_to_magic4_from_six_lines(rng):
    for _ in range(10):
        form, chain = reduce_to_magic4(random_non_gaussian_state(6, rng))
        assert 1e-6 < form.phi <= np.pi + 1e-12
        assert len(chain.steps) == 2
        assert fidelity(chain.canonical_state, psi_phi(form.phi)) >= 1 - 1e-9
        assert not is_gaussian_state(chain.final_state)


def test_reduce_chains_end_away_from_zero(rng):
    for k in (5, 6, 7):
        for _ in range(5):
            form, _ = reduce_to_magic4(random_non_gaussian_state(k, rng))
            assert form.phi > 1e-6


def test_sample_mode_succeeds_within_budget(rng):
    state = random_non_gaussian_state(5, rng)
    successes = 0
    for _ in range(100):
        try:
            out, step = reduce_once(state, mode="sample", rng=rng, retry_budget=20)
        except RetryBudgetExhausted:
            continue
        successes += 1
        assert out.n == 4
        assert step.attempts <= 20
    assert successes >= 99


def test_sample_mode_needs_generator():
    with pytest.raises(ValueError):
        reduce_once(embedded_psi_pi(), mode="sample")
