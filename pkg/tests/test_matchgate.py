"""Tests for matchgate construction, the gate catalog and n.n. circuits."""

import numpy as np
import pytest

from mgmagic.common.errors import BasisStateError, DeterminantMismatchError, DimensionError, MatchgateError
from mgmagic.jordan_wigner import is_gaussian_unitary
from mgmagic.matchgate import (
    MatchgateCircuit,
    Placement,
    block_pair_gate,
    connect_basis_states,
    embed_two_qubit,
    even_block_gate,
    fswap,
    fswap_minus,
    gate_from_name,
    ghh,
    giz,
    gxx,
    gzz,
    local_phase,
    make_matchgate,
    move_basis_qubit,
    named_gates,
    odd_block_gate,
    random_circuit,
    random_matchgate,
    run_circuit,
)
from mgmagic.states import basis_state, bell_state, random_state
from mgmagic.statevector import adjoin_basis, bit_parity, fidelity, tensor

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def test_fswap_matrix():
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]])
    assert np.allclose(fswap().matrix, expected)


def test_gxx_is_x_tensor_x():
    assert np.allclose(gxx().matrix, np.kron(X, X))


def test_z_gates_act_on_one_line():
    assert np.allclose(gzz().matrix, np.kron(Z, np.eye(2)))
    assert np.allclose(giz().matrix, np.kron(np.eye(2), Z))


def test_local_phase_sides():
    phase = np.diag([1, np.exp(0.3j)])
    assert np.allclose(local_phase(0.3, "left").matrix, np.kron(phase, np.eye(2)))
    assert np.allclose(local_phase(0.3, "right").matrix, np.kron(np.eye(2), phase))


def test_determinant_mismatch_rejected():
    with pytest.raises(DeterminantMismatchError):
        make_matchgate(np.eye(2), Z)


def test_block_gates_are_valid(rng):
    a = random_matchgate(rng).a
    b = random_matchgate(rng).b
    for gate in (even_block_gate(a), odd_block_gate(b), block_pair_gate(a, b)):
        assert is_gaussian_unitary(gate.matrix)


def test_catalog_gates_are_gaussian():
    for name in named_gates():
        gate = gate_from_name(name, 0.4 if name.startswith("phase_") else None)
        assert is_gaussian_unitary(gate.matrix), name


def test_unknown_and_unparameterized_names():
    with pytest.raises(MatchgateError):
        gate_from_name("cnot")
    with pytest.raises(MatchgateError):
        gate_from_name("phase_left")


def test_circuit_rejects_far_placement():
    with pytest.raises(ValueError):
        MatchgateCircuit(n=3, gates=(Placement(gate=ghh(), j=3),))


def test_inverse_undoes_circuit(rng):
    circuit = random_circuit(4, 10, rng)
    state = random_state(4, rng)
    back = run_circuit(run_circuit(state, circuit), circuit.inverse())
    assert fidelity(back, state) == pytest.approx(1.0)


def test_depth_layers():
    circuit = MatchgateCircuit(n=4, gates=(Placement(gate=ghh(), j=1), Placement(gate=ghh(), j=3), Placement(gate=fswap(), j=2)))
    assert circuit.depth() == 2


def test_operator_matches_run(rng):
    circuit = random_circuit(3, 5, rng)
    state = random_state(3, rng)
    assert np.allclose(circuit.operator() @ state.amps, run_circuit(state, circuit).amps)


def test_move_basis_qubit_preserves_entanglement():
    """A |1> line carried across a Bell pair leaves the pair untouched."""

    state = tensor(basis_state("1"), bell_state())
    moved = move_basis_qubit(state, 1, 3, 1)
    assert np.allclose(moved.amps, tensor(bell_state(), basis_state("1")).amps, rtol=0, atol=1e-12)
    back = move_basis_qubit(moved, 3, 1, 1)
    assert np.allclose(back.amps, state.amps, rtol=0, atol=1e-12)
    zero_moved = move_basis_qubit(tensor(bell_state(), basis_state("0")), 3, 1, 0)
    assert np.allclose(zero_moved.amps, tensor(basis_state("0"), bell_state()).amps, rtol=0, atol=1e-12)
    assert fswap_minus().label == "fswap_minus"


def test_move_refuses_non_basis_line():
    with pytest.raises(BasisStateError):
        move_basis_qubit(adjoin_basis(bell_state(), 0), 1, 3, 0)


def test_connect_basis_states():
    circuit = connect_basis_states("0110", "1111")
    out = run_circuit(basis_state("0110"), circuit)
    assert fidelity(out, basis_state("1111")) == pytest.approx(1.0)


def test_connect_rejects_parity_change():
    with pytest.raises(MatchgateError):
        connect_basis_states("01", "00")
    with pytest.raises(DimensionError):
        connect_basis_states("01", "010")


def test_random_circuits_never_mix_parity_classes(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        circuit = random_circuit(n, int(rng.integers(1, 31)), rng)
        odd = bit_parity(n).astype(bool)
        op = circuit.operator()
        assert np.max(np.abs(op[np.ix_(odd, ~odd)])) < 1e-10
        assert np.max(np.abs(op[np.ix_(~odd, odd)])) < 1e-10


def test_connect_every_same_parity_pair():
    for n in range(2, 7):
        strings = [format(x, f"0{n}b") for x in range(1 << n)]
        for src in strings:
            for dst in strings:
                if src.count("1") % 2 != dst.count("1") % 2:
                    continue
                out = run_circuit(basis_state(src), connect_basis_states(src, dst))
                assert fidelity(out, basis_state(dst)) == pytest.approx(1.0, abs=1e-10), (src, dst)


def test_matchgates_are_gaussian_at_every_position(rng):
    gates = [gate_from_name(name, 0.4 if name.startswith("phase_") else None) for name in named_gates()]
    gates += [random_matchgate(rng) for _ in range(3)]
    for n in range(2, 6):
        for j in range(1, n):
            for gate in gates:
                assert is_gaussian_unitary(embed_two_qubit(gate.matrix, j, n)), (gate.label, j, n)


def test_swap_is_not_a_matchgate():
    """SWAP has A = I and B = X, whose determinants differ."""

    swap = np.eye(4)[[0, 2, 1, 3]]
    assert not is_gaussian_unitary(swap)
    with pytest.raises(DeterminantMismatchError):
        make_matchgate(np.eye(2), X)
