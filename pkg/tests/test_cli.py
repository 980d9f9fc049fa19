"""End-to-end tests for the command-line front end."""

import json

import numpy as np
import pytest

import mgmagic.canonicalize as canonicalize_module
from mgmagic.cli import EXIT_INPUT, EXIT_OK, EXIT_PRECONDITION, main
from mgmagic.common.config import settings
from mgmagic.reduce import random_non_gaussian_state
from mgmagic.schemas import CanonicalizeReport, StateFile, load_state, save_state
from mgmagic.states import basis_state, ghz, plus_state, psi_phi
from mgmagic.statevector import adjoin_basis, fidelity, tensor


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


@pytest.fixture
def state_file(tmp_path):
    def write(state, name="state.json"):
        path = tmp_path / name
        save_state(path, state)
        return str(path)

    return write


def test_classify_gaussian_psi_zero(capsys, state_file):
    code, report, _ = run(capsys, ["classify", state_file(psi_phi(0.0))])
    assert code == EXIT_OK
    assert report["gaussian"] is True
    assert report["phi"] == pytest.approx(0.0, abs=1e-6)
    assert report["format_version"] == 1


def test_classify_ghz(capsys, state_file):
    _, report, _ = run(capsys, ["classify", state_file(ghz(4))])
    assert report["gaussian"] is False
    assert report["phi"] == pytest.approx(np.pi, abs=1e-9)


def test_classify_indefinite(capsys, state_file):
    _, report, _ = run(capsys, ["classify", state_file(plus_state())])
    assert report["parity"] == "indefinite"
    assert report["gaussian"] is None


def test_malformed_file_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["classify", str(bad)]) == EXIT_INPUT
    unnormalized = tmp_path / "norm.json"
    unnormalized.write_text(json.dumps({"format_version": 1, "n": 1, "amps": [[1, 0], [1, 0]]}), encoding="utf-8")
    assert main(["classify", str(unnormalized)]) == EXIT_INPUT
    assert main(["classify", str(tmp_path / "missing.json")]) == EXIT_INPUT


def test_canonicalize_ghz(capsys, state_file):
    code, report, out = run(capsys, ["canonicalize", state_file(ghz(4))])
    assert code == EXIT_OK
    parsed = CanonicalizeReport.model_validate_json(out)
    assert parsed.phi == pytest.approx(np.pi, abs=1e-9)
    assert parsed.fidelity >= 1 - 1e-9
    assert parsed.circuit.to_circuit().depth() <= 3


def test_canonicalize_runs_the_canonical_form_once(capsys, state_file, monkeypatch):
    calls = []
    original = canonicalize_module.canonical_form

    def counting(state):
        calls.append(state.n)
        return original(state)

    monkeypatch.setattr(canonicalize_module, "canonical_form", counting)
    code, report, _ = run(capsys, ["canonicalize", state_file(psi_phi(1.3))])
    assert code == EXIT_OK
    assert calls == [4]
    assert report["fidelity"] >= 1 - 1e-9


def test_reduce_embedded_psi_pi(capsys, state_file, tmp_path):
    state_out = tmp_path / "reduced.json"
    code, report, _ = run(capsys, ["reduce", state_file(adjoin_basis(psi_phi(np.pi), 0)), "--state-out", str(state_out)])
    assert code == EXIT_OK
    assert report["phi"] == pytest.approx(np.pi, abs=1e-9)
    assert report["output"]["n"] == 4
    assert fidelity(load_state(state_out), psi_phi(np.pi)) == pytest.approx(1.0, abs=1e-9)


def test_reduce_gaussian_exits_3(capsys, state_file):
    assert main(["reduce", state_file(basis_state("01100"))]) == EXIT_PRECONDITION


def test_reduce_sample_is_deterministic_per_seed(capsys, state_file):
    rng = np.random.default_rng(4)
    path = state_file(random_non_gaussian_state(6, rng))
    _, _, first = run(capsys, ["reduce", path, "--mode", "sample", "--seed", "99"])
    _, _, second = run(capsys, ["reduce", path, "--mode", "sample", "--seed", "99"])
    assert first == second


def test_gadget_swap_is_deterministic(capsys):
    code, report, _ = run(capsys, ["gadget", "--gadget", "swap", "--trials", "20", "--seed", "1"])
    assert code == EXIT_OK
    assert report["success_frequency"] == 1.0
    assert report["min_fidelity"] >= 1 - 1e-9


def test_gadget_distant_swap(capsys, state_file):
    middle = basis_state("10")
    state = tensor(tensor(plus_state(), middle), basis_state("1"))
    path = state_file(state)
    code, report, _ = run(capsys, ["gadget", "--gadget", "swap", "--input", path, "--target", "1", "--partner", "4", "--trials", "5", "--seed", "3"])
    assert code == EXIT_OK
    assert report["success_frequency"] == 1.0
    assert report["mean_consumed"] == 1.0
    indefinite = state_file(tensor(tensor(plus_state(), plus_state()), basis_state("01")), "indefinite.json")
    assert main(["gadget", "--gadget", "swap", "--input", indefinite, "--target", "1", "--partner", "4", "--seed", "3"]) == EXIT_PRECONDITION


def test_gadget_cphi_at_pi(capsys):
    _, report, _ = run(capsys, ["gadget", "--gadget", "cphi", "--phi", str(np.pi), "--trials", "200", "--seed", "2"])
    assert report["success_frequency"] == 1.0
    assert report["mean_consumed"] == 1.0
    assert report["rounds_histogram"] == {"1": 200}


def test_gadget_cphi_ledger_statistics(capsys):
    _, report, _ = run(
        capsys,
        ["gadget", "--gadget", "cphi", "--phi", str(np.pi / 3), "-L", "3", "--supply", "100000", "--trials", "20000", "--seed", "3"],
    )
    assert report["expected_consumed"] == 7
    assert report["mean_consumed"] == pytest.approx(7, rel=0.1)
    assert report["p50_consumed"] <= report["p95_consumed"] <= report["p99_consumed"]


def test_gadget_cphi_simulated(capsys):
    code, report, _ = run(capsys, ["gadget", "--gadget", "cphi", "--phi", "1.0", "-L", "2", "--trials", "5", "--seed", "8", "--simulate"])
    assert code == EXIT_OK
    assert report["trials"] == 5


def test_gadget_zero_phase_exits_3(capsys):
    assert main(["gadget", "--gadget", "cphi", "--phi", "0", "--trials", "2", "--seed", "1"]) == EXIT_PRECONDITION


def test_seed_falls_back_to_settings(capsys, monkeypatch):
    monkeypatch.setattr(settings, "seed", 77)
    _, report, _ = run(capsys, ["gadget", "--gadget", "cphi", "--phi", "1.0", "--trials", "3"])
    assert report["seed"] == 77


def test_make_state_round_trip(capsys, tmp_path):
    path = tmp_path / "psi.json"
    assert main(["make-state", "--kind", "psi", "--phi", "0.5", "--output", str(path)]) == EXIT_OK
    assert fidelity(load_state(path), psi_phi(0.5)) == pytest.approx(1.0)
    assert StateFile.model_validate_json(path.read_text()).n == 4


def test_make_random_state_is_seeded(capsys):
    _, _, first = run(capsys, ["make-state", "--kind", "random", "--n", "5", "--parity", "odd", "--seed", "6"])
    _, _, second = run(capsys, ["make-state", "--kind", "random", "--n", "5", "--parity", "odd", "--seed", "6"])
    assert first == second


def test_metrics_file_written(capsys, tmp_path):
    metrics = tmp_path / "metrics.prom"
    main(["--metrics-out", str(metrics), "gadget", "--gadget", "swap", "--trials", "2", "--seed", "1"])
    assert "gadget_runs_total" in metrics.read_text()


def test_tolerance_override_is_restored(capsys, state_file):
    before = settings.eps_gauss
    main(["--tolerance", "eps_gauss=1e-6", "classify", state_file(ghz(4))])
    assert settings.eps_gauss == before
    assert main(["--tolerance", "eps_bogus=1", "classify", state_file(ghz(4))]) == EXIT_INPUT
