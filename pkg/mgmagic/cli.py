"""Command-line front end: classify, canonicalize, reduce, gadget, make-state.

Reports are JSON on stdout (or `--output`); logs are JSON on stderr.
Exit codes: 0 success, 2 input error, 3 precondition violation.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from mgmagic.canonicalize import canonical_fidelity, to_psi_phi
from mgmagic.common.config import settings, override_tolerances
from mgmagic.common.errors import (
    DegeneratePhaseError,
    DimensionError,
    GaussianInputError,
    NotFermionicError,
    RetryBudgetExhausted,
    WrongMagicStateError,
)
from mgmagic.common.logging import command_ctx, configure_logging, logger, run_seed_ctx
from mgmagic.common.metrics import metrics_text
from mgmagic.common.startup import log_startup_config
from mgmagic.gadgets import (
    cphi_ledger_trial,
    cphi_simulated_trial,
    markov_supply,
    rounds_for_epsilon,
    run_trials,
    summarize_trials,
    swap_trial,
)
from mgmagic.jordan_wigner import is_gaussian_state, lambda_norm_sq
from mgmagic.reduce import reduce_to_magic4
from mgmagic.schemas import (
    CanonicalizeReport,
    CircuitFile,
    ClassifyReport,
    GadgetReport,
    ReduceReport,
    StateFile,
    dumps,
    load_state,
)
from mgmagic.states import basis_state, ghz, magic_m, psi_phi, random_fermionic_state
from mgmagic.statevector import Parity, parity

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

_PRECONDITION_ERRORS = (
    GaussianInputError,
    NotFermionicError,
    DimensionError,
    DegeneratePhaseError,
    WrongMagicStateError,
    RetryBudgetExhausted,
)


class RunConfig(BaseModel):
    """Everything that determines a command's output."""

    command: str
    input: Path | None = None
    output: Path | None = None
    seed: int | None = None
    trials: int = Field(default=1, ge=1)
    epsilon: float | None = Field(default=None, gt=0.0, lt=1.0)
    phi: float | None = None
    rounds: int | None = Field(default=None, ge=1)
    tolerances: dict[str, float] = {}


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    if settings.seed is not None:
        return settings.seed
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _require_input(config: RunConfig) -> Path:
    if config.input is None:
        raise ValueError(f"{config.command} needs an input state file")
    return config.input


# ---------------------------------------------------------------------------
# commands


def cmd_classify(config: RunConfig, args: argparse.Namespace) -> int:
    state = load_state(_require_input(config))
    par = parity(state)
    if par is Parity.INDEFINITE:
        report = ClassifyReport(n=state.n, parity=par.value, lambda_norm_sq=None, gaussian=None)
    else:
        phi = to_psi_phi(state)[0].phi if state.n == 4 else None
        report = ClassifyReport(
            n=state.n,
            parity=par.value,
            lambda_norm_sq=lambda_norm_sq(state),
            gaussian=is_gaussian_state(state),
            phi=phi,
        )
    _emit(dumps(report), config.output)
    return EXIT_OK


def cmd_canonicalize(config: RunConfig, args: argparse.Namespace) -> int:
    state = load_state(_require_input(config))
    form, out = to_psi_phi(state)
    report = CanonicalizeReport(
        phi=form.phi,
        used_ancilla=form.used_ancilla,
        depth=form.circuit.depth(),
        schmidt_values=form.schmidt_values,
        fidelity=canonical_fidelity(form, out),
        circuit=CircuitFile.from_circuit(form.circuit),
    )
    _emit(dumps(report), config.output)
    return EXIT_OK


def cmd_reduce(config: RunConfig, args: argparse.Namespace) -> int:
    state = load_state(_require_input(config))
    seed = _resolve_seed(config.seed) if args.mode == "sample" else config.seed
    rng = np.random.default_rng(seed) if args.mode == "sample" else None
    form, chain = reduce_to_magic4(state, mode=args.mode, rng=rng, retry_budget=args.retry_budget)
    report = ReduceReport(
        mode=args.mode,
        seed=seed,
        phi=form.phi,
        steps=[step.model_dump(mode="json") for step in chain.steps],
        output=StateFile.from_state(chain.final_state),
    )
    if args.state_out:
        Path(args.state_out).write_text(dumps(report.output), encoding="utf-8")
    _emit(dumps(report), config.output)
    return EXIT_OK


def cmd_gadget(config: RunConfig, args: argparse.Namespace) -> int:
    seed = _resolve_seed(config.seed)
    run_seed_ctx.set(str(seed))
    workers = args.workers if args.workers is not None else settings.workers
    state = load_state(config.input) if config.input is not None else None

    if args.gadget == "swap":
        results = run_trials(swap_trial, config.trials, seed, workers, state=state, j=args.target, partner=args.partner)
        summary = summarize_trials(results)
        report = GadgetReport(
            gadget="swap",
            seed=seed,
            trials=config.trials,
            min_fidelity=min(r["fidelity"] for r in results),
            **summary.model_dump(exclude={"trials"}),
        )
        _emit(dumps(report), config.output)
        return EXIT_OK

    if config.phi is None:
        raise ValueError("cphi gadget needs --phi")
    epsilon = config.epsilon if config.epsilon is not None else 0.1
    rounds = config.rounds if config.rounds is not None else rounds_for_epsilon(epsilon)
    supply = args.supply if args.supply is not None else markov_supply(epsilon)
    common: dict[str, Any] = {"phi": config.phi, "epsilon": epsilon, "supply": supply, "rounds": rounds}
    if args.simulate:
        results = run_trials(cphi_simulated_trial, config.trials, seed, workers, state=state, j=args.target, **common)
    else:
        results = run_trials(cphi_ledger_trial, config.trials, seed, workers, **common)
    summary = summarize_trials(results, rounds=rounds)
    report = GadgetReport(
        gadget="cphi",
        seed=seed,
        trials=config.trials,
        phi=config.phi,
        epsilon=epsilon,
        rounds=rounds,
        supply=supply,
        **summary.model_dump(exclude={"trials"}),
    )
    _emit(dumps(report), config.output)
    return EXIT_OK


def cmd_make_state(config: RunConfig, args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "psi":
        state = psi_phi(config.phi if config.phi is not None else math.pi)
    elif kind == "ghz":
        state = ghz(args.n or 4)
    elif kind == "m":
        state = magic_m()
    elif kind == "basis":
        if not args.bits:
            raise ValueError("basis states need --bits")
        state = basis_state(args.bits)
    else:
        wanted = {"even": Parity.EVEN, "odd": Parity.ODD}.get(args.parity)
        state = random_fermionic_state(args.n or 4, np.random.default_rng(_resolve_seed(config.seed)), wanted)
    _emit(dumps(StateFile.from_state(state)), config.output)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "canonicalize": cmd_canonicalize,
    "reduce": cmd_reduce,
    "gadget": cmd_gadget,
    "make-state": cmd_make_state,
}


# ---------------------------------------------------------------------------
# parser


def _tolerance(text: str) -> tuple[str, float]:
    key, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), float(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgmagic", description="Matchgate magic-state toolkit")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--metrics-out", default=None, help="write Prometheus text metrics to this file")
    parser.add_argument("--tolerance", action="append", type=_tolerance, default=[], metavar="EPS_KEY=VALUE")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
        if needs_input:
            p.add_argument("input", type=Path)
        p.add_argument("--output", "-o", type=Path, default=None)
        p.add_argument("--seed", type=int, default=None)

    common(sub.add_parser("classify", help="parity, Lambda norm and Gaussianity of a state"))
    common(sub.add_parser("canonicalize", help="psi_phi canonical form of a 4-line fermionic state"))

    reduce_p = sub.add_parser("reduce", help="reduce a non-Gaussian state to a 4-line magic state")
    common(reduce_p)
    reduce_p.add_argument("--mode", choices=["force", "sample"], default="force")
    reduce_p.add_argument("--retry-budget", type=int, default=None)
    reduce_p.add_argument("--state-out", default=None)

    gadget_p = sub.add_parser("gadget", help="Monte Carlo statistics for the SWAP and C_phi gadgets")
    common(gadget_p, needs_input=False)
    gadget_p.add_argument("--gadget", choices=["swap", "cphi"], required=True)
    gadget_p.add_argument("--input", dest="input", type=Path, default=None)
    gadget_p.add_argument("--target", type=int, default=1)
    gadget_p.add_argument("--partner", type=int, default=None, help="second SWAP target; lines between the two must have definite parity")
    gadget_p.add_argument("--phi", type=float, default=None)
    gadget_p.add_argument("--epsilon", type=float, default=None)
    gadget_p.add_argument("--rounds", "-L", type=int, default=None)
    gadget_p.add_argument("--supply", type=int, default=None)
    gadget_p.add_argument("--trials", type=int, default=1)
    gadget_p.add_argument("--workers", type=int, default=None)
    gadget_p.add_argument("--simulate", action="store_true", help="full state simulation instead of the resource ledger")

    make_p = sub.add_parser("make-state", help="write a named or random state file")
    common(make_p, needs_input=False)
    make_p.add_argument("--kind", choices=["psi", "ghz", "m", "basis", "random"], required=True)
    make_p.add_argument("--phi", type=float, default=None)
    make_p.add_argument("--bits", default=None)
    make_p.add_argument("--n", type=int, default=None)
    make_p.add_argument("--parity", choices=["even", "odd"], default=None)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        output=args.output,
        seed=args.seed,
        trials=getattr(args, "trials", 1),
        epsilon=getattr(args, "epsilon", None),
        phi=getattr(args, "phi", None),
        rounds=getattr(args, "rounds", None),
        tolerances=dict(args.tolerance),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        settings.log_level = args.log_level.upper()
    configure_logging()
    command_ctx.set(args.command)

    previous: dict[str, float] = {}
    try:
        config = _config_from_args(args)
        previous = override_tolerances(**config.tolerances)
        log_startup_config(args.command, ["seed", "workers", "max_qubits", "pipeline_doubling"])
        code = COMMANDS[args.command](config, args)
    except _PRECONDITION_ERRORS as exc:
        logger.error("precondition violated: %s", exc)
        sys.stderr.write(f"error: {exc}\n")
        code = EXIT_PRECONDITION
    except (ValidationError, json.JSONDecodeError, OSError, ValueError) as exc:
        logger.error("bad input: %s", exc)
        sys.stderr.write(f"error: {exc}\n")
        code = EXIT_INPUT
    finally:
        if previous:
            override_tolerances(**previous)

    if args.metrics_out:
        Path(args.metrics_out).write_text(metrics_text(), encoding="utf-8")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
