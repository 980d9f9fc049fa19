"""Free-operation gadgets: fermionic swap-through, SWAP by teleportation, C_phi.

All gadgets drive a `FreeOperationRunner`, so the only operations they use are
catalog matchgates, computational-basis ancillas and measurements. The
teleportation wiring places a 4-line resource right of the target pair:

    a = j, m1..m4 = j+1..j+4, b = j+5

Bell measurements on (a, m1) and (m4, b) are G(H,H) followed by two
computational measurements. Outcomes (s, t) give the Pauli frame x = s ^ t,
z = s; measured lines are then moved out and dropped, leaving m2, m3 on j, j+1.
For distant targets the lines between them are first staged aside as one
fermionic block.
"""

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mgmagic.canonicalize import canonical_form
from mgmagic.common.config import settings
from mgmagic.common.errors import (
    DegeneratePhaseError,
    DimensionError,
    MismatchedResourceError,
    NotFermionicError,
    WrongMagicStateError,
)
from mgmagic.common.logging import logger
from mgmagic.common.metrics import (
    cphi_protocol_rounds,
    doubling_attempts_total,
    gadget_runs_total,
    magic_copies_consumed_total,
)
from mgmagic.matchgate import Placement, fswap, ghh
from mgmagic.runner import FreeOperationRunner, GateEvent, OutcomeSource, SampledOutcomes
from mgmagic.statevector import Parity, QubitState, apply_two_qubit_unchecked, block_parity
from mgmagic.states import basis_state, magic_m, psi_phi, random_state

TWO_PI = 2.0 * math.pi

Frame = tuple[int, int]


def _reduce_angle(phi: float) -> float:
    return float(phi % TWO_PI)


def is_degenerate_phase(phi: float) -> bool:
    """True when phi is a multiple of 2 pi (psi_phi is then Gaussian)."""

    turns = phi / TWO_PI
    return abs(turns - round(turns)) * TWO_PI <= settings.eps_theta


class MagicStateSpec(BaseModel):
    """psi_phi resource with its phase; phi is stored reduced into (0, 2 pi)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    phi: float
    state: QubitState

    @model_validator(mode="after")
    def _nondegenerate(self) -> "MagicStateSpec":
        if is_degenerate_phase(self.phi):
            raise DegeneratePhaseError("phi = 0 (mod 2 pi) gives a Gaussian state, not a magic resource")
        if self.state.n != 4:
            raise DimensionError("magic resources live on 4 lines")
        return self

    @classmethod
    def from_phi(cls, phi: float) -> "MagicStateSpec":
        if is_degenerate_phase(phi):
            raise DegeneratePhaseError("phi = 0 (mod 2 pi) gives a Gaussian state, not a magic resource")
        reduced = _reduce_angle(phi)
        return cls(phi=reduced, state=psi_phi(reduced))


class GadgetTranscript(BaseModel):
    """What a gadget run did; serializes to the CLI report format."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    gadget: str
    outcomes: list[tuple[str, int]] = []
    corrections: list[str] = []
    consumed: int = 0
    rounds: int = 0
    success: bool = False
    applied_phase: list[float] = []
    applied_multiples: list[int] = []
    doubling_attempts: int = 0
    supply_exhausted: bool = False
    preparation: list[GateEvent] = []
    gates: list[GateEvent] = []
    placements: list[Placement] = Field(default_factory=list, exclude=True)

    def absorb(self, runner: FreeOperationRunner) -> None:
        """Copy the runner's outcomes, gates and placements."""

        self.outcomes.extend(runner.outcomes)
        self.gates.extend(e for e in runner.events if isinstance(e, GateEvent))
        self.placements.extend(runner.placements)


# ---------------------------------------------------------------------------
# swap-through


def _block_lines(block: tuple[int, int]) -> range:
    return range(block[0], block[1] + 1)


def stage_through(runner: FreeOperationRunner, block: tuple[int, int], across: int, ancilla_policy: str = "auto") -> tuple[int, int]:
    """Exchange a fermionic block with an adjacent line; returns the block's new span."""

    start, stop = block
    n = runner.n
    if not 1 <= start <= stop <= n:
        raise DimensionError(f"block {block} outside 1..{n}")
    if across not in (start - 1, stop + 1) or not 1 <= across <= n:
        raise DimensionError(f"line {across} is not adjacent to block {block}")

    par = block_parity(runner.state, _block_lines(block))
    if par is Parity.INDEFINITE:
        raise NotFermionicError(
            f"block {start}..{stop} has no definite parity; an fswap chain would imprint "
            f"a relative phase -1 on the |1> branch of line {across} for the odd component"
        )
    if par is Parity.ODD and ancilla_policy == "never":
        raise NotFermionicError(f"block {start}..{stop} is odd and ancillas are disabled")

    if across == start - 1:
        if par is Parity.ODD:
            ancilla = runner.adjoin(1)
            runner.move_basis(ancilla, stop + 1, 1)
            last = stop + 1
        else:
            last = stop
        for j in range(across, last):
            runner.apply(fswap(), j)
        if par is Parity.ODD:
            runner.discard(stop, 1)
        return start - 1, stop - 1

    if par is Parity.ODD:
        ancilla = runner.adjoin(1)
        runner.move_basis(ancilla, start, 1)
        first, top = start, stop + 1
    else:
        first, top = start, stop
    for j in range(top, first - 1, -1):
        runner.apply(fswap(), j)
    if par is Parity.ODD:
        runner.discard(start + 1, 1)
    return start + 1, stop + 1


def swap_through(state: QubitState, block: tuple[int, int], across: int, ancilla_policy: str = "auto") -> QubitState:
    """Move a fermionic block past the adjacent line `across` using free operations only."""

    runner = FreeOperationRunner(state)
    stage_through(runner, block, across, ancilla_policy)
    return runner.state


def naive_fswap_chain(state: QubitState, block: tuple[int, int], across: int) -> QubitState:
    """Plain fswap chain with no parity check; wrong for indefinite blocks."""

    start, stop = block
    positions = range(across, stop) if across == start - 1 else range(stop, start - 1, -1)
    for j in positions:
        state = apply_two_qubit_unchecked(state, fswap().matrix, j)
    return state


# ---------------------------------------------------------------------------
# teleportation core


def _check_targets(state: QubitState, j: int) -> None:
    if not 1 <= j <= state.n - 1:
        raise DimensionError(f"target pair ({j}, {j + 1}) outside 1..{state.n}")


def _teleport(runner: FreeOperationRunner, j: int, resource: QubitState) -> tuple[Frame, Frame]:
    """Stage the resource at j+1..j+4, Bell-measure both sides, drop the measured lines."""

    first = runner.adjoin_resource(resource)
    block = (first, first + 3)
    while block[0] > j + 1:
        block = stage_through(runner, block, block[0] - 1)

    runner.apply(ghh(), j)
    s_a = runner.measure(j, "a")
    t_a = runner.measure(j + 1, "m1")
    runner.apply(ghh(), j + 4)
    s_b = runner.measure(j + 4, "m4")
    t_b = runner.measure(j + 5, "b")

    runner.discard(j + 5, t_b)
    runner.discard(j + 4, s_b)
    runner.discard(j + 1, t_a)
    runner.discard(j, s_a)
    return (s_a ^ t_a, s_a), (s_b ^ t_b, s_b)


def _correct(runner: FreeOperationRunner, line: int, frame: Frame, corrections: list[str]) -> None:
    x, z = frame
    if x:
        runner.x_on(line)
        corrections.append(f"X@{line}")
    if z:
        runner.z_on(line)
        corrections.append(f"Z@{line}")


# ---------------------------------------------------------------------------
# SWAP gadget


def prepare_swap_resource(magic: QubitState) -> tuple[QubitState, list[Placement]]:
    """Turn any psi_pi-class 4-line state into M = |phi+>_13 |phi+>_24 with free gates."""

    form = canonical_form(magic)
    if abs(form.phi - math.pi) > settings.eps_phi:
        raise WrongMagicStateError(f"SWAP gadget needs canonical phi = pi, got {form.phi:.6f}")
    runner = FreeOperationRunner(magic)
    if form.used_ancilla:
        runner.adjoin(0)
    runner.apply_circuit(form.circuit)
    if form.used_ancilla:
        runner.drop(5, form.ancilla_bit)
    runner.apply(fswap(), 2)
    return runner.state, runner.placements


def _swap_in_place(runner: FreeOperationRunner, j: int, resource: QubitState, transcript: "GadgetTranscript") -> None:
    frame_a, frame_b = _teleport(runner, j, resource)
    _correct(runner, j, frame_b, transcript.corrections)
    _correct(runner, j + 1, frame_a, transcript.corrections)


def _swap_transcript(gadget: str, preparation: list[Placement]) -> "GadgetTranscript":
    transcript = GadgetTranscript(gadget=gadget, consumed=1, rounds=1, success=True)
    transcript.preparation = [GateEvent(name=p.gate.label, j=p.j, param=p.param) for p in preparation]
    transcript.placements.extend(preparation)
    return transcript


def swap_gadget(state: QubitState, j: int, magic: QubitState, source: OutcomeSource) -> tuple[QubitState, GadgetTranscript]:
    """Deterministic SWAP on lines (j, j+1) by teleportation through M."""

    _check_targets(state, j)
    resource, preparation = prepare_swap_resource(magic)
    runner = FreeOperationRunner(state, source)
    transcript = _swap_transcript("swap", preparation)
    _swap_in_place(runner, j, resource, transcript)
    transcript.absorb(runner)
    gadget_runs_total.labels(gadget="swap", outcome="success").inc()
    magic_copies_consumed_total.labels(protocol="swap").inc()
    return runner.state, transcript


def distant_swap_gadget(
    state: QubitState, p: int, q: int, magic: QubitState, source: OutcomeSource
) -> tuple[QubitState, GadgetTranscript]:
    """SWAP on lines p < q with one magic copy.

    The lines strictly between p and q are moved past q as one fermionic
    block, the adjacent gadget fires on (p, p+1), and the block moves back.
    The middle block must have definite parity; otherwise NotFermionicError.
    """

    if not 1 <= p < q <= state.n:
        raise DimensionError(f"targets ({p}, {q}) outside 1..{state.n} or out of order")
    if q == p + 1:
        return swap_gadget(state, p, magic, source)
    resource, preparation = prepare_swap_resource(magic)
    runner = FreeOperationRunner(state, source)
    block = stage_through(runner, (p + 1, q - 1), q)
    transcript = _swap_transcript("distant_swap", preparation)
    _swap_in_place(runner, p, resource, transcript)
    stage_through(runner, block, p + 1)
    transcript.absorb(runner)
    gadget_runs_total.labels(gadget="distant_swap", outcome="success").inc()
    magic_copies_consumed_total.labels(protocol="swap").inc()
    return runner.state, transcript


# ---------------------------------------------------------------------------
# controlled phase


def cphi_round(state: QubitState, j: int, magic: MagicStateSpec, source: OutcomeSource) -> tuple[QubitState, int, GadgetTranscript]:
    """One teleportation through psi_phi: C_{+phi} (sign +1) or C_{-phi} (sign -1) on (j, j+1)."""

    _check_targets(state, j)
    phi = magic.phi
    runner = FreeOperationRunner(state, source)
    frame_a, frame_b = _teleport(runner, j, magic.state)

    transcript = GadgetTranscript(gadget="cphi_round", consumed=1, rounds=1)
    _correct(runner, j, frame_a, transcript.corrections)
    _correct(runner, j + 1, frame_b, transcript.corrections)

    x_left, x_right = frame_a[0], frame_b[0]
    if x_left and x_right:
        runner.phase_on(j, phi)
        runner.phase_on(j + 1, phi)
        transcript.corrections += [f"P({phi:.6f})@{j}", f"P({phi:.6f})@{j + 1}"]
        sign = 1
    elif x_left:
        runner.phase_on(j + 1, -phi)
        transcript.corrections.append(f"P({-phi:.6f})@{j + 1}")
        sign = -1
    elif x_right:
        runner.phase_on(j, -phi)
        transcript.corrections.append(f"P({-phi:.6f})@{j}")
        sign = -1
    else:
        sign = 1

    transcript.success = sign == 1
    transcript.applied_phase = [sign * phi]
    transcript.applied_multiples = [sign]
    transcript.absorb(runner)
    gadget_runs_total.labels(gadget="cphi_round", outcome="plus" if sign == 1 else "minus").inc()
    return runner.state, sign, transcript


def double_phase_state(
    copy1: MagicStateSpec,
    copy2: MagicStateSpec,
    source: OutcomeSource,
    verify: bool = True,
) -> tuple[QubitState | None, GadgetTranscript]:
    """C_theta from copy1 applied to lines 2,3 of copy2; psi_{2 theta} on success, None on failure."""

    if abs(copy1.phi - copy2.phi) > settings.eps_theta:
        raise MismatchedResourceError(f"resource phases differ: {copy1.phi} vs {copy2.phi}")
    if verify:
        phis = [canonical_form(c.state).phi for c in (copy1, copy2)]
        if abs(phis[0] - phis[1]) > settings.eps_phi:
            raise MismatchedResourceError(f"canonical phases differ: {phis[0]} vs {phis[1]}")

    out, sign, transcript = cphi_round(copy2.state, 2, copy1, source)
    transcript.gadget = "double_phase"
    success = sign == 1 or is_degenerate_phase(2.0 * copy1.phi)
    transcript.success = success
    transcript.consumed = 2
    doubling_attempts_total.labels(outcome="success" if success else "failure").inc()
    return (out if success else None), transcript


# ---------------------------------------------------------------------------
# repeat-until-success protocol


def rounds_for_epsilon(epsilon: float) -> int:
    """L = ceil(log2(2 / epsilon))."""

    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return math.ceil(math.log2(2.0 / epsilon))


def markov_supply(epsilon: float) -> int:
    """ceil(4 / epsilon^2) copies suffice with probability >= 1 - epsilon / 2."""

    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return math.ceil(4.0 / epsilon**2)


def expected_consumption(rounds: int) -> int:
    """Mean copies used when halting after at most `rounds` rounds: 2^L - 1."""

    return (1 << rounds) - 1


def level_cost(level: int) -> int:
    """Mean psi_phi copies per psi_{2^level phi} copy."""

    return 4**level


def phase_matches(multiple: int, phi: float) -> bool:
    """Cumulative phase multiple * phi equals phi modulo 2 pi (exact integer bookkeeping)."""

    return is_degenerate_phase((multiple - 1) * phi)


class _ResourcePool:
    """Lazy producer of psi_{2^k phi} copies from a finite psi_phi supply."""

    def __init__(self, phi: float, supply: int, rng: np.random.Generator, source: OutcomeSource | None, simulate: bool) -> None:
        self.phi = phi
        self.remaining = supply
        self.consumed = 0
        self.attempts = 0
        self.rng = rng
        self.source = source
        self.simulate = simulate

    def level_phase(self, level: int) -> float:
        return _reduce_angle((1 << level) * self.phi)

    def produce(self, level: int) -> MagicStateSpec | bool | None:
        if level == 0:
            if self.remaining == 0:
                return None
            self.remaining -= 1
            self.consumed += 1
            return MagicStateSpec.from_phi(self.phi) if self.simulate else True
        while True:
            first = self.produce(level - 1)
            if first is None:
                return None
            second = self.produce(level - 1)
            if second is None:
                return None
            self.attempts += 1
            if self.simulate:
                doubled, _ = double_phase_state(first, second, self.source, verify=False)
                if doubled is not None:
                    return MagicStateSpec(phi=self.level_phase(level), state=doubled)
            else:
                success = self.rng.random() < 0.5 or is_degenerate_phase(2.0 * self.level_phase(level - 1))
                doubling_attempts_total.labels(outcome="success" if success else "failure").inc()
                if success:
                    return True


def cphi_protocol(
    state: QubitState | None,
    j: int,
    phi: float,
    epsilon: float,
    supply: int,
    rng: np.random.Generator,
    simulate: bool = True,
    rounds: int | None = None,
    source: OutcomeSource | None = None,
) -> tuple[QubitState | None, GadgetTranscript]:
    """Repeat-until-success C_phi with at most L rounds.

    Round r consumes a psi_{2^(r-1) phi} copy built on demand by doubling;
    failed doublings are discarded. With `simulate=False` only the resource
    ledger runs (fair coins replace measurements) and `state` is returned
    untouched.
    """

    if supply < 1:
        raise ValueError("supply must be at least 1")
    if is_degenerate_phase(phi):
        raise DegeneratePhaseError("phi = 0 (mod 2 pi) needs no gadget")
    limit = rounds if rounds is not None else rounds_for_epsilon(epsilon)
    if simulate:
        if state is None:
            raise ValueError("simulation needs an input state")
        _check_targets(state, j)
        source = source or SampledOutcomes(rng)

    pool = _ResourcePool(phi, supply, rng, source, simulate)
    transcript = GadgetTranscript(gadget="cphi_protocol")
    multiple = 0
    held: MagicStateSpec | bool | None = None

    for r in range(1, limit + 1):
        resource = held if held is not None else pool.produce(r - 1)
        held = None
        if resource is None:
            transcript.supply_exhausted = True
            break
        if settings.pipeline_doubling and r < limit and not is_degenerate_phase(pool.level_phase(r)):
            held = pool.produce(r)

        step = 1 << (r - 1)
        if simulate:
            state, sign, round_log = cphi_round(state, j, resource, source)
            transcript.outcomes.extend(round_log.outcomes)
            transcript.corrections.extend(round_log.corrections)
            transcript.gates.extend(round_log.gates)
            transcript.placements.extend(round_log.placements)
        else:
            sign = 1 if rng.random() < 0.5 else -1
        multiple += sign * step
        transcript.rounds = r
        transcript.applied_multiples.append(sign * step)
        transcript.applied_phase.append(sign * step * phi)
        if phase_matches(multiple, phi):
            transcript.success = True
            break

    if transcript.supply_exhausted:
        logger.info("cphi_protocol supply exhausted after %s rounds", transcript.rounds)
    transcript.consumed = pool.consumed
    transcript.doubling_attempts = pool.attempts
    gadget_runs_total.labels(gadget="cphi_protocol", outcome="success" if transcript.success else "failure").inc()
    magic_copies_consumed_total.labels(protocol="cphi").inc(pool.consumed)
    cphi_protocol_rounds.observe(transcript.rounds)
    return state, transcript


# ---------------------------------------------------------------------------
# Monte Carlo


def run_trials(
    trial: Callable[..., dict[str, Any]],
    trials: int,
    seed: int | None,
    workers: int = 1,
    **kwargs: Any,
) -> list[dict[str, Any]]:
    """Call `trial(rng, **kwargs)` once per spawned seed, optionally in worker processes."""

    children = np.random.SeedSequence(seed).spawn(trials)
    if workers <= 1:
        return [trial(np.random.default_rng(child), **kwargs) for child in children]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_seeded_call, trial, child, kwargs) for child in children]
        return [f.result() for f in futures]


def _seeded_call(trial: Callable[..., dict[str, Any]], child: np.random.SeedSequence, kwargs: dict[str, Any]) -> dict[str, Any]:
    return trial(np.random.default_rng(child), **kwargs)


def cphi_ledger_trial(rng: np.random.Generator, phi: float, epsilon: float, supply: int, rounds: int | None = None) -> dict[str, Any]:
    _, transcript = cphi_protocol(None, 1, phi, epsilon, supply, rng, simulate=False, rounds=rounds)
    return {"success": transcript.success, "consumed": transcript.consumed, "rounds": transcript.rounds}


def cphi_sign_trial(rng: np.random.Generator, phi: float) -> dict[str, Any]:
    """One full-state C_phi round on |11>; reports the sign."""

    _, sign, _ = cphi_round(basis_state("11"), 1, MagicStateSpec.from_phi(phi), SampledOutcomes(rng))
    return {"sign": sign}


def double_phase_trial(rng: np.random.Generator, phi: float) -> dict[str, Any]:
    """One full-state doubling attempt on two fresh psi_phi copies."""

    copy = MagicStateSpec.from_phi(phi)
    doubled, _ = double_phase_state(copy, copy, SampledOutcomes(rng), verify=False)
    return {"success": doubled is not None}


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile."""

    if len(values) == 0:
        return 0.0
    return float(np.percentile(values, q, method="inverted_cdf"))


class TrialSummary(BaseModel):
    trials: int
    success_frequency: float
    mean_consumed: float
    p50_consumed: float
    p95_consumed: float
    p99_consumed: float
    expected_consumed: int | None = None
    rounds_histogram: dict[int, int] = {}


def summarize_trials(results: Sequence[dict[str, Any]], rounds: int | None = None) -> TrialSummary:
    consumed = [r["consumed"] for r in results]
    histogram: dict[int, int] = {}
    for r in results:
        histogram[r["rounds"]] = histogram.get(r["rounds"], 0) + 1
    return TrialSummary(
        trials=len(results),
        success_frequency=float(np.mean([r["success"] for r in results])) if results else 0.0,
        mean_consumed=float(np.mean(consumed)) if consumed else 0.0,
        p50_consumed=percentile(consumed, 50),
        p95_consumed=percentile(consumed, 95),
        p99_consumed=percentile(consumed, 99),
        expected_consumed=expected_consumption(rounds) if rounds is not None else None,
        rounds_histogram=dict(sorted(histogram.items())),
    )


def swapped_lines(state: QubitState, p: int, q: int) -> QubitState:
    """Reference: the contents of lines p and q exchanged."""

    tensor_amps = np.swapaxes(state.amps.reshape((2,) * state.n), p - 1, q - 1)
    return QubitState(n=state.n, amps=tensor_amps.reshape(-1))


def swap_trial(
    rng: np.random.Generator,
    state: QubitState | None = None,
    j: int = 1,
    partner: int | None = None,
) -> dict[str, Any]:
    """One sampled SWAP-gadget run; a Haar 2-line input unless `state` is given.

    With `partner` the distant gadget swaps lines j and partner.
    """

    if partner is not None and state is None:
        raise ValueError("a distant SWAP trial needs an input state")
    inp = state if state is not None else random_state(2, rng)
    q = partner if partner is not None else j + 1
    if q == j + 1:
        out, _ = swap_gadget(inp, j, magic_m(), SampledOutcomes(rng))
    else:
        out, _ = distant_swap_gadget(inp, j, q, magic_m(), SampledOutcomes(rng))
    fid = float(abs(np.vdot(swapped_lines(inp, j, q).amps, out.amps)) ** 2)
    return {"success": fid >= 1.0 - settings.eps_recon, "consumed": 1, "rounds": 1, "fidelity": fid}


def cphi_simulated_trial(
    rng: np.random.Generator,
    phi: float,
    epsilon: float,
    supply: int,
    rounds: int | None = None,
    state: QubitState | None = None,
    j: int = 1,
) -> dict[str, Any]:
    inp = state if state is not None else random_state(2, rng)
    _, transcript = cphi_protocol(inp, j, phi, epsilon, supply, rng, simulate=True, rounds=rounds)
    return {"success": transcript.success, "consumed": transcript.consumed, "rounds": transcript.rounds}
