"""Reduction of non-Gaussian fermionic states to a 4-line magic state.

With |v> = Lambda |psi>^{x2} = sum_i c_i psi (x) c_i psi, a one-line projector
P applied to both copies gives sum_i w_i (x) w_i with w_i = P c_i psi, so

    ||(P x P)|v>||^2 = sum_{i,k} <w_i|w_k>^2

is read off the 2k x 2k Gram matrix of the w_i. A nonzero value marks a line
whose measurement keeps the state non-Gaussian (Case1); otherwise a G(H,H) is
tried first on a neighboring pair (Case2a). For k >= 5 one of the two exists.
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from mgmagic.canonicalize import CanonicalForm, to_psi_phi
from mgmagic.common.config import settings
from mgmagic.common.errors import Case2bViolation, DimensionError, GaussianInputError, NotFermionicError, RetryBudgetExhausted
from mgmagic.common.logging import logger
from mgmagic.common.metrics import reduction_steps_total
from mgmagic.jordan_wigner import is_gaussian_state, jw_images, lambda_matrix, lambda_norm_sq
from mgmagic.matchgate import ghh
from mgmagic.runner import FreeOperationRunner, GateEvent, OutcomeSource, SampledOutcomes
from mgmagic.states import random_fermionic_state
from mgmagic.statevector import Parity, QubitState, apply_two_qubit_unchecked, bit_parity, line_bits, parity


class CaseTag(str, Enum):
    CASE1 = "Case1"
    CASE2A = "Case2a"
    CASE2B_VIOLATION = "Case2bViolation"


class CaseClassification(BaseModel):
    """Measurement witness: line `j` (or `variant` after G(H,H) on j, j+1) with outcome `b`."""

    model_config = ConfigDict(frozen=True)

    tag: CaseTag
    j: int
    b: int
    variant: int | None = None
    witness_norm: float

    @property
    def measured_line(self) -> int:
        return self.variant if self.variant is not None else self.j


def _require_fermionic(state: QubitState) -> None:
    if parity(state) is Parity.INDEFINITE:
        raise NotFermionicError("reduction needs a state of definite parity")


def projected_v_norm_sq(state: QubitState, j: int, b: int, pre_gate: int | None = None) -> float:
    """||(P_b^{(j)})^{x2} Lambda |psi'>^{x2}||^2 with psi' = G(H,H) at `pre_gate` applied to psi."""

    _require_fermionic(state)
    if not 1 <= j <= state.n:
        raise DimensionError(f"line {j} outside 1..{state.n}")
    amps = state.amps
    if pre_gate is not None:
        amps = apply_two_qubit_unchecked(state, ghh().matrix, pre_gate).amps
    images = jw_images(amps, state.n)
    projected = images * (line_bits(state.n, j) == b)
    gram = projected.conj() @ projected.T
    return max(float(np.sum(gram * gram).real), 0.0)


def projected_v_norm_sq_bruteforce(state: QubitState, j: int, b: int, pre_gate: int | None = None) -> float:
    """Doubled-register evaluation of the same quantity (k <= 4)."""

    if state.n > 4:
        raise DimensionError("doubled-register oracle is limited to 4 lines")
    amps = state.amps
    if pre_gate is not None:
        amps = apply_two_qubit_unchecked(state, ghh().matrix, pre_gate).amps
    v = lambda_matrix(state.n) @ np.kron(amps, amps)
    mask = (line_bits(state.n, j) == b).astype(float)
    v = v * np.kron(mask, mask)
    return float(np.vdot(v, v).real)


def v_matrix(state: QubitState) -> np.ndarray:
    """|v> reshaped to a 2^k x 2^k matrix: sum_i (c_i psi)(c_i psi)^T."""

    images = jw_images(state.amps, state.n)
    return images.T @ images


def antidiagonal_entries(v: np.ndarray) -> np.ndarray:
    """lambda_x = V[x, not x]."""

    size = v.shape[0]
    idx = np.arange(size)
    return v[idx, (size - 1) ^ idx]


def is_antidiagonal(v: np.ndarray, tol: float = 1e-9) -> bool:
    off = v.copy()
    size = v.shape[0]
    idx = np.arange(size)
    off[idx, (size - 1) ^ idx] = 0.0
    return bool(np.max(np.abs(off)) <= tol)


def antidiagonal_rank(v: np.ndarray, tol: float = 1e-9) -> int:
    """Rank of an anti-diagonal matrix: its count of nonzero entries."""

    return int(np.count_nonzero(np.abs(antidiagonal_entries(v)) > tol))


def antidiagonal_matrix(lambdas: np.ndarray) -> np.ndarray:
    size = lambdas.shape[0]
    out = np.zeros((size, size), dtype=complex)
    idx = np.arange(size)
    out[idx, (size - 1) ^ idx] = lambdas
    return out


def sign_constrained_coefficients(k: int, rng: np.random.Generator, parity_class: Parity = Parity.ODD) -> np.ndarray:
    """Random lambda_x on one bit-parity class of x, 2^(k-1) nonzeros.

    Signs obey lambda_{00i} = -lambda_{11i} and lambda_{01i} = -lambda_{10i}
    on the first two bits; flipping both keeps the parity class.
    """

    if parity_class is Parity.INDEFINITE:
        raise ValueError("the family lives on a single parity class")
    quarter = 1 << (k - 2)
    free = rng.normal(size=2 * quarter) + 1j * rng.normal(size=2 * quarter)
    out = np.empty(4 * quarter, dtype=complex)
    out[0:quarter] = free[:quarter]
    out[3 * quarter :] = -free[:quarter]
    out[quarter : 2 * quarter] = free[quarter:]
    out[2 * quarter : 3 * quarter] = -free[quarter:]
    out[bit_parity(k) != (1 if parity_class is Parity.ODD else 0)] = 0.0
    return out


def sign_constraint_residual(lambdas: np.ndarray) -> float:
    quarter = lambdas.shape[0] // 4
    blocks = lambdas.reshape(4, quarter)
    return float(max(np.max(np.abs(blocks[0] + blocks[3])), np.max(np.abs(blocks[1] + blocks[2]))))


def classify_case(state: QubitState) -> CaseClassification:
    """First measurement witness in (j, b[, variant]) order."""

    _require_fermionic(state)
    if state.n < 5:
        raise DimensionError("case classification needs at least 5 lines")
    if is_gaussian_state(state):
        raise GaussianInputError("input state is Gaussian")

    for j in range(1, state.n + 1):
        for b in (0, 1):
            norm = projected_v_norm_sq(state, j, b)
            if norm > settings.eps_gauss:
                return CaseClassification(tag=CaseTag.CASE1, j=j, b=b, witness_norm=norm)

    for j in range(1, state.n):
        rotated = apply_two_qubit_unchecked(state, ghh().matrix, j)
        for b in (0, 1):
            for variant in (j, j + 1):
                norm = projected_v_norm_sq(rotated, variant, b)
                if norm > settings.eps_gauss:
                    return CaseClassification(tag=CaseTag.CASE2A, j=j, b=b, variant=variant, witness_norm=norm)

    v = v_matrix(state)
    rank = int(np.linalg.matrix_rank(v, tol=1e-9))
    shape = "anti-diagonal" if is_antidiagonal(v) else "not anti-diagonal"
    raise Case2bViolation(f"no witness for a {state.n}-line non-Gaussian state (v has rank {rank}, {shape})", rank)


class ReductionStep(BaseModel):
    """One k -> k-1 step."""

    lines_before: int
    case: CaseClassification
    mode: str
    outcome: int
    probability: float
    attempts: int
    lambda_norm_sq: float
    gates: list[GateEvent] = []


def _attempt(state: QubitState, case: CaseClassification, source: OutcomeSource | None) -> tuple[FreeOperationRunner, int, float]:
    runner = FreeOperationRunner(state, source)
    if case.tag is CaseTag.CASE2A:
        runner.apply(ghh(), case.j)
    line = case.measured_line
    if source is None:
        prob = runner.postselect(line, case.b, label=f"line{line}")
        return runner, case.b, prob
    outcome = runner.measure(line, label=f"line{line}")
    return runner, outcome, runner.events[-1].prob


def reduce_once(
    state: QubitState,
    mode: str = "force",
    rng: np.random.Generator | None = None,
    retry_budget: int | None = None,
) -> tuple[QubitState, ReductionStep]:
    """Measure the classified line and drop it; output is non-Gaussian on k-1 lines.

    `force` postselects the witness outcome (simulator only). `sample` measures
    with Born probabilities and starts over on a fresh copy when the result is
    Gaussian.
    """

    case = classify_case(state)
    budget = retry_budget if retry_budget is not None else settings.reduce_retry_budget
    if mode == "force":
        source = None
    elif mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs a random generator")
        source = SampledOutcomes(rng)
    else:
        raise ValueError(f"unknown reduction mode {mode!r}")

    for attempt in range(1, budget + 1):
        runner, outcome, prob = _attempt(state, case, source)
        runner.discard(case.measured_line, outcome)
        reduced = runner.state
        value = lambda_norm_sq(reduced)
        if value > settings.eps_gauss:
            reduction_steps_total.labels(case=case.tag.value).inc()
            step = ReductionStep(
                lines_before=state.n,
                case=case,
                mode=mode,
                outcome=outcome,
                probability=prob,
                attempts=attempt,
                lambda_norm_sq=value,
                gates=[e for e in runner.events if isinstance(e, GateEvent)],
            )
            return reduced, step
        if mode == "force":
            raise GaussianInputError(f"postselected branch of {case.tag.value} is Gaussian (lambda={value:.3e})")
        logger.debug("reduce_once attempt=%s outcome=%s gave a Gaussian state; retrying", attempt, outcome)
    raise RetryBudgetExhausted(f"no non-Gaussian outcome in {budget} attempts", attempts=budget)


class ReductionChain(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    steps: list[ReductionStep] = []
    final_state: QubitState
    canonical_state: QubitState
    form: CanonicalForm


def reduce_to_magic4(
    state: QubitState,
    mode: str = "force",
    rng: np.random.Generator | None = None,
    retry_budget: int | None = None,
) -> tuple[CanonicalForm, ReductionChain]:
    """Reduce to 4 lines, then canonicalize to psi_phi with phi != 0."""

    _require_fermionic(state)
    if state.n < 4:
        raise DimensionError("reduction needs at least 4 lines")
    if is_gaussian_state(state):
        raise GaussianInputError("input state is Gaussian")

    steps: list[ReductionStep] = []
    while state.n > 4:
        state, step = reduce_once(state, mode=mode, rng=rng, retry_budget=retry_budget)
        steps.append(step)
        logger.info("reduced %s -> %s lines via %s", step.lines_before, state.n, step.case.tag.value)

    form, canonical = to_psi_phi(state)
    if form.phi <= settings.eps_phi:
        raise GaussianInputError(f"reduced state canonicalizes to phi={form.phi:.3e}")
    chain = ReductionChain(steps=steps, final_state=state, canonical_state=canonical, form=form)
    return form, chain


def random_non_gaussian_state(n: int, rng: np.random.Generator, threshold: float = 1e-6) -> QubitState:
    """Haar state on a fixed-parity subspace, redrawn until lambda_norm_sq > threshold."""

    while True:
        candidate = random_fermionic_state(n, rng)
        if lambda_norm_sq(candidate) > threshold:
            return candidate
