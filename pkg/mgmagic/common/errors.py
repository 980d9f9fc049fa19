"""Domain exceptions raised by the simulation and protocol modules.

Rule violations subclass ValueError so callers can treat them as bad input.
"""


class MatchgateError(ValueError):
    """Base class for input/precondition violations."""


class DimensionError(MatchgateError):
    """Qubit count, line index or matrix shape out of range."""


class NotUnitaryError(MatchgateError):
    """A matrix that must be unitary is not."""


class NotEvenError(MatchgateError):
    """An operator mixes the even and odd parity subspaces."""


class DeterminantMismatchError(MatchgateError):
    """G(A, B) requested with det A != det B."""


class NotFermionicError(MatchgateError):
    """A state (or block) without definite parity where one is required."""


class BasisStateError(MatchgateError):
    """A line claimed to be a computational-basis product factor is not."""


class WrongMagicStateError(MatchgateError):
    """A resource state is not in the MG-equivalence class a gadget needs."""


class GaussianInputError(MatchgateError):
    """A non-Gaussian state was required but the input is Gaussian."""


class DegeneratePhaseError(MatchgateError):
    """Phase angle 0: the resource state is Gaussian, not magic."""


class MismatchedResourceError(MatchgateError):
    """Two resource copies that must share a phase do not."""


class RetryBudgetExhausted(MatchgateError):
    """Sampling reduction ran out of fresh copies."""

    def __init__(self, message: str, attempts: int) -> None:
        super().__init__(message)
        self.attempts = attempts


class Case2bViolation(AssertionError):
    """Internal contradiction: no measurement witness found for k >= 5."""

    def __init__(self, message: str, rank: int) -> None:
        super().__init__(message)
        self.rank = rank
