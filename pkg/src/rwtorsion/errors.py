"""Exception types raised by the rwtorsion library.

Input problems (bad files, bad weights, unknown states) and computation
problems (singular systems, non-convergent iterations) are kept in two
separate branches so the CLI can map them to distinct exit codes.
"""

from __future__ import annotations


class RWTorsionError(Exception):
    """Base class for all library errors."""


class InputError(RWTorsionError):
    """A problem with user-supplied data (files, weights, state names)."""


class ComputationError(RWTorsionError):
    """A numerical computation could not be completed."""


class ParseError(InputError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateEdge(InputError):
    pass


class NonpositiveWeight(InputError):
    pass


class IsolatedVertex(InputError):
    pass


class UnknownState(InputError):
    pass


class EmptyDomain(InputError):
    pass


class DomainTooLarge(InputError):
    pass


class RowNotStochastic(InputError):
    pass


class NonpositiveMeasure(InputError):
    pass


class NotReversible(InputError):
    pass


class StandingAssumptionViolated(InputError):
    pass


class KernelEscapesBox(InputError):
    pass


class PaddingNegative(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class NonConvergence(ComputationError):
    """Nonlinear solver failed to meet its tolerance within the iteration cap."""


class SingularSystem(ComputationError):
    pass


class ZeroG(ComputationError):
    def __init__(self, n: int, message: str | None = None):
        self.n = n
        super().__init__(message or f"g({n}) = 0; ratio-based formula undefined")


class ZeroFunction(ComputationError):
    pass


class StepCapExceeded(ComputationError):
    pass


class ConsistencyError(ComputationError):
    """An internal cross-check failed (results disagree beyond tolerance)."""
