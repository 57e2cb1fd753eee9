"""Exception types shared across the package."""

from __future__ import annotations


class Hmm2Error(Exception):
    """Base class for all errors raised by this package."""


# Violation codes attached to ModelValidationError entries.
NON_POSITIVE_TRANSITION = "NonPositiveTransition"
ROW_SUM_VIOLATION = "RowSumViolation"
BAD_INITIAL = "BadInitial"
BAD_EMISSION = "BadEmission"
INDISTINGUISHABLE_EMISSIONS = "IndistinguishableEmissions"


class ModelValidationError(Hmm2Error):
    """A model description violates one or more invariants.

    ``violations`` is a list of ``(code, detail)`` pairs; every violated
    invariant is reported, not just the first one found.
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        summary = "; ".join(f"{code}: {detail}" for code, detail in self.violations)
        super().__init__(f"invalid model: {summary}")

    @property
    def codes(self) -> set[str]:
        return {code for code, _ in self.violations}


class EmptyLength(Hmm2Error):
    """A sequence length of zero was requested where n >= 1 is required."""


class TooLong(Hmm2Error):
    """Exhaustive enumeration was requested for a sequence longer than 24."""


class ImpossibleObservation(Hmm2Error):
    """An observation has zero density under both emission models."""

    def __init__(self, time: int, observation=None):
        self.time = time
        self.observation = observation
        super().__init__(
            f"observation at time {time} has zero density under both states"
        )


class EmptyBuffer(Hmm2Error):
    """flush() was called on a stream with no buffered observations."""


class StreamFinalized(Hmm2Error):
    """The stream was already flushed or poisoned and accepts no further ops."""


class MassThresholdUnreachable(Hmm2Error):
    """No margin in the search grid yields a positive-probability barrier set."""


class PlanError(Hmm2Error):
    """An experiment plan or sweep grid is invalid."""
