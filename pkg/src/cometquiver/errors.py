"""Exception and warning types shared across the package."""


class CometError(ValueError):
    """Base class for validation errors raised by this package."""


class InvalidFlag(CometError):
    pass


class MismatchedCentralRank(CometError):
    pass


class UnsupportedFlagType(CometError):
    pass


class NonIdenticalArms(CometError):
    pass


class ShapeMismatch(CometError):
    pass


class ArmNotBased(CometError):
    pass


class LengthMismatch(CometError):
    pass


class InvalidLevel(CometError):
    pass


class DuplicatePunctures(CometError):
    pass


class EvaluationAtPole(CometError):
    pass


class NotOnShell(CometError):
    pass


class SingularPoint(CometError):
    pass


class Inconclusive(CometError):
    pass


class NotConverged(RuntimeError):
    """Raised when no multi-start run reaches the tolerance.

    The best iterate is kept on ``result`` so callers can still inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EmptyLikely(UserWarning):
    """Predicted dimension is negative; the variety is expected to be empty."""


class NonGeneric(UserWarning):
    """Level vector has a non-positive entry."""


class FewArms(UserWarning):
    """Minimal genus-0 comet with fewer than r + 1 arms."""
