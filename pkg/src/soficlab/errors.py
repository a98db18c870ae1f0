"""Exception types shared across soficlab."""


class SoficLabError(Exception):
    """Base class for all library errors."""


class ConfigError(SoficLabError, ValueError):
    """Invalid parameters or configuration."""


class SupportTooSmall(SoficLabError, KeyError):
    """A group element needed by a computation is missing from a sofic map's table."""

    def __str__(self):
        return Exception.__str__(self)


class InconsistentHom(SoficLabError):
    """Generator images do not extend to a homomorphism on the requested support."""


class InsufficientWindow(SoficLabError):
    """A windowed point does not carry the coordinates a computation must read."""


class LengthMismatch(SoficLabError, ValueError):
    pass


class EmptyRestriction(SoficLabError, ValueError):
    pass


class TooLarge(SoficLabError):
    """An exact (exponential) computation was asked for beyond its size cap."""


class ExhaustedTries(SoficLabError):
    """Rejection sampling found fewer good models than requested."""

    def __init__(self, message, found=None):
        super().__init__(message)
        self.found = found if found is not None else []


class HypothesisViolated(SoficLabError):
    """Parameters fall outside the hypotheses of the dominating-set lemma."""


class PreconditionUnverified(SoficLabError):
    pass


class Infeasible(SoficLabError):
    """The parameter cascade cannot be satisfied for the given measure."""

    def __init__(self, message, condition, report=None):
        super().__init__(message)
        self.condition = condition
        self.report = report or {}
