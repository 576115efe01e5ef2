"""Exception hierarchy shared by all modules."""


class SexRatioError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SexRatioError, ValueError):
    """Invalid strategy or experiment parameters."""


class ContractError(SexRatioError, ValueError):
    """Arguments violate an operation's preconditions (e.g. inconsistent counts)."""


class DomainError(SexRatioError, ValueError):
    """Argument outside the domain where a function is defined."""


class ResourceError(SexRatioError):
    """Request would exceed the supported computational budget."""


class SolverError(SexRatioError, RuntimeError):
    """Root finding failed; ``samples`` holds the diagnostic evaluations."""

    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples


class QualityError(SexRatioError, RuntimeError):
    """Statistical output not trustworthy (too much censoring, too few tail samples)."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class IntegrityError(SexRatioError):
    """A results directory does not match its manifest."""
