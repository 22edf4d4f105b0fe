"""Exception types shared across the package."""


class AtomEnvError(Exception):
    """Base class for all package errors."""


class NotHermitian(AtomEnvError, ValueError):
    pass


class NoConvergence(AtomEnvError, RuntimeError):
    pass


class InvalidState(AtomEnvError, ValueError):
    pass


class StateCorrupted(AtomEnvError, RuntimeError):
    """Propagated state lost trace, Hermiticity or positivity."""


class NotXState(AtomEnvError, ValueError):
    pass


class OptimizerStalled(AtomEnvError, RuntimeError):
    pass


class NoInteriorMaximum(AtomEnvError, RuntimeError):
    """The best coarse-scan point sits on an endpoint of the search range."""
