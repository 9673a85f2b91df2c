"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """A configuration or parameter set violates a model constraint."""


class ExhaustionError(RuntimeError):
    """Fewer than ``r`` ants carry positive popularity at selection time."""


class ConsistencyError(ValueError):
    """A reference set does not match the network state it is applied to."""
