"""Exception types shared across the package."""


class AdaptSimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(AdaptSimError):
    """A scenario, schedule, or search description is malformed.

    Messages name the offending key path (for example
    ``population.segments[1].fraction``) so they can be surfaced verbatim
    by the command line tools.
    """


class DomainError(AdaptSimError):
    """A numeric argument is outside the domain of a model primitive."""
