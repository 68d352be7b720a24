"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the range where a model is defined."""


class ConfigError(ValueError):
    """A scenario or simulation setting is inconsistent."""


class RefinementError(ValueError):
    """A discretized spectrum does not capture enough of the wave energy."""
