"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the physical domain of a model."""


class ConfigError(ValueError):
    """A configuration document is malformed or incomplete.

    ``path`` names the offending key, e.g. ``"cloud.temperature"``.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConvergenceError(RuntimeError):
    """A numerical routine failed to reach its requested tolerance."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)
