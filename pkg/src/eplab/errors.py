"""Exception types shared across the package."""


class EplabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EplabError):
    """A run configuration could not be parsed or failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class NonZeroMeanError(EplabError):
    """A source term handed to the periodic Poisson solver has nonzero mean."""


class NonPositiveDensityError(EplabError):
    """A density field lost positivity."""


class DomainViolationError(EplabError):
    """A state left the admissible domain of the variable transform."""

    def __init__(self, message: str, t: float | None = None, location=None):
        self.t = t
        self.location = location
        if t is not None:
            message = f"{message} (t={t:.6g})"
        super().__init__(message)


class CflViolationError(EplabError):
    """The time step exceeds the advective CFL bound."""

    def __init__(self, message: str, t: float | None = None):
        self.t = t
        if t is not None:
            message = f"{message} (t={t:.6g})"
        super().__init__(message)


class NonPositiveSeriesError(EplabError):
    """A series handed to the log-linear rate fit contains values <= 0."""


class TooFewSamplesError(EplabError):
    """Not enough samples inside the requested fit window."""


class GridTooCoarseError(EplabError):
    """The retained lattice cannot host the first dyadic shell."""
