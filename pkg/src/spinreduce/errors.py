"""Exception types shared across the package."""


class SpinreduceError(Exception):
    """Base class for all package-specific errors."""


class InadmissibleParameterError(SpinreduceError, ValueError):
    """Model parameters leave no admissible momentum interval."""


class InadmissibleMomentumError(SpinreduceError, ValueError):
    """A reduced state lies outside (or on the singular boundary of) the
    admissible momentum interval."""


class SingularConfigurationError(SpinreduceError, ValueError):
    """A spin configuration where the cylindrical chart breaks down
    (vanishing transverse component, longitude angle undefined)."""


class StepFailureError(SpinreduceError, RuntimeError):
    """An implicit integration step failed to converge."""


class StiffFailureError(SpinreduceError, RuntimeError):
    """The adaptive integrator underflowed its step size."""


class ConfigError(SpinreduceError, ValueError):
    """Invalid run configuration; the message names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
