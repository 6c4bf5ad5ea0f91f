"""Exception types shared across the package."""


class RsnError(Exception):
    """Base class for all package errors."""


class ParameterError(RsnError, ValueError):
    """Invalid device/model parameter or argument."""


class GenerationError(RsnError, RuntimeError):
    """Network generation failed after bounded retries."""


class NumericalError(RsnError, RuntimeError):
    """Linear solve failed or violated its residual contract.

    Attributes:
        step: time-step index at which the failure occurred, or None.
    """

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class DataError(RsnError, ValueError):
    """Malformed input data (non-finite entries, mismatched lengths)."""


class ConfigError(RsnError, ValueError):
    """Invalid run configuration (bad value or unknown key)."""
