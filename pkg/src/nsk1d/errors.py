"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, exponents, initial data or run configuration."""


class UnsupportedError(ValueError):
    """Operation requested outside the exponents/modes it is defined for."""


class PositivityError(ValueError):
    """A density field reached a nonpositive value.

    ``minimum`` carries the offending minimum and ``stage`` (when raised by
    the integrator) the Runge-Kutta stage that produced it.
    """

    def __init__(self, minimum, stage=None, message=None):
        self.minimum = float(minimum)
        self.stage = stage
        if message is None:
            message = f"density must be strictly positive (min = {self.minimum:.6g})"
            if stage is not None:
                message += f" at RK stage {stage}"
        super().__init__(message)


class StabilityError(RuntimeError):
    """Non-finite values appeared during time stepping."""


class SamplingError(ValueError):
    """A trajectory is too sparsely sampled for the requested diagnostic."""


class ResolutionWarning(UserWarning):
    """Spectral tail too heavy for quartic functionals to be trusted."""


class MisuseError(ValueError):
    """A search or study was requested where it cannot mean anything."""
