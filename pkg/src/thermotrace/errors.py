"""Exception types shared across the package."""


class ThermotraceError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(ThermotraceError, ValueError):
    """A material parameter violates the admissibility hypotheses."""


class NonSPDError(ThermotraceError, ValueError):
    """A metric matrix is not symmetric positive definite."""

    def __init__(self, message, min_eigenvalue=None, condition=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.condition = condition


class DomainError(ThermotraceError, ValueError):
    """A point (or a finite-difference stencil) leaves the chart domain."""


class PoleError(ThermotraceError, ValueError):
    """The spectral parameter sits too close to a symbol pole."""


class UnsupportedOrderError(ThermotraceError, ValueError):
    """A parametrix order above the configured maximum was requested."""


class UnsupportedConfigurationError(ThermotraceError, ValueError):
    """Material parameters outside what an exact spectrum supports."""


class BesselZeroError(ThermotraceError, RuntimeError):
    """The bracketing scan for a Bessel-function zero failed."""

    def __init__(self, order, index, message=""):
        super().__init__(message or f"zero finder failed at (m={order}, k={index})")
        self.order = order
        self.index = index


class AssemblyError(ThermotraceError, RuntimeError):
    """An assembled operator matrix failed an internal consistency check."""


class TailGuardError(ThermotraceError, ValueError):
    """Heat-trace evaluation below the truncation-safe time window."""

    def __init__(self, message, t_min=None):
        super().__init__(message)
        self.t_min = t_min


class InsufficientSpectrumError(ThermotraceError, ValueError):
    """The spectrum cutoff is too small to open a fitting window."""

    def __init__(self, message, required_cutoff=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class ConfigError(ThermotraceError, ValueError):
    """A run configuration failed validation; carries the field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
