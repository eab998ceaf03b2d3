"""Exception types raised across the package."""


class LogNLSError(Exception):
    """Base class for every error raised by lognls."""


class InvalidArgument(LogNLSError, ValueError):
    pass


class NoGaussonError(LogNLSError, ValueError):
    """No positive Gausson width exists for the requested (lambda, omega)."""


class SingularityError(LogNLSError, ArithmeticError):
    """The width tau reached zero during integration."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ToleranceNotMet(LogNLSError):
    """A numerical estimate did not reach its requested tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class LossOfIntegrability(LogNLSError, ArithmeticError):
    """Re a <= 0 for a Gaussian width: the step size is too large."""


class NumericalBlowup(LogNLSError, ArithmeticError):
    def __init__(self, message, step):
        super().__init__(f"{message} at step {step}")
        self.step = step


class CoverageError(LogNLSError, ValueError):
    """The attached tau trajectory does not span the requested time."""


class ResolutionError(LogNLSError, ValueError):
    """A field is not resolved by its grid (boundary mass or out-of-box sampling)."""


class MassMismatch(LogNLSError, ValueError):
    pass


class ConfigError(LogNLSError, ValueError):
    """Raised with every validation problem found in a configuration."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


class ReportParseError(LogNLSError, ValueError):
    """A report file is not valid JSON (truncated or corrupted)."""
