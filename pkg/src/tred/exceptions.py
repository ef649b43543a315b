class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class NotHermitianError(ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class BreakdownError(ArithmeticError):
    """The exact time-local generator does not exist at the requested time.

    Raised when the memory-kernel matrix to be inverted is singular or too
    ill-conditioned.
    """

    def __init__(self, t, cond):
        self.t = t
        self.cond = cond
        super().__init__(f"memory matrix not invertible at t={t!r} (condition number {cond:.3e})")


class PositivityViolation(ArithmeticError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class SeriesTruncationWarning(RuntimeWarning):
    """The last retained term of a power series is not negligible."""


class ConfigError(ValueError):
    """An experiment configuration field is missing, unknown or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
