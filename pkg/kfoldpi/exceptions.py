"""Exception hierarchy shared by every kfoldpi module"""

from typing import Optional


class KfoldpiError(Exception):
    """Base class of all errors raised by kfoldpi"""


class DimensionMismatch(KfoldpiError, ValueError):
    """Operand shapes do not agree"""


class NotPositiveDefinite(KfoldpiError, ValueError):
    """A Cholesky pivot was not safely positive

    Attributes
    ----------

    pivot : int
        Zero-based index of the failing pivot.
    """

    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(
            f"Matrix is not positive definite: pivot {pivot} evaluated to {value!r}, "
            "which is not above the tolerance of 1e-12."
        )

    def __reduce__(self):
        return (NotPositiveDefinite, (self.pivot, self.value))


class NonFiniteLoss(KfoldpiError, ArithmeticError):
    """Training diverged

    Attributes
    ----------

    iteration : int
        One-based iteration at which the loss stopped being finite.
    loss : float
        The offending loss value.
    """

    def __init__(self, iteration: int, loss: float):
        self.iteration = iteration
        self.loss = loss
        super().__init__(
            f"Training loss became non-finite ({loss!r}) at iteration {iteration}. "
            "Consider a smaller learning rate or standardized predictors."
        )

    def __reduce__(self):
        return (NonFiniteLoss, (self.iteration, self.loss))


class EmptyResiduals(KfoldpiError, ValueError):
    """A conformal quantile was requested from no residuals"""


class InsufficientData(KfoldpiError, ValueError):
    """Too few observations for the requested partitioning"""


class InvalidRho(KfoldpiError, ValueError):
    """The AR(1) correlation parameter is outside (-1, 1)"""


class MissingBaseline(KfoldpiError, ValueError):
    """Width ratios were requested but no split conformal records exist"""


class ParseError(KfoldpiError, ValueError):
    """A data file could not be interpreted

    Attributes
    ----------

    row : Optional[int]
        One-based data row of the problem, when known.
    column : Optional[str]
        Column name of the problem, when known.
    """

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        self._message = message
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} (at {', '.join(location)})"
        super().__init__(message)

    def __reduce__(self):
        return (ParseError, (self._message, self.row, self.column))


class EmptyAfterCleaning(KfoldpiError, ValueError):
    """Every row of a dataset was dropped while cleaning"""


class EmptyGroup(KfoldpiError, ValueError):
    """A plot group contained no values"""


class DuplicateRecords(KfoldpiError, ValueError):
    """More than one record shares a (scenario, method, replicate) key"""


class ConfigError(KfoldpiError, ValueError):
    """A configuration value is invalid

    Attributes
    ----------

    field : str
        Name of the configuration field at fault.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self._message = message
        super().__init__(f"Invalid configuration for '{field}': {message}")

    def __reduce__(self):
        return (ConfigError, (self.field, self._message))


class CellFailure(KfoldpiError, RuntimeError):
    """A (scenario, replicate, method) cell could not be evaluated

    Attributes
    ----------

    scenario : str
    replicate : int
    method : str
    cause : BaseException
    """

    def __init__(self, scenario: str, replicate: int, method: str, cause: BaseException):
        self.scenario = scenario
        self.replicate = replicate
        self.method = method
        self.cause = cause
        super().__init__(
            f"Cell (scenario={scenario}, replicate={replicate}, method={method}) failed: "
            f"{cause}"
        )

    def __reduce__(self):
        return (CellFailure, (self.scenario, self.replicate, self.method, self.cause))
