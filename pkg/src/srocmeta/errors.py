"""Exception and warning types shared across the package."""


class SrocError(Exception):
    """Base class for all srocmeta errors."""


class UndefinedMetricError(SrocError):
    """A ratio metric has an empty denominator (e.g. sensitivity with tp+fn=0)."""


class InfiniteOddsError(SrocError):
    """Diagnostic odds ratio with fp=0 or fn=0; apply a continuity correction first."""


class InfiniteLogitError(SrocError):
    """logit transform requested on a table with a zero cell."""


class BoundaryError(SrocError):
    """Observed Se or FPR sits exactly on 0 or 1, where the accuracy parameter is undefined."""


class InsufficientDataError(SrocError):
    """Fewer readers than the requested fit can identify."""


class NonConvergenceError(SrocError):
    """Every optimizer restart hit its iteration cap."""


class DegenerateVarianceError(SrocError):
    """Between-reader variance of logit FPR is zero; the regression SROC curve is undefined."""


class SingularCovarianceError(SrocError):
    """Covariance matrix is not positive-definite where the operation requires it."""


class UnorderedCurveError(SrocError):
    """Curve points are not strictly increasing in false positive rate."""


class AllReplicatesFailedError(SrocError):
    """Every bootstrap replicate failed to refit; no interval can be formed."""


class DatasetFormatError(SrocError):
    """Invalid input file: bad header, bad value, or duplicate reader id.

    Carries optional line/field context so CLI messages can point at the
    offending cell.
    """

    def __init__(self, message, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}" if field is None else f"line {line}, field '{field}': {message}"
        super().__init__(message)
        self.line = line
        self.field = field


class BelowDiagonalWarning(UserWarning):
    """A reader's accuracy parameter exceeds 1 (operating point below the chance diagonal)."""


class BootstrapQualityWarning(UserWarning):
    """More than 10% of bootstrap replicates failed to refit and were dropped."""
