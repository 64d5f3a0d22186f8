"""Exception hierarchy shared across the package.

Three families map onto the CLI exit codes: configuration problems (2),
data/file problems (3), and numerical failures (4).
"""


class FomcNewsError(Exception):
    """Base class for all package errors."""


class ConfigError(FomcNewsError):
    """Invalid or incomplete pipeline configuration."""

    exit_code = 2


class DataError(FomcNewsError):
    """Problems with input files or series alignment."""

    exit_code = 3


class ParseError(DataError):
    """A file could not be parsed; message names the offending line."""


class DimensionError(DataError):
    """A row or matrix has the wrong number of entries."""


class ValidationError(DataError):
    """Parsed values violate a declared invariant (non-finite, negative FFR, ...)."""


class AlignmentError(DataError):
    """No meetings survive the intersection/filter step."""


class MissingArtifactError(DataError):
    """A required pipeline artifact is absent from the output directory."""


class NumericError(FomcNewsError):
    """Numerical failure in an estimation routine."""

    exit_code = 4


class DegenerateFitError(NumericError):
    """The penalized regression problem has no meaningful solution."""


class SingularDesignError(NumericError):
    """Design matrix is rank deficient."""


class InsufficientObservationsError(NumericError):
    """Fewer observations than parameters."""


class DegenerateRegressorError(NumericError):
    """A regressor has (numerically) zero variance; signals an under- or
    over-fit expectation stage."""


class NoValidCellError(NumericError):
    """Every hyperparameter grid cell produced a degenerate gap."""


class InsufficientSampleError(NumericError):
    """Monthly sample too short for the requested VAR order."""
