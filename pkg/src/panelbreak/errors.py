"""Error taxonomy shared across the package.

The split mirrors the CLI exit codes: configuration problems are the
caller's fault (exit 1), data problems live in the input files (exit 2),
and numeric problems are factorization or conditioning failures (exit 3).
"""


class ConfigError(ValueError):
    """Invalid parameter, option, or model configuration."""


class DataError(ValueError):
    """Malformed or inadmissible input data."""


class NumericError(RuntimeError):
    """Numerical failure: factorization breakdown, non-repairable covariance."""
