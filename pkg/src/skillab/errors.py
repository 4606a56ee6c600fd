"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 2, file/format
problems exit 3, numeric failures exit 4.
"""


class ConfigError(ValueError):
    """Bad configuration: wrong shapes, unknown keys, invalid values."""


class FormatError(RuntimeError):
    """Malformed on-disk artifact: manifest/blob mismatch, bad version."""


class DataError(ValueError):
    """Dataset cannot satisfy a sampling or generation request."""


class TrainingError(RuntimeError):
    """Numeric failure during training (NaN/inf loss or gradients).

    Carries the last finite loss breakdown when the trainer aborts.
    """

    def __init__(self, message, last_breakdown=None):
        super().__init__(message)
        self.last_breakdown = last_breakdown
