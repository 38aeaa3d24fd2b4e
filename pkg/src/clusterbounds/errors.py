"""Error types carrying stable string codes.

Every failure that the CLI can surface maps to one of these codes, so the
reports stay machine readable.
"""


class ClusterBoundsError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **detail):
        super().__init__(message or self.code)
        self.detail = detail


class ConfigError(ClusterBoundsError):
    code = "CONFIG_ERROR"


class InvalidModelError(ConfigError):
    code = "INVALID_MODEL"


class SizeLimitError(ClusterBoundsError):
    code = "SIZE_LIMIT"


class NotPositiveDefiniteError(ClusterBoundsError):
    code = "NOT_POSITIVE_DEFINITE"


class DivergentSeriesError(ClusterBoundsError):
    code = "DIVERGENT_SERIES"


class InvalidDegreeSequenceError(ClusterBoundsError):
    code = "INVALID_DEGREE_SEQUENCE"


class InvalidNError(ClusterBoundsError):
    code = "INVALID_N"


class UnknownSuiteError(ClusterBoundsError):
    code = "UNKNOWN_SUITE"
