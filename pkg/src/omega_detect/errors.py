"""Exception hierarchy shared by every stage of the pipeline.

Each class carries a short ``code`` used as the ``reject_reason`` of a
REJECTED decision and for mapping CLI exit codes.
"""


class OmegaError(Exception):
    code = "error"


class MaskFormatError(OmegaError):
    """The raster file could not be read or is not a supported format."""

    code = "mask_format"


class NoForeground(OmegaError):
    code = "no_foreground"


class DegenerateObject(OmegaError):
    code = "degenerate_object"


class OutOfDomain(OmegaError, ValueError):
    code = "out_of_domain"


class Singularity(OmegaError, ValueError):
    code = "singularity"


class NoRealSolution(OmegaError, ValueError):
    code = "no_real_solution"


class GapInPattern(OmegaError):
    code = "gap_in_pattern"


class UnreliablePattern(OmegaError):
    code = "unreliable_pattern"


class MalformedPattern(OmegaError):
    code = "malformed_pattern"


class CalibrationError(OmegaError):
    code = "calibration_error"


class SpecError(OmegaError, ValueError):
    code = "spec_error"


class ConfigError(OmegaError, ValueError):
    code = "config_error"
