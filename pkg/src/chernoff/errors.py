"""Exception types shared across the package.

Every exception carries an ``exit_code`` used by the CLI:

* 2 — invalid configuration or arguments,
* 3 — a numerical precondition failed (e.g. a kernel too narrow for the grid),
* 4 — a numerical assertion failed after artifacts were written.
"""


class ChernoffError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class InvalidResolution(ChernoffError):
    """Grid resolution below the supported minimum."""


class PointNotOnManifold(ChernoffError):
    """A point expected on the manifold is off it beyond tolerance."""


class ShapeMismatch(ChernoffError):
    """Array length does not match the grid node count."""


class InvalidTimeOrder(ChernoffError):
    """Times violate the required ordering (e.g. s >= t)."""


class InvalidPartition(ChernoffError):
    """Partition request with no steps or a reversed interval."""


class UnsupportedScaling(ChernoffError):
    """Operation requires scalar scaling c(t)*I but got something else."""


class TimesNotInPartition(ChernoffError):
    """Requested observation times are not partition points."""


class ShellTooThick(ChernoffError):
    """Shell half-width too large relative to the manifold radius."""


class InvalidConfig(ChernoffError):
    """Experiment configuration failed validation."""


class KernelUnderResolved(ChernoffError):
    """Kernel width below the safe multiple of the grid spacing."""

    exit_code = 3


class IllConditionedFit(ChernoffError):
    """Design matrix condition number exceeds the allowed bound."""

    exit_code = 3


class CheckFailed(ChernoffError):
    """A configured numerical assertion did not hold."""

    exit_code = 4
