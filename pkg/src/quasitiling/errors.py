"""Exception hierarchy shared by all modules."""


class QuasitilingError(Exception):
    """Base class for every error raised by this package."""


class TagMismatch(QuasitilingError, ValueError):
    """Operands belong to different groups."""


class EmptySetError(QuasitilingError, ValueError):
    pass


class InfeasibleParameters(QuasitilingError):
    """No admissible constant exists on the searched grid."""


class FamilyTooCoarse(InfeasibleParameters):
    """The Følner index search ran past its configured bound."""


class SeparationFailure(QuasitilingError):
    """A cylinder could not be separated under the required translates."""

    def __init__(self, message, pattern=None, pair=None, radius=None):
        super().__init__(message)
        self.pattern = pattern
        self.pair = pair
        self.radius = radius


class CorruptTiling(QuasitilingError):
    """The tiling data violates a structural invariant."""


class MissingProvenance(QuasitilingError):
    pass
