"""Exception hierarchy shared by all qmod modules."""


class QmodError(Exception):
    """Base class for every error raised by qmod."""


class QuiverError(QmodError, ValueError):
    """Malformed quiver description."""


class EmptyQuiver(QuiverError):
    pass


class DanglingArrow(QuiverError):
    pass


class DuplicateId(QuiverError):
    pass


class ShapeMismatch(QmodError, ValueError):
    """A matrix does not match the dimension vector it is attached to."""


class QuiverMismatch(QmodError, ValueError):
    """Two objects are defined over different quivers."""


class ResidualTooLarge(QmodError, ValueError):
    """A witness or morphism fails its invariance / intertwining residual."""


class ZeroDimension(QmodError, ValueError):
    """An operation that needs a non-zero dimension vector received zero."""


class NonRationalWeight(QmodError, TypeError):
    pass


class NotEinsteinHermitian(QmodError, ValueError):
    pass


class NotSchur(QmodError, ValueError):
    pass


class NotSemistable(QmodError, ValueError):
    pass


class NotIsomorphic(QmodError, ValueError):
    pass


class DifferentFacets(QmodError, ValueError):
    pass


class GridTooCoarse(QmodError, ValueError):
    pass


class InstanceError(QmodError, ValueError):
    """Schema violation in an instance file; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
