"""Exception hierarchy.

Every error carries a short ``category`` string which the command line
prints on stderr so scripts can branch on it.
"""


class BezcageError(Exception):
    category = "error"


class PatchError(BezcageError, ValueError):
    category = "patch"


class DomainError(BezcageError, ValueError):
    """Parameter outside a patch's domain."""

    category = "domain"


class CageError(BezcageError, ValueError):
    category = "cage"


class MeshError(BezcageError, ValueError):
    category = "mesh"


class ExteriorPointError(MeshError):
    """Query points that are not strictly inside the cage."""

    category = "exterior"

    def __init__(self, message, indices):
        super().__init__(message)
        self.indices = list(indices)


class RankError(CageError):
    category = "rank"


class ConditioningError(CageError):
    category = "conditioning"


class StructureError(CageError):
    """Target cage does not have the same patch layout as the source."""

    category = "structure"


class FormatError(BezcageError, ValueError):
    category = "format"


class StaleCoordinatesError(BezcageError):
    category = "stale-coordinates"
