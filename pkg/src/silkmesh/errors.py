"""Error taxonomy shared by the codec, the service and the CLI."""


class SilkmeshError(Exception):
    """Base class for all codec errors."""

    #: stable machine-readable kind, used by the HTTP service and the CLI
    kind = "error"


class MeshIOError(SilkmeshError):
    """Unreadable, unwritable or malformed mesh file."""

    kind = "io"


class ZeroExtentError(SilkmeshError):
    """All vertices coincide; the mesh cannot be normalized."""

    kind = "io"


class NonManifoldError(SilkmeshError):
    """Operation requires a manifold mesh (run repair first)."""

    kind = "validation"


class OrientationError(NonManifoldError):
    """Two faces traverse a shared edge in the same direction."""

    kind = "validation"


class EncodingCapacityExceeded(SilkmeshError):
    """A layer or token distance exceeds the configured capacity."""

    kind = "capacity"


class UnencodableRow(SilkmeshError):
    """A between-layer row does not fit any codebook pattern."""

    kind = "capacity"


class InvalidToken(SilkmeshError):
    """A token value is outside its table or decodes inconsistently."""

    kind = "token"


class GrammarError(InvalidToken):
    """Token stream violates the packing grammar."""

    kind = "token"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (token index {position})")
        self.position = position
