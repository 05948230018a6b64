"""Layered triangle-mesh tokenization codec.

Pipeline: load an OBJ, normalize into the unit cube, quantize onto a
128^3 grid, repair non-manifold vertices/edges, tokenize the layered
connectivity into a compact sequence, and decode it back to an identical
mesh.  A FastAPI service (:mod:`silkmesh.service`) exposes every step;
the CLI (:mod:`silkmesh.cli`) is a thin client of that service.
"""

from .config import CodecConfig, Vocabulary, load_config, validate_config_dict
from .errors import (
    EncodingCapacityExceeded,
    GrammarError,
    InvalidToken,
    MeshIOError,
    NonManifoldError,
    OrientationError,
    SilkmeshError,
    UnencodableRow,
    ZeroExtentError,
)
from .halfedge import build_half_edge, validate_manifold
from .mesh import (
    QuantizedMesh,
    RawMesh,
    Transform,
    connected_components,
    euler_characteristic,
    normalize,
    quantize,
)
from .metrics import average_degree, evaluate, sample_surface, signed_volume
from .obj_io import format_obj, load_mesh, parse_obj, save_mesh
from .pipeline import PreprocessResult, preprocess
from .repair import repair_non_manifold
from .tokens import (
    DecodedMesh,
    decode_tokens,
    deserialize_tokens,
    deserialize_tokens_text,
    encode_mesh,
    sequence_stats,
    serialize_tokens,
    serialize_tokens_text,
    tokens_from_bytes,
    tokens_to_bytes,
    tokens_to_vertex,
    vertex_to_tokens,
)
from .watertight import detect_holes, repair_holes

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "Vocabulary",
    "load_config",
    "validate_config_dict",
    "SilkmeshError",
    "MeshIOError",
    "ZeroExtentError",
    "NonManifoldError",
    "OrientationError",
    "EncodingCapacityExceeded",
    "UnencodableRow",
    "InvalidToken",
    "GrammarError",
    "RawMesh",
    "QuantizedMesh",
    "Transform",
    "normalize",
    "quantize",
    "connected_components",
    "euler_characteristic",
    "build_half_edge",
    "validate_manifold",
    "repair_non_manifold",
    "preprocess",
    "PreprocessResult",
    "load_mesh",
    "save_mesh",
    "parse_obj",
    "format_obj",
    "encode_mesh",
    "decode_tokens",
    "DecodedMesh",
    "vertex_to_tokens",
    "tokens_to_vertex",
    "serialize_tokens",
    "serialize_tokens_text",
    "deserialize_tokens",
    "deserialize_tokens_text",
    "tokens_from_bytes",
    "tokens_to_bytes",
    "sequence_stats",
    "detect_holes",
    "repair_holes",
    "evaluate",
    "sample_surface",
    "average_degree",
    "signed_volume",
    "__version__",
]
