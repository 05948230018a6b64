"""Array-first bindings for the ``silkmesh`` command-line codec.

Every call shells out to the ``silkmesh`` executable and exchanges data
through its public file formats (OBJ meshes, SILK token containers, JSON
reports), so the results are bit-identical to driving the CLI by hand.
"""

from .api import (
    SilkbindError,
    decode,
    encode,
    metrics,
    repair,
    stats,
    token_stats,
)

__all__ = [
    "SilkbindError",
    "decode",
    "encode",
    "metrics",
    "repair",
    "stats",
    "token_stats",
]

__version__ = "0.1.0"
