"""Codec configuration and the derived token vocabulary layout."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

CONFIG_ENV_VAR = "SILKSONG_CONFIG"

#: expected vocabulary total for the default configuration
DEFAULT_VOCAB_TOTAL = 10267


def between_pattern_count(between_window: int) -> int:
    """Number of admissible between-layer window patterns (Y)."""
    w = between_window
    return 2 * w + 2 * math.comb(w - 1, 2) + math.comb(w - 1, 3)


@dataclass(frozen=True)
class CodecConfig:
    resolution: int = 128
    window: int = 8                 # self-layer window W
    between_window: int = 5         # between-layer window W'
    max_layer_width: int = 200      # capacity m
    max_tokens: int = 10000
    strict_decode: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if self.resolution % 8 != 0:
            raise ValueError("resolution must be a multiple of the 8-cell block size")
        if not (1 <= self.between_window <= 16):
            raise ValueError("between_window must be in [1, 16]")
        for name in ("window", "max_layer_width", "max_tokens"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def with_overrides(self, **kwargs) -> "CodecConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self


@dataclass(frozen=True)
class Vocabulary:
    """Fixed token-id layout derived from a :class:`CodecConfig`.

    Ranges are contiguous and disjoint:
    control (C, U, E), block, offset, self-layer, between-layer.
    """

    C: int = 0
    U: int = 1
    E: int = 2
    block_base: int = 3
    block_count: int = 4096
    offset_base: int = 4099
    offset_count: int = 512
    self_base: int = 4611
    self_count: int = 456
    self_window_count: int = 256    # window tokens; the rest are extras
    between_base: int = 5067
    between_count: int = 5200
    total: int = DEFAULT_VOCAB_TOTAL

    @classmethod
    def from_config(cls, config: CodecConfig) -> "Vocabulary":
        blocks_per_axis = config.resolution // 8
        block_count = blocks_per_axis**3
        offset_count = 512
        window_count = 2**config.window
        self_count = window_count + config.max_layer_width
        between_count = config.max_layer_width * between_pattern_count(
            config.between_window
        )
        block_base = 3
        offset_base = block_base + block_count
        self_base = offset_base + offset_count
        between_base = self_base + self_count
        return cls(
            block_base=block_base,
            block_count=block_count,
            offset_base=offset_base,
            offset_count=offset_count,
            self_base=self_base,
            self_count=self_count,
            self_window_count=window_count,
            between_base=between_base,
            between_count=between_count,
            total=between_base + between_count,
        )

    def classify(self, token: int) -> str:
        if token in (self.C, self.U, self.E):
            return "control"
        if self.block_base <= token < self.block_base + self.block_count:
            return "block"
        if self.offset_base <= token < self.offset_base + self.offset_count:
            return "offset"
        if self.self_base <= token < self.self_base + self.self_count:
            if token - self.self_base < self.self_window_count:
                return "self-window"
            return "self-extra"
        if self.between_base <= token < self.between_base + self.between_count:
            return "between"
        return "invalid"


# the default layout is a spec'd constant; fail loudly if the arithmetic drifts
assert Vocabulary.from_config(CodecConfig()) == Vocabulary()


def load_config(path: str | None = None) -> CodecConfig:
    """Load a config from a TOML file, the env var, or return defaults.

    Recognized keys mirror :class:`CodecConfig` fields, either at top level
    or under a ``[codec]`` table.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return CodecConfig()
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    if "codec" in data and isinstance(data["codec"], dict):
        data = data["codec"]
    known = set(CodecConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return CodecConfig(**data)


def validate_config_dict(values: dict) -> CodecConfig:
    """Build a config from a flat mapping, rejecting unknown keys."""
    known = set(CodecConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return CodecConfig(**values)
