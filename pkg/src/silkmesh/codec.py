"""Row-level topology coding.

Self-layer rows use a fixed window bitmask over cyclic forward offsets plus
extra distance tokens for connections beyond the window.  Between-layer
rows use a run-pattern codebook: the token combines the first connected
column with one of Y admissible window patterns (at most two runs of ones).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .config import between_pattern_count
from .errors import EncodingCapacityExceeded, InvalidToken, UnencodableRow


@dataclass(frozen=True)
class SelfRowCode:
    window_token: int          # in [0, 2^W)
    extra_tokens: tuple[int, ...]  # strictly increasing, each in [0, m)


def encode_self_rows(
    entries: frozenset[frozenset[int]] | set, size: int, window: int, capacity: int
) -> list[SelfRowCode]:
    """Encode all rows of a self-layer matrix.

    Each unordered entry {i, j} is emitted by exactly one row: the endpoint
    with the smaller cyclic forward offset when that offset fits the window
    (ties to the lower row), otherwise as an extra distance token on the
    lower-indexed row.
    """
    if size > capacity:
        raise EncodingCapacityExceeded(f"layer width {size} exceeds capacity {capacity}")
    window_bits = [0] * (size + 1)          # 1-based rows
    extras: list[list[int]] = [[] for _ in range(size + 1)]
    for entry in entries:
        i, j = sorted(entry)
        if not (1 <= i < j <= size):
            raise ValueError(f"entry {{{i},{j}}} outside layer of size {size}")
        d_fwd = (j - i) % size               # offset from i to j
        d_bwd = (i - j) % size               # offset from j to i
        if min(d_fwd, d_bwd) <= window:
            if d_fwd < d_bwd or (d_fwd == d_bwd and i < j):
                owner, dist = i, d_fwd
            else:
                owner, dist = j, d_bwd
            window_bits[owner] |= 1 << (dist - 1)
        else:
            distance = j - i - window - 1
            if distance >= capacity:
                raise EncodingCapacityExceeded(
                    f"self-layer distance {distance} exceeds capacity {capacity}"
                )
            extras[i].append(distance)
    return [
        SelfRowCode(window_bits[i], tuple(sorted(extras[i])))
        for i in range(1, size + 1)
    ]


def decode_self_rows(
    codes: list[SelfRowCode], size: int, window: int, capacity: int, strict: bool = True
) -> set[frozenset[int]]:
    """Inverse of :func:`encode_self_rows`."""
    if len(codes) != size:
        raise InvalidToken(f"expected {size} self-layer rows, got {len(codes)}")
    entries: set[frozenset[int]] = set()
    for i, code in enumerate(codes, start=1):
        if not (0 <= code.window_token < 2**window):
            raise InvalidToken(f"self window token {code.window_token} out of range")
        for k in range(window):
            if code.window_token >> k & 1:
                d = k + 1
                j = (i - 1 + d) % size + 1 if size else 0
                if j == i:
                    if strict:
                        raise InvalidToken(
                            f"self window bit at offset {d} wraps onto row {i}"
                        )
                    continue
                entries.add(frozenset((i, j)))
        for extra in code.extra_tokens:
            if not (0 <= extra < capacity):
                raise InvalidToken(f"self extra token {extra} out of range")
            j = i + window + 1 + extra
            if j > size:
                if strict:
                    raise InvalidToken(
                        f"self extra token {extra} points past layer end ({j} > {size})"
                    )
                continue
            entries.add(frozenset((i, j)))
    return entries


@dataclass(frozen=True)
class BetweenPatternCodebook:
    """Bijection between admissible window patterns and [0, Y).

    A pattern is the window content after the leading mandatory 1; the full
    sequence (leading 1 + pattern) must contain at most two runs of ones.
    Patterns are ordered by their binary value, first cell most significant.
    """

    window: int
    patterns: tuple[tuple[int, ...], ...]
    index_of: dict[tuple[int, ...], int]

    @property
    def size(self) -> int:
        return len(self.patterns)


def _run_count(bits: tuple[int, ...]) -> int:
    runs = 0
    prev = 0
    for b in bits:
        if b and not prev:
            runs += 1
        prev = b
    return runs


@lru_cache(maxsize=None)
def build_between_codebook(window: int) -> BetweenPatternCodebook:
    if not (1 <= window <= 16):
        raise ValueError("between window must be in [1, 16]")
    patterns = []
    for value in range(2**window):
        bits = tuple((value >> (window - 1 - k)) & 1 for k in range(window))
        if _run_count((1,) + bits) <= 2:
            patterns.append(bits)
    expected = between_pattern_count(window)
    if len(patterns) != expected:
        raise AssertionError(
            f"codebook enumeration produced {len(patterns)} patterns, expected {expected}"
        )
    return BetweenPatternCodebook(
        window=window,
        patterns=tuple(patterns),
        index_of={p: k for k, p in enumerate(patterns)},
    )


def encode_between_row(
    columns: set[int], cols: int, codebook: BetweenPatternCodebook, capacity: int
) -> int:
    """Token for one between-layer row given its set of connected columns.

    The window is placed at the first column of the (cyclically read) run
    structure; all other connected columns must fall within the next W'
    cyclic positions and form at most one further run.
    """
    if not columns:
        raise UnencodableRow("between-layer row is empty")
    if min(columns) < 1 or max(columns) > cols:
        raise ValueError("between-layer column out of range")
    w = codebook.window
    if len(columns) == cols:
        candidates = [min(columns)]
    else:
        candidates = sorted(
            c for c in columns if ((c - 2) % cols) + 1 not in columns
        )
    for x in candidates:
        offsets = sorted((c - x) % cols for c in columns)
        if offsets[-1] > w:
            continue
        pattern = tuple(1 if (k + 1) in offsets else 0 for k in range(w))
        index = codebook.index_of.get(pattern)
        if index is None:
            continue
        if x > capacity:
            raise EncodingCapacityExceeded(
                f"between-layer start column {x} exceeds capacity {capacity}"
            )
        return (x - 1) * codebook.size + index
    raise UnencodableRow(
        f"between-layer row {sorted(columns)} does not fit window {w}"
    )


def _greedy_groups(
    ordered: list[int], cols: int, window: int
) -> list[tuple[int, set[int]]]:
    """Pack columns (already in cyclic visit order) into window-sized groups.

    Each group holds an anchor column plus relative offsets that keep the
    whole window at no more than two runs of ones.
    """
    groups: list[tuple[int, set[int]]] = []
    anchor: int | None = None
    offsets: set[int] = set()
    for c in ordered:
        if anchor is None:
            anchor, offsets = c, {0}
            continue
        rel = (c - anchor) % cols
        if 0 < rel <= window:
            merged = sorted(offsets | {rel})
            runs = 1 + sum(1 for a, b in zip(merged, merged[1:]) if b != a + 1)
            if runs <= 2:
                offsets.add(rel)
                continue
        groups.append((anchor, offsets))
        anchor, offsets = c, {0}
    if anchor is not None:
        groups.append((anchor, offsets))
    return groups


def encode_between_row_multi(
    columns: set[int], cols: int, codebook: BetweenPatternCodebook, capacity: int
) -> list[int]:
    """Tokens for one between-layer row, using extra windows when needed.

    Most rows fit a single window token (identical to
    :func:`encode_between_row`); rows whose connected columns spread wider
    than one window — typically at the closing cap of a surface — emit one
    token per greedy window group.  Decoding is the union of all windows.
    """
    if not columns:
        raise UnencodableRow("between-layer row is empty")
    if min(columns) < 1 or max(columns) > cols:
        raise ValueError("between-layer column out of range")
    w = codebook.window
    if len(columns) == cols:
        candidates = [min(columns)]
    else:
        candidates = sorted(
            c for c in columns if ((c - 2) % cols) + 1 not in columns
        )
    best: tuple[int, int, list[tuple[int, set[int]]]] | None = None
    for x in candidates:
        ordered = sorted(columns, key=lambda c: (c - x) % cols)
        groups = _greedy_groups(ordered, cols, w)
        key = (len(groups), x)
        if best is None or key < (best[0], best[1]):
            best = (len(groups), x, groups)
    assert best is not None
    tokens = []
    for anchor, offsets in best[2]:
        if anchor > capacity:
            raise EncodingCapacityExceeded(
                f"between-layer start column {anchor} exceeds capacity {capacity}"
            )
        pattern = tuple(1 if (k + 1) in offsets else 0 for k in range(w))
        tokens.append((anchor - 1) * codebook.size + codebook.index_of[pattern])
    return tokens


def decode_between_token(
    token: int, cols: int, codebook: BetweenPatternCodebook, capacity: int
) -> set[int]:
    """Inverse of :func:`encode_between_row`."""
    if not (0 <= token < capacity * codebook.size):
        raise InvalidToken(f"between token {token} out of range")
    x = token // codebook.size + 1
    pattern = codebook.patterns[token % codebook.size]
    if x > cols:
        raise InvalidToken(f"between start column {x} exceeds layer width {cols}")
    columns = {x}
    for k, bit in enumerate(pattern):
        if bit:
            col = (x - 1 + k + 1) % cols + 1
            if col in columns:
                raise InvalidToken(
                    f"between token {token} wraps onto an already-set column"
                )
            columns.add(col)
    return columns
