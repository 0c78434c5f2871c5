"""Coalitions as integer bitmasks over node indices 0..n-1.

A coalition is a plain ``int`` whose set bits are the member indices.
This keeps power-set work allocation-free and makes subset iteration a
two-line loop. Only n <= 64 is supported by the engine; callers reject
larger graphs at parse time.
"""

from __future__ import annotations

from typing import Iterator

MAX_PLAYERS = 64


def mask_of(members) -> int:
    """Build a coalition mask from an iterable of node indices."""
    mask = 0
    for i in members:
        mask |= 1 << i
    return mask


def members_of(mask: int) -> list[int]:
    """Member indices of a coalition in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def iter_members(mask: int) -> Iterator[int]:
    """Yield member indices in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def size(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def contains(mask: int, i: int) -> bool:
    return bool(mask & (1 << i))


def is_subset(small: int, big: int) -> bool:
    return small & ~big == 0


def iter_subsets(mask: int) -> Iterator[int]:
    """Yield every subset of ``mask``, including 0 and ``mask`` itself.

    Standard submask enumeration: descends from ``mask`` to 0, so order
    is decreasing as an integer. 2^|mask| subsets total.
    """
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def iter_proper_subsets(mask: int) -> Iterator[int]:
    """Yield every strict subset of ``mask`` (``mask`` itself excluded)."""
    if mask == 0:
        return
    sub = (mask - 1) & mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def iter_supersets_within(mask: int, universe: int) -> Iterator[int]:
    """Yield supersets of ``mask`` contained in ``universe``."""
    free = universe & ~mask
    for extra in iter_subsets(free):
        yield mask | extra


def sort_key(mask: int) -> tuple[int, int]:
    """Canonical coalition order: ascending size, then ascending bitmask."""
    return (mask.bit_count(), mask)


def format_coalition(mask: int) -> str:
    """Human-readable form, e.g. ``{0, 2, 5}``; empty set as ``{}``."""
    return "{" + ", ".join(str(i) for i in iter_members(mask)) + "}"
