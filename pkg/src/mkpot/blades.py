"""Blade combinatorics for the exterior algebra over a fixed 6-dimensional space.

A blade is a strictly increasing subset of the index set {1,...,6}, stored
internally as a bitmask (bit i-1 set means dx^i is a factor).  There are
C(6,k) blades of degree k and 64 blades in total.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterable

DIM = 6
INDICES = tuple(range(1, DIM + 1))
FULL_MASK = (1 << DIM) - 1


def mask_from_indices(indices: Iterable[int]) -> int:
    """Bitmask of a blade given its (distinct, 1-based) indices."""
    mask = 0
    for i in indices:
        if not 1 <= i <= DIM:
            raise ValueError(f"blade index {i} outside 1..{DIM}")
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated blade index {i}")
        mask |= bit
    return mask


def indices_from_mask(mask: int) -> tuple[int, ...]:
    return tuple(i for i in INDICES if mask & (1 << (i - 1)))


def blade_degree(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def all_blades(degree: int) -> tuple[int, ...]:
    """All blade masks of the given degree, in lexicographic index order."""
    if not 0 <= degree <= DIM:
        raise ValueError(f"degree {degree} outside 0..{DIM}")
    return tuple(mask_from_indices(c) for c in combinations(INDICES, degree))


def complement(mask: int) -> int:
    return FULL_MASK & ~mask


def _sort_sign(seq: tuple[int, ...]) -> int:
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def wedge_sign(a: int, b: int) -> int:
    """Sign s with e_a wedge e_b = s * e_{a|b}; 0 when the blades overlap."""
    if a & b:
        return 0
    return _sort_sign(indices_from_mask(a) + indices_from_mask(b))


@lru_cache(maxsize=None)
def contraction_sign(i: int, mask: int) -> int:
    """Sign of iota_{d/dx^i} e_mask; 0 when i is not a factor of the blade."""
    bit = 1 << (i - 1)
    if not mask & bit:
        return 0
    below = bin(mask & (bit - 1)).count("1")
    return -1 if below % 2 else 1
