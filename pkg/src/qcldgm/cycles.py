"""Length-4 cycle detection for circulant blocks and rows of blocks.

A circulant has a 4-cycle iff some directed circular distance between two
support positions occurs twice. Two blocks in the same block-row close a
4-cycle iff their distance sets intersect: rows r and r + d then meet in
one column of each block.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from qcldgm.gf2_poly import RingMismatch, SparsePoly

__all__ = [
    "DistanceMultiset",
    "distance_multiset",
    "has_length4_cycle",
    "cross_block_cycle",
    "matrix_girth_ok",
]


@dataclass(frozen=True)
class DistanceMultiset:
    n: int
    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def repeated(self) -> list[int]:
        return sorted(d for d, c in self.counts.items() if c >= 2)

    def values(self) -> set[int]:
        return set(self.counts)


def distance_multiset(a: SparsePoly) -> DistanceMultiset:
    n = a.n
    sup = a.support
    counts = Counter((f - e) % n for e in sup for f in sup if e != f)
    return DistanceMultiset(n, dict(counts))


def has_length4_cycle(a: SparsePoly) -> bool:
    n = a.n
    seen = set()
    for e in a.support:
        for f in a.support:
            if e != f:
                d = (f - e) % n
                if d in seen:
                    return True
                seen.add(d)
    return False


def cross_block_cycle(a: SparsePoly, b: SparsePoly) -> bool:
    if a.n != b.n:
        raise RingMismatch(f"ring sizes differ: {a.n} vs {b.n}")
    return not distance_multiset(a).values().isdisjoint(distance_multiset(b).values())


def matrix_girth_ok(blocks: Sequence[SparsePoly]) -> bool:
    """No 4-cycle anywhere in [H_0 | H_1 | ... ]; equivalently the Tanner
    graph has girth at least 6."""
    if not blocks:
        return True
    n = blocks[0].n
    for b in blocks:
        if b.n != n:
            raise RingMismatch("blocks must share the ring size")
    if any(has_length4_cycle(b) for b in blocks):
        return False
    sets = [distance_multiset(b).values() for b in blocks]
    return all(x.isdisjoint(y) for x, y in combinations(sets, 2))
