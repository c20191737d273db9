"""Binomial helpers and the shared colexicographic subset order.

Subsets are ascending tuples of 1-based indices.  Every enumeration in the
package (segment labels, multicast target sets, sampled topologies) uses the
colex order of the characteristic bitmask, so layouts are reproducible run
to run and rank/unrank are mutually inverse.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache


def binom(n: int, r: int) -> int:
    """C(n, r) with the convention that it is 0 whenever r < 0, n < 0 or r > n."""
    if r < 0 or n < 0 or r > n:
        return 0
    return math.comb(n, r)


@lru_cache(maxsize=None)
def subsets_colex(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All k-subsets of {1, ..., n} as ascending tuples, in colex order."""
    if k < 0 or k > n:
        return ()
    combos = itertools.combinations(range(1, n + 1), k)
    # colex on sets == lexicographic on the reversed (descending) tuple
    return tuple(sorted(combos, key=lambda c: c[::-1]))


def subset_rank_colex(subset: tuple[int, ...]) -> int:
    """Colex rank of an ascending 1-based subset (inverse of subset_unrank_colex)."""
    return sum(binom(c - 1, i + 1) for i, c in enumerate(subset))


def subset_unrank_colex(n: int, k: int, rank: int) -> tuple[int, ...]:
    """The k-subset of {1, ..., n} at position `rank` of the colex order."""
    total = binom(n, k)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range for C({n},{k})={total}")
    out = []
    r = rank
    m = n - 1
    for size in range(k, 0, -1):
        while binom(m, size) > r:
            m -= 1
        out.append(m + 1)
        r -= binom(m, size)
        m -= 1
    return tuple(reversed(out))
