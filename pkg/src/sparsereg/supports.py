"""Support-set enumeration and sampling shared by landscape and RIP code.

Exhaustive routines stream ``itertools.combinations`` in lexicographic
order without materializing the full list; callers that keep first-strict
minima therefore resolve ties toward the lexicographically smallest
support.  Anything exhaustive checks its count against an explicit budget
first and refuses rather than silently sampling.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterator, Sequence

import numpy as np


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the caller's budget."""


def check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise BudgetExceededError(
            f"{what} needs {count} supports but the budget is {budget}; "
            "raise the budget or use sampled mode"
        )


def enumerate_supports(p: int, k: int) -> Iterator[tuple[int, ...]]:
    """All size-k subsets of range(p), lexicographic order."""
    return combinations(range(p), k)


def enumerate_overlap_supports(
    star: Sequence[int], rest: Sequence[int], s: int, k: int
) -> Iterator[tuple[int, ...]]:
    """All size-k supports using exactly s indices from ``star``.

    ``star`` and ``rest`` must be disjoint and sorted; output supports are
    sorted tuples, streamed in (star-part, rest-part) lexicographic order.
    """
    for inside in combinations(star, s):
        for outside in combinations(rest, k - s):
            yield tuple(sorted(inside + outside))


def overlap_level_count(k: int, p: int, s: int) -> int:
    """Number of size-k supports with overlap exactly s against a size-k set."""
    return comb(k, s) * comb(p - k, k - s)


def sample_support(rng: np.random.Generator, p: int, k: int) -> tuple[int, ...]:
    """One uniformly random size-k subset of range(p), sorted."""
    return tuple(np.sort(rng.permutation(p)[:k]).tolist())


def sample_overlap_support(
    rng: np.random.Generator, star: np.ndarray, rest: np.ndarray, s: int, k: int
) -> tuple[int, ...]:
    """One uniformly random size-k support with overlap exactly s."""
    inside = star[rng.permutation(star.size)[:s]]
    outside = rest[rng.permutation(rest.size)[: k - s]]
    return tuple(np.sort(np.concatenate([inside, outside])).tolist())
