"""
Two agents with responsive valuations for whom no allocation gives both their
1-out-of-d maximin share.

Goods are indexed 0..m-1 with m = 2^(d^2) - 1 and ranked best-first by index
for both agents. Family j (1-based) holds the bundles that contain a strict
majority of the first 2^j - 1 goods. Agent 1 values a bundle at 1 when it lies
in every family of some row ((i-1)d+1 .. id) of a d×d grid of families;
agent 2 uses the columns of the same grid. All other bundles are worth 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class MajorityFamily:
    j: int

    @property
    def prefix(self) -> int:
        return 2 ** self.j - 1

    @property
    def mask(self) -> int:
        return (1 << self.prefix) - 1

    def __contains__(self, b) -> bool:
        return bundle_in_family(_to_mask(b), self.j)


def _to_mask(b) -> int:
    if isinstance(b, int):
        return b
    mask = 0
    for g in b:
        mask |= 1 << g
    return mask


def bundle_in_family(mask: int, j: int) -> bool:
    prefix = (1 << (2 ** j - 1)) - 1
    return (mask & prefix).bit_count() >= 2 ** (j - 1)


def block(j: int) -> frozenset[int]:
    """Goods 2^(j-1)-1 .. 2^j-2 (0-based): disjoint, and a member of family j."""
    return frozenset(range(2 ** (j - 1) - 1, 2 ** j - 1))


def dominates(order: Sequence[int], x: Iterable[int], y: Iterable[int]) -> bool:
    """True iff ``y`` dominates ``x``: some injection maps every good of x to a
    distinct good of y that is ranked at least as high.

    ``order`` lists the goods best-first.

    >>> dominates([0, 1, 2], {2}, {0})
    True
    >>> dominates([0, 1, 2, 3], {0}, {1, 2})
    False
    """
    rank = {g: r for r, g in enumerate(order)}
    xs = sorted(rank[g] for g in x)
    ys = sorted(rank[g] for g in y)
    if len(xs) > len(ys):
        return False
    return all(yr <= xr for xr, yr in zip(xs, ys))


def goods_count(d: int) -> int:
    return 2 ** (d * d) - 1


def _rows(d: int, agent: int) -> list[list[int]]:
    if agent == 1:
        return [[(i - 1) * d + j for j in range(1, d + 1)] for i in range(1, d + 1)]
    if agent == 2:
        return [[(j - 1) * d + i for j in range(1, d + 1)] for i in range(1, d + 1)]
    raise ValueError(f"agent must be 1 or 2, got {agent}")


def counterexample_value(d: int, agent: int, b) -> int:
    """1 if bundle ``b`` (iterable of goods or bitmask) is acceptable to ``agent``, else 0."""
    m = goods_count(d)
    mask = _to_mask(b)
    if mask >> m:
        raise ValueError(f"bundle uses goods outside 0..{m - 1}")
    for row in _rows(d, agent):
        if all(bundle_in_family(mask, j) for j in row):
            return 1
    return 0


def witness_partition(d: int, agent: int) -> list[frozenset[int]]:
    """The d-partition certifying a 1-out-of-d share of 1 (unions of blocks)."""
    return [frozenset().union(*(block(j) for j in row)) for row in _rows(d, agent)]


def verify_counterexample(d: int) -> bool:
    """Exhaustively confirm the construction for ``d`` (only d <= 2 is tractable).

    Checks that both witness partitions give their agent value 1 in every
    bundle, and that every split of the goods into (A_1, A_2) leaves agent 1 or
    agent 2 below 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if d > 2:
        raise ValueError(f"d={d} needs 2^{goods_count(d)} bundles; only d <= 2 is supported")
    m = goods_count(d)
    for agent in (1, 2):
        parts = witness_partition(d, agent)
        if frozenset().union(*parts) != frozenset(range(m)) or sum(map(len, parts)) != m:
            return False
        if any(counterexample_value(d, agent, p) != 1 for p in parts):
            return False
    full = (1 << m) - 1
    acceptable1 = _acceptable_masks(d, 1)
    acceptable2 = _acceptable_masks(d, 2)
    for a1 in range(1 << m):
        if acceptable1(a1) and acceptable2(full ^ a1):
            return False
    return True


def _acceptable_masks(d: int, agent: int):
    rows = _rows(d, agent)
    prefixes = {j: ((1 << (2 ** j - 1)) - 1, 2 ** (j - 1)) for row in rows for j in row}

    def acceptable(mask: int) -> bool:
        for row in rows:
            for j in row:
                pm, need = prefixes[j]
                if (mask & pm).bit_count() < need:
                    break
            else:
                return True
        return False

    return acceptable


def consistency_violations(d: int, samples: int, seed: int) -> int:
    """Sample pairs X ⪯ Y and count those where some agent values X above Y.

    Y is built from X by moving each good to a weakly better unused good and
    possibly adding extra goods, so Y dominates X by construction.
    """
    rng = random.Random(seed)
    m = goods_count(d)
    order = list(range(m))
    bad = 0
    for _ in range(samples):
        x = {g for g in range(m) if rng.random() < rng.random()}
        y: set[int] = set()
        for g in sorted(x):
            choices = [h for h in range(g + 1) if h not in y]
            y.add(rng.choice(choices))
        y |= {g for g in range(m) if rng.random() < 0.1}
        assert dominates(order, x, y)
        for agent in (1, 2):
            if counterexample_value(d, agent, x) > counterexample_value(d, agent, y):
                bad += 1
    return bad
