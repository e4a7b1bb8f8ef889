"""Brute-force reference implementations, independent of the package code."""

from __future__ import annotations

import random


def set_partitions(m: int, d: int):
    """Assignments of goods 0..m-1 to at most d unlabeled parts (restricted growth strings)."""

    def rec(i, assign, used):
        if i == m:
            yield tuple(assign)
            return
        for p in range(min(used + 1, d)):
            assign.append(p)
            yield from rec(i + 1, assign, max(used, p + 1))
            assign.pop()

    yield from rec(0, [], 0)


def brute_mms(values, ell: int, d: int) -> int:
    best = 0
    for assign in set_partitions(len(values), d):
        sums = [0] * d
        for g, p in enumerate(assign):
            sums[p] += values[g]
        best = max(best, sum(sorted(sums)[:ell]))
    return best


def brute_cover_opt(values, t: int) -> int:
    """Most disjoint nonempty bundles worth >= t each.

    Spare goods can join any bundle, so it is enough to scan set partitions
    and count the parts reaching t.
    """
    m = len(values)
    if t <= 0:
        return m
    best = 0
    for assign in set_partitions(m, m):
        sums = [0] * m
        for g, p in enumerate(assign):
            sums[p] += values[g]
        best = max(best, sum(1 for s in sums if s >= t))
    return best


def _perfect_into(rows, agents, ymask) -> bool:
    # can the agents be matched to distinct parts of ymask along their edges
    agents = list(agents)

    def rec(k, free):
        if k == len(agents):
            return True
        opts = rows[agents[k]] & free
        while opts:
            low = opts & -opts
            if rec(k + 1, free ^ low):
                return True
            opts ^= low
        return False

    return rec(0, ymask)


def brute_ef_size(rows, n_parts: int) -> int:
    """Size of a maximum envy-free matching; ``rows[a]`` is agent a's neighbourhood bitmask.

    A matching covering parts Y is envy-free iff the agents adjacent to Y are
    exactly the matched ones, so |N(Y)| = |Y| and N(Y) matches perfectly into Y.
    """
    best = 0
    for y in range(1 << n_parts):
        size = bin(y).count("1")
        if size <= best:
            continue
        adj = [a for a, r in enumerate(rows) if r & y]
        if len(adj) == size and _perfect_into(rows, adj, y):
            best = size
    return best


def random_rows(rng: random.Random, n: int, m: int, lo: int = 0, hi: int = 20):
    return [[rng.randint(lo, hi) for _ in range(m)] for _ in range(n)]
