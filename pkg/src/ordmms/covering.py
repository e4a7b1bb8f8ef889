"""
Bag-filling, bin covering and the thresholds derived from them.

Bidirectional bag-filling seeds bag k with the k-th most valuable good and
tops it up with the least valuable remaining goods; unidirectional bag-filling
keeps adding the most valuable remaining goods instead. An agent's
bidirectional bag-filling share (BBFS) is the largest threshold at which n
clones of that agent fill n bags, and it is never below the agent's
1-out-of-⌈3n/2⌉ maximin share.

>>> bbfs([10, 8, 6, 3, 2, 1], 3).value
9
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import Allocation, Instance, order_instance, pad_to, unorder_allocation
from .lone_divider import OrdinalSolution, ordinal_d, solve_with_witnesses
from .mms import DEFAULT_MAX_GOODS, InstanceTooLarge, scale_to_cover


class PrefixContainmentError(AssertionError):
    """The global run consumed a good that some agent's own simulation had not."""


@dataclass(frozen=True)
class CoverResult:
    filled: tuple[tuple[int, frozenset[int]], ...]
    leftover: frozenset[int]

    @property
    def count(self) -> int:
        return len(self.filled)

    def bundles(self) -> list[frozenset[int]]:
        return [b for _, b in self.filled]


@dataclass(frozen=True)
class CoverShare:
    value: int
    witness: CoverResult
    partition: tuple[frozenset[int], ...]  # d bundles over the original goods


def _as_rows(values) -> list[Sequence]:
    if isinstance(values, Instance):
        return [list(r) for r in values.values]
    return [list(r) for r in values]


def _bag_filling(rows, thresholds, bidirectional: bool, observer=None) -> CoverResult:
    n = len(rows)
    m = len(rows[0]) if n else 0
    # unconsumed goods always form the contiguous block [left, right]
    left, right = 0, m - 1
    prefix = []
    for row in rows:
        acc = [0]
        for v in row:
            acc.append(acc[-1] + v)
        prefix.append(acc)
    agents = list(range(n))
    filled = []
    allocated: set[int] = set()
    while agents and left <= right:
        if observer is not None:
            observer(len(filled), frozenset(allocated), tuple(agents))
        rest = {i: prefix[i][right + 1] - prefix[i][left] for i in agents}
        if all(rest[i] < thresholds[i] for i in agents):
            break
        bag = [left]
        worth = {i: rows[i][left] for i in agents}
        left += 1
        while True:
            takers = [i for i in agents if worth[i] >= thresholds[i]]
            if takers:
                break
            if bidirectional:
                g, right = right, right - 1
            else:
                g, left = left, left + 1
            bag.append(g)
            for i in agents:
                worth[i] += rows[i][g]
        winner = takers[0]
        filled.append((winner, frozenset(bag)))
        allocated.update(bag)
        agents.remove(winner)
    return CoverResult(tuple(filled), frozenset(range(left, right + 1)))


def bidirectional_bag_filling(inst, thresholds: Sequence, observer=None) -> CoverResult:
    """Bag k starts with the leftmost unconsumed good, then takes goods from the right end.

    ``inst`` must be ordered (every row non-increasing). A full bag goes to the
    lowest-index remaining agent that accepts it. ``observer(round,
    allocated_goods, remaining_agents)`` is called before every round.
    """
    return _bag_filling(_as_rows(inst), thresholds, True, observer)


def unidirectional_bag_filling(inst, thresholds: Sequence, observer=None) -> CoverResult:
    """Like :func:`bidirectional_bag_filling` but bags are topped up from the left."""
    return _bag_filling(_as_rows(inst), thresholds, False, observer)


def _clone_fill(values: Sequence[int], t, bidirectional: bool) -> CoverResult:
    # unlimited clones of one agent with one threshold
    m = len(values)
    left, right = 0, m - 1
    rest = sum(values)
    filled = []
    while left <= right and rest >= t:
        bag = [left]
        worth = values[left]
        left += 1
        while worth < t:
            if bidirectional:
                g, right = right, right - 1
            else:
                g, left = left, left + 1
            bag.append(g)
            worth += values[g]
        rest -= worth
        filled.append((len(filled), frozenset(bag)))
    return CoverResult(tuple(filled), frozenset(range(left, right + 1)))


def bidirectional_oracle(values: Sequence[int], t) -> CoverResult:
    """Bin covering by bidirectional bag-filling; ``values`` sorted non-increasingly."""
    return _clone_fill(values, t, True)


def unidirectional_oracle(values: Sequence[int], t) -> CoverResult:
    return _clone_fill(values, t, False)


Oracle = Callable[[Sequence[int], int], CoverResult]

ORACLES_BY_NAME = {"bidirectional": bidirectional_oracle, "unidirectional": unidirectional_oracle}


def cover_share(values: Sequence[int], d: int, oracle: Oracle = bidirectional_oracle, search: str = "binary") -> CoverShare:
    """Largest integer threshold at which ``oracle`` fills at least d bins.

    The returned partition has d bundles over the original goods: the first
    d - 1 filled bags, then the d-th bag merged with every later bag and the
    leftover. ``search="linear"`` scans every threshold instead of bisecting,
    for auditing the monotonicity that bisection assumes.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    order = sorted(range(len(values)), key=lambda j: (-values[j], j))
    sv = [int(values[j]) for j in order] + [0] * max(0, d - len(values))
    total = sum(sv)

    def fills(t):
        return oracle(sv, t).count >= d

    if search == "binary":
        lo, hi = 0, total + 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if fills(mid):
                lo = mid
            else:
                hi = mid
    elif search == "linear":
        lo = next(t for t in range(total, -1, -1) if fills(t))
    else:
        raise ValueError(f"unknown search {search!r}")
    if not fills(lo) or fills(lo + 1):
        raise AssertionError(f"threshold {lo} is not a success/failure boundary")

    witness = oracle(sv, lo)
    m = len(values)
    bags = [frozenset(order[p] for p in b if p < m) for b in witness.bundles()]
    tail = frozenset(order[p] for p in witness.leftover if p < m)
    for b in bags[d:]:
        tail |= b
    partition = tuple(bags[: d - 1]) + (bags[d - 1] | tail,)
    mapped = CoverResult(
        tuple((a, frozenset(order[p] for p in b if p < m)) for a, b in witness.filled),
        frozenset(order[p] for p in witness.leftover if p < m),
    )
    return CoverShare(lo, mapped, partition)


def bbfs(values: Sequence[int], n: int, search: str = "binary") -> CoverShare:
    """1-out-of-n bidirectional bag-filling share of one valuation."""
    return cover_share(values, n, bidirectional_oracle, search)


@dataclass
class BBFSSolution:
    allocation: Allocation
    ordered: CoverResult
    shares: list[int]


def bbfs_allocation_detailed(inst: Instance, check_prefix: bool = True) -> BBFSSolution:
    n, m = inst.n, inst.m
    padded = pad_to(inst, n)
    ordered, maps = order_instance(padded)
    shares = [bbfs(ordered.row(i), n) for i in range(n)]
    thresholds = [s.value for s in shares]

    observer = None
    if check_prefix:
        # goods consumed before round k in each agent's own successful simulation
        prefixes = []
        for s in shares:
            acc, seen = [frozenset()], frozenset()
            for b in s.witness.bundles():
                seen = seen | b
                acc.append(seen)
            prefixes.append(acc)

        def observer(k, allocated, agents):
            for i in agents:
                sim = prefixes[i][min(k, len(prefixes[i]) - 1)]
                if not allocated <= sim:
                    raise PrefixContainmentError(
                        f"round {k}: goods {sorted(allocated - sim)} taken before agent {i}'s simulation took them"
                    )

    result = bidirectional_bag_filling(ordered, thresholds, observer)
    if result.count != n:
        raise RuntimeError(f"bag-filling served {result.count} of {n} agents")
    alloc = Allocation({a: b for a, b in result.filled}, result.leftover)
    return BBFSSolution(unorder_allocation(alloc, maps).restrict(m), result, thresholds)


def bbfs_allocation(inst: Instance) -> Allocation:
    """Every agent receives at least its BBFS, hence its 1-out-of-⌈3n/2⌉ maximin share."""
    return bbfs_allocation_detailed(inst).allocation


def cover_opt_exact(values: Sequence[int], t: int, max_goods: int = DEFAULT_MAX_GOODS) -> int:
    """Maximum number of disjoint bundles each worth at least t.

    Bundles are nonempty, so t <= 0 gives one bundle per good.
    """
    if t <= 0:
        return len(values)
    big = sum(1 for v in values if v >= t)
    small = sorted((v for v in values if 0 < v < t), reverse=True)
    if len(small) > max_goods:
        raise InstanceTooLarge(f"{len(small)} goods exceed the exact-search cap of {max_goods}")
    suffix = [0] * (len(small) + 1)
    for i in range(len(small) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + small[i]

    def feasible(c: int) -> bool:
        failed: set = set()

        def dfs(i: int, deficits: tuple) -> bool:
            if not deficits:
                return True
            if sum(deficits) > suffix[i]:
                return False
            key = (i, deficits)
            if key in failed:
                return False
            v = small[i]
            for k, need in enumerate(deficits):
                if k and need == deficits[k - 1]:
                    continue
                rest = deficits[:k] + deficits[k + 1:]
                if need > v:
                    rest = tuple(sorted(rest + (need - v,)))
                if dfs(i + 1, rest):
                    return True
            if dfs(i + 1, deficits):
                return True
            failed.add(key)
            return False

        return dfs(0, (t,) * c)

    c = suffix[0] // t
    while c > 0 and not feasible(c):
        c -= 1
    return big + c


def _two_thirds_power(x) -> float:
    r = round(float(x) ** (1 / 3))
    if r ** 3 == x:
        return float(r * r)
    return float(x) ** (2 / 3)


def js_bound(opt: int) -> float:
    """Bins guaranteed by the asymptotic bin-covering scheme ("JS"): OPT - 2.35 OPT^(2/3) - 1."""
    return float(opt - Fraction("2.35") * Fraction(_two_thirds_power(opt)) - 1)


def js_epsilon(s, t) -> float:
    """(13 t / s)^(1/3): the accuracy the JS scheme reaches at total size s and bin size t."""
    q = Fraction(13) * Fraction(t) / Fraction(s)
    num = round(q.numerator ** (1 / 3))
    den = round(q.denominator ** (1 / 3))
    if num ** 3 == q.numerator and den ** 3 == q.denominator:
        return num / den
    return float(q) ** (1 / 3)


def jss_guarantee_d(d: int) -> int:
    """⌈d + 15 d^(2/3) + 1⌉: the JS share is at least this 1-out-of-D maximin share."""
    return math.ceil(d + 15 * _two_thirds_power(d) + 1)


def approx_d(ell: int, n: int) -> int:
    """⌈d + 15 d^(2/3) + ℓ⌉ with d = ⌊(ℓ+½)n⌋: the ℓ-out-of-D guarantee with the JS oracle."""
    d = ordinal_d(ell, n)
    return math.ceil(d + 15 * _two_thirds_power(d) + ell)


def ell_approx_allocation_detailed(
    inst: Instance, ell: int, oracle: Oracle = bidirectional_oracle
) -> OrdinalSolution:
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n, m = inst.n, inst.m
    d = ordinal_d(ell, n)
    padded = pad_to(inst, ell * n)
    shares = [cover_share(padded.row(i), d, oracle) for i in range(n)]
    sol = solve_with_witnesses(
        padded, ell, shares, lambda row, cs: scale_to_cover(row, ell, cs.value, cs.partition)
    )
    sol.allocation = sol.allocation.restrict(m)
    sol.shares = [ell * s.value for s in shares]
    sol.d = d
    return sol


def ell_approx_allocation(inst: Instance, ell: int, oracle: Oracle = bidirectional_oracle) -> Allocation:
    """Each agent gets at least ℓ times its 1-out-of-⌊(ℓ+½)n⌋ cover share.

    The cover share comes from ``oracle``; each agent's cover partition is
    rescaled to bundles worth exactly 1 and fed to the balanced Lone Divider
    with threshold ℓ.
    """
    return ell_approx_allocation_detailed(inst, ell, oracle).allocation
