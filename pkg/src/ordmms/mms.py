"""
Maximin shares: exact ℓ-out-of-d values, cheap bounds, and the normalization
that rescales an agent so that a given d-partition becomes an exact witness.

>>> mms_of_values([10, 10, 10, 5], ell=2, d=4).value
15
>>> mms_of_values([10, 10, 10, 5], ell=1, d=4).value
5
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Instance

DEFAULT_MAX_GOODS = 16


class InstanceTooLarge(ValueError):
    """Raised when an exhaustive routine is asked to handle too many goods."""


class DegenerateValuation(ValueError):
    """The agent's share is zero, so every bundle is acceptable to it."""


@dataclass(frozen=True)
class MMSWitness:
    value: int | Fraction
    partition: tuple[frozenset[int], ...]

    def bundle_values(self, values: Sequence) -> list:
        return [sum(values[g] for g in b) for b in self.partition]


@dataclass(frozen=True)
class ScaledValuation:
    """One agent's normalized valuation.

    ``values[g]`` is the rescaled (and possibly reduced) value of good g.
    Every witness bundle is worth at most ``ell - x``; the ``ell - 1`` cheapest
    witness bundles add up to ``x``; any ``ell`` witness bundles are worth at
    least ``ell`` together.
    """

    values: tuple[Fraction, ...]
    ell: int
    x: Fraction
    witness: MMSWitness

    @property
    def cap(self) -> Fraction:
        return self.ell - self.x

    def value(self, goods) -> Fraction:
        return sum((self.values[g] for g in goods), Fraction(0))

    def ordered(self) -> tuple["ScaledValuation", tuple[int, ...]]:
        """Re-index goods by descending scaled value (ties: lower index first).

        Returns the re-indexed valuation and ``perm`` with ``perm[p]`` the
        original good at position p.
        """
        perm = tuple(sorted(range(len(self.values)), key=lambda g: (-self.values[g], g)))
        pos = {g: p for p, g in enumerate(perm)}
        witness = MMSWitness(
            self.witness.value,
            tuple(frozenset(pos[g] for g in b) for b in self.witness.partition),
        )
        return (
            ScaledValuation(tuple(self.values[g] for g in perm), self.ell, self.x, witness),
            perm,
        )


def _check_params(ell: int, d: int) -> None:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if d < ell:
        raise ValueError(f"d must be >= ell, got d={d}, ell={ell}")


def _sum_smallest(sums, ell):
    return sum(sorted(sums)[:ell])


def _waterfill_bound(sorted_sums: list[int], rest: int, ell: int, count: int) -> int:
    """Largest possible sum of the ell smallest parts if ``rest`` were divisible.

    ``rest`` is carried by ``count`` goods, so at most ``count`` parts can grow;
    raising the lowest parts to a common level is the best use of it.
    """
    d = len(sorted_sums)
    limit = min(d, count)
    if limit == 0:
        return sum(sorted_sums[:ell])
    prefix = 0
    for k in range(1, limit + 1):
        prefix += sorted_sums[k - 1]
        if k == d or (prefix + rest) <= sorted_sums[k] * k:
            break
    # the k lowest parts end at level (prefix + rest) / k, the others unchanged
    if k < d and (prefix + rest) > sorted_sums[k] * k:
        # capped by the number of goods: the raised parts overtake higher ones
        level = Fraction(prefix + rest, k)
        merged = sorted([level] * k + sorted_sums[k:])
        return math.floor(sum(merged[:ell]))
    if ell <= k:
        return (ell * (prefix + rest)) // k
    return prefix + rest + sum(sorted_sums[k:ell])


def _lpt(values: Sequence[int], d: int) -> tuple[list[int], list[list[int]]]:
    """Greedy number partitioning: largest good first into the lightest part."""
    heap = [(0, p) for p in range(d)]
    parts: list[list[int]] = [[] for _ in range(d)]
    sums = [0] * d
    for g in sorted(range(len(values)), key=lambda j: (-values[j], j)):
        s, p = heapq.heappop(heap)
        parts[p].append(g)
        sums[p] = s + values[g]
        heapq.heappush(heap, (sums[p], p))
    return sums, parts


def mms_of_values(
    values: Sequence[int], ell: int, d: int, max_goods: int = DEFAULT_MAX_GOODS
) -> MMSWitness:
    """Exact ℓ-out-of-d maximin share of a single valuation row.

    Depth-first search that assigns goods in descending value to d parts.
    Parts with equal running sums are interchangeable, so only one of them is
    tried; states already expanded are skipped; a water-filling relaxation
    bounds what a subtree can still reach. Zero-valued goods do not affect any
    part sum and are attached to the first part afterwards.
    """
    _check_params(ell, d)
    goods = [j for j in sorted(range(len(values)), key=lambda j: (-values[j], j)) if values[j] > 0]
    zeros = [j for j in range(len(values)) if values[j] == 0]
    if len(goods) > max_goods:
        raise InstanceTooLarge(
            f"{len(goods)} positive goods exceed the exact-search cap of {max_goods}"
        )
    vals = [int(values[j]) for j in goods]
    total = sum(vals)
    ceiling = ell * total // d
    suffix = [0] * (len(vals) + 1)
    for i in range(len(vals) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + vals[i]

    seed_sums, seed_parts = _lpt(vals, d)
    best = _sum_smallest(seed_sums, ell)
    best_assign = [0] * len(vals)
    for p, part in enumerate(seed_parts):
        for i in part:
            best_assign[i] = p

    sums = [0] * d
    assign = [0] * len(vals)
    visited: set = set()

    def dfs(i: int) -> bool:
        nonlocal best, best_assign
        if i == len(vals):
            val = _sum_smallest(sums, ell)
            if val > best:
                best = val
                best_assign = assign[:]
            return best >= ceiling
        ordered = sorted(sums)
        key = (i, tuple(ordered))
        if key in visited:
            return False
        visited.add(key)
        if _waterfill_bound(ordered, suffix[i], ell, len(vals) - i) <= best:
            return False
        tried = set()
        v = vals[i]
        for p in range(d):
            s = sums[p]
            if s in tried:
                continue
            tried.add(s)
            sums[p] = s + v
            assign[i] = p
            if dfs(i + 1):
                return True
            sums[p] = s
        return False

    if best < ceiling:
        dfs(0)

    parts: list[set[int]] = [set() for _ in range(d)]
    for i, p in enumerate(best_assign):
        parts[p].add(goods[i])
    parts[0].update(zeros)
    return MMSWitness(best, tuple(frozenset(p) for p in parts))


def mms_exact(
    inst: Instance, agent: int, ell: int, d: int, max_goods: int = DEFAULT_MAX_GOODS
) -> MMSWitness:
    """ℓ-out-of-d maximin share of ``agent`` together with an optimal d-partition."""
    return mms_of_values(inst.row(agent), ell, d, max_goods=max_goods)


def mms_bounds(
    inst: Instance, agent: int, ell: int, d: int, max_goods: int = DEFAULT_MAX_GOODS
) -> tuple[int, int]:
    """``(ell * MMS^{1,d}, ell * MMS^{1,d-ell+1})``, which bracket MMS^{ell,d}."""
    _check_params(ell, d)
    lower = ell * mms_exact(inst, agent, 1, d, max_goods).value
    upper = ell * mms_exact(inst, agent, 1, d - ell + 1, max_goods).value
    return lower, upper


def greedy_partition(values: Sequence[int], ell: int, d: int) -> MMSWitness:
    if d < 1:
        raise ValueError("d must be >= 1")
    sums, parts = _lpt(values, d)
    return MMSWitness(_sum_smallest(sums, ell), tuple(frozenset(p) for p in parts))


def greedy_lower_bound(inst: Instance, agent: int, ell: int, d: int) -> MMSWitness:
    """Lower bound on MMS^{ell,d} from greedy number partitioning (ties to the lowest part)."""
    return greedy_partition(inst.row(agent), ell, d)


def proportional_share(inst: Instance, agent: int) -> Fraction:
    return Fraction(inst.total(agent), inst.n)


def _flatten(scaled: list[Fraction], partition, cap: Fraction) -> None:
    # lower goods, most valuable first, until each bundle is worth at most cap
    for b in partition:
        excess = sum((scaled[g] for g in b), Fraction(0)) - cap
        if excess <= 0:
            continue
        for g in sorted(b, key=lambda j: (-scaled[j], j)):
            dec = min(excess, scaled[g])
            scaled[g] -= dec
            excess -= dec
            if excess == 0:
                break


def scale_to_mms(inst: Instance, agent: int, ell: int, d: int, witness: MMSWitness) -> ScaledValuation:
    """Rescale so that ``witness`` certifies a share of exactly ell.

    Values are multiplied by ell / witness.value. With x the total of the
    ell - 1 cheapest witness bundles, every witness bundle worth more than
    ell - x is then lowered to exactly ell - x.
    """
    return scale_values_to_mms(inst.row(agent), ell, d, witness)


def scale_values_to_mms(values: Sequence[int], ell: int, d: int, witness: MMSWitness) -> ScaledValuation:
    _check_params(ell, d)
    if len(witness.partition) != d:
        raise ValueError(f"witness has {len(witness.partition)} parts, expected {d}")
    if witness.value <= 0:
        raise DegenerateValuation("witness value is zero")
    factor = Fraction(ell) / Fraction(witness.value)
    scaled = [Fraction(v) * factor for v in values]
    bundle_sums = sorted(sum((scaled[g] for g in b), Fraction(0)) for b in witness.partition)
    if sum(bundle_sums[:ell]) != ell:
        raise ValueError("witness value does not match its partition")
    x = sum(bundle_sums[: ell - 1], Fraction(0))
    _flatten(scaled, witness.partition, ell - x)
    return ScaledValuation(tuple(scaled), ell, x, MMSWitness(Fraction(ell), witness.partition))


def scale_to_cover(values: Sequence[int], ell: int, share: int, partition) -> ScaledValuation:
    """Rescale so that each bundle of a cover partition is worth exactly 1.

    Every bundle must be worth at least ``share`` before scaling.
    """
    if share <= 0:
        raise DegenerateValuation("cover share is zero")
    scaled = [Fraction(v, share) for v in values]
    for b in partition:
        if sum((scaled[g] for g in b), Fraction(0)) < 1:
            raise ValueError("a cover bundle is worth less than the share")
    _flatten(scaled, partition, Fraction(1))
    return ScaledValuation(
        tuple(scaled), ell, Fraction(ell - 1), MMSWitness(Fraction(ell), tuple(partition))
    )


def total_value_lower_bound(n: int, ell: int, x) -> Fraction:
    """Guaranteed total scaled value when d = floor((ell + 1/2) n)."""
    x = Fraction(x)
    return n * ell + (n - 1) * ell * (ell - 1 - x) + (n - 1) * (ell - x) / 2
