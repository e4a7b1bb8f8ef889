"""
The Lone Divider protocol and the balanced divider strategy that gives every
agent its ℓ-out-of-⌊(ℓ+½)n⌋ maximin share.

All routines here work on *ordered* instances: position p is the p-th most
valuable good for every agent. The first ℓn positions form ℓ groups of n
goods each (group l holds positions l*n .. l*n+n-1); a bundle is ℓ-balanced
when it takes exactly one good from each of the first min(|B|, ℓ) groups.

The divider's construction, given k bundles already handed out (each
ℓ-balanced and unacceptable to the divider), runs in stages:

* stage 0 removes acceptable ℓ-tuples built from the top remaining good of
  every group;
* if few goods are worth more than half the witness cap, or stage 0 already
  produced at least n/2 bundles, plain bag-filling finishes the job;
* otherwise bags seeded with the cheapest group goods absorb the high-value
  goods outside the groups (stage 1), further bags are filled with the
  remainder sets of witness bundles (stage 2), and plain bag-filling ends the
  construction (stage 3).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core import Allocation, Instance, order_instance, pad_to, unorder_allocation
from .matching import AcceptabilityGraph, envy_free_matching
from .mms import (
    DEFAULT_MAX_GOODS,
    DegenerateValuation,
    MMSWitness,
    ScaledValuation,
    greedy_lower_bound,
    mms_exact,
    scale_values_to_mms,
)


class DividerError(RuntimeError):
    """The divider could not produce the partition it is guaranteed to find."""


@dataclass(frozen=True)
class BalancedGroups:
    n: int
    ell: int

    @property
    def groups(self) -> list[range]:
        return [range(l * self.n, (l + 1) * self.n) for l in range(self.ell)]

    def group_of(self, position: int) -> int | None:
        l = position // self.n
        return l if l < self.ell else None


@dataclass
class BagRecord:
    stage: str
    seeds: tuple[int, ...]
    goods: list[int]
    closing: object = None  # last good / remainder-set owner added before acceptance
    complete: bool = False


@dataclass
class DividerState:
    k: int
    allocated: list[frozenset[int]]
    remaining: frozenset[int]
    kprime: int | None = None
    case: str | None = None
    trace: list[BagRecord] = field(default_factory=list)


@dataclass
class HighValueAnalysis:
    h: int
    hplus: frozenset[int]
    hminus: frozenset[int]
    owner_bundle: dict[int, int]  # high good -> index of its witness bundle
    remainders: dict[int, frozenset[int]]
    remainder_values: dict[int, Fraction]


def is_l_balanced(b, groups: BalancedGroups) -> bool:
    size = len(b)
    if size == 0:
        return False
    counts = [0] * groups.ell
    for g in b:
        l = groups.group_of(g)
        if l is not None:
            counts[l] += 1
    for l, c in enumerate(counts):
        if c != (1 if l < size else 0):
            return False
    return True


def waste(sv: ScaledValuation, b) -> Fraction:
    return sv.value(b) - sv.ell


def high_value_analysis(sv: ScaledValuation, state: DividerState, groups: BalancedGroups) -> HighValueAnalysis:
    half = sv.cap / 2
    high = [g for g, v in enumerate(sv.values) if v > half]
    bundle_of = {}
    for idx, b in enumerate(sv.witness.partition):
        for g in b:
            bundle_of[g] = idx
    owner_bundle, remainders, rvalues = {}, {}, {}
    for g in high:
        idx = bundle_of[g]
        owner_bundle[g] = idx
        rest = sv.witness.partition[idx] - {g}
        remainders[g] = rest
        rvalues[g] = sv.value(rest)
    top = groups.n * groups.ell
    remaining = state.remaining
    return HighValueAnalysis(
        h=len(high),
        hplus=frozenset(g for g in high if g < top and g in remaining),
        hminus=frozenset(g for g in high if g >= top and g in remaining),
        owner_bundle=owner_bundle,
        remainders=remainders,
        remainder_values=rvalues,
    )


class _Bags:
    """Bundle construction bookkeeping shared by the stages."""

    def __init__(self, sv: ScaledValuation, state: DividerState, groups: BalancedGroups):
        self.sv = sv
        self.state = state
        self.need = groups.n - state.k
        self.done: list[list[int]] = []
        top = groups.n * groups.ell
        self.groups = [deque(sorted(g for g in rng if g in state.remaining)) for rng in groups.groups]
        for l, q in enumerate(self.groups):
            if len(q) != self.need:
                raise DividerError(
                    f"group {l} has {len(q)} remaining goods but {self.need} bundles are needed"
                )
        self.top = top
        self.low = [g for g in sorted(state.remaining) if g >= top]

    def full(self) -> bool:
        return len(self.done) >= self.need

    def top_tuple(self) -> list[int]:
        return [q[0] for q in self.groups]

    def take_top(self) -> tuple[int, ...]:
        return tuple(q.popleft() for q in self.groups)

    def take_bottom(self) -> tuple[int, ...]:
        return tuple(q.pop() for q in self.groups)

    def groups_left(self) -> int:
        return len(self.groups[0]) if self.groups else 0

    def value(self, goods) -> Fraction:
        return self.sv.value(goods)

    def accept(self, rec: BagRecord) -> None:
        rec.complete = True
        self.done.append(list(rec.seeds) + rec.goods)


def _plain_fill(bags: _Bags, stage: str, fillers: list[int], carry: BagRecord | None = None) -> None:
    """Seed with the cheapest remaining group goods; add fillers in position order."""
    ell = bags.sv.ell
    it = iter(fillers)
    while not bags.full():
        if carry is not None:
            rec, carry = carry, None
        else:
            if bags.groups_left() == 0:
                raise DividerError("ran out of group goods")
            rec = BagRecord(stage, bags.take_bottom(), [])
            bags.state.trace.append(rec)
        current = bags.value(rec.seeds) + bags.value(rec.goods)
        while current < ell:
            g = next(it, None)
            if g is None:
                raise DividerError(
                    f"stage {stage}: bag worth {current} < {ell} and no goods left to add "
                    f"({len(bags.done)} of {bags.need} bundles built)"
                )
            rec.goods.append(g)
            rec.closing = g
            current += bags.sv.values[g]
        bags.accept(rec)
    fillers[:] = list(it)


def balanced_partition(sv: ScaledValuation, state: DividerState, groups: BalancedGroups) -> list[frozenset[int]]:
    """Partition ``state.remaining`` into n - k ℓ-balanced bundles worth >= ℓ each.

    ``sv`` must be indexed by ordered position and come from a d-partition
    witness with d = floor((ℓ + 1/2) n). Records the stage-0 count in
    ``state.kprime``, the branch taken in ``state.case`` and every bag in
    ``state.trace``. Raises :class:`DividerError` if the construction fails.
    """
    ell = sv.ell
    n = groups.n
    bags = _Bags(sv, state, groups)

    # stage 0: the top tuple dominates every other tuple, so taking it while it
    # is acceptable exhausts all acceptable ℓ-tuples
    while not bags.full() and sum(sv.values[g] for g in bags.top_tuple()) >= ell:
        rec = BagRecord("0", bags.take_top(), [], closing=None)
        state.trace.append(rec)
        bags.accept(rec)
    state.kprime = state.k + len(bags.done)

    hv = high_value_analysis(sv, state, groups)
    if bags.full():
        state.case = "step0"
    elif hv.h <= ell * n or 2 * state.kprime >= n:
        state.case = "case1" if hv.h <= ell * n else "case2"
        _plain_fill(bags, "plain", bags.low)
    else:
        state.case = "case3"
        _high_value_fill(bags, hv)

    bundles = [frozenset(b) for b in bags.done]
    used = frozenset().union(*bundles)
    leftover = state.remaining - used
    if leftover:
        bundles[-1] = bundles[-1] | leftover
    return bundles


def _high_value_fill(bags: _Bags, hv: HighValueAnalysis) -> None:
    sv, state = bags.sv, bags.state
    ell = sv.ell

    # stage 1: absorb the high-value goods that lie outside the groups
    hminus = deque(sorted(hv.hminus))
    incomplete: BagRecord | None = None
    step1: list[BagRecord] = []
    while hminus and not bags.full():
        rec = BagRecord("1", bags.take_bottom(), [])
        state.trace.append(rec)
        current = bags.value(rec.seeds)
        while hminus and current < ell:
            g = hminus.popleft()
            rec.goods.append(g)
            rec.closing = g
            current += sv.values[g]
        if current >= ell:
            bags.accept(rec)
            step1.append(rec)
        else:
            incomplete = rec

    # stage 2: fill bags with the remainder sets owned by the group goods of the
    # earlier unacceptable bundles and by the goods of the stage-1 bundles
    owners = set()
    for b in state.allocated:
        owners.update(g for g in b if g < bags.top)
    for rec in step1:
        owners.update(rec.seeds)
        owners.update(rec.goods)
    gone = frozenset().union(*state.allocated) if state.allocated else frozenset()
    rsets = deque()
    for g in sorted(owners, key=lambda j: (hv.owner_bundle[j], j)):
        rest = hv.remainders[g] - gone
        if rest:
            rsets.append((g, sorted(rest)))
    used_low: set[int] = set()
    current_rec: BagRecord | None = None
    while not bags.full() and rsets:
        if current_rec is None:
            if incomplete is not None:
                current_rec, incomplete = incomplete, None
            elif bags.groups_left() > 0:
                current_rec = BagRecord("2", bags.take_bottom(), [])
                state.trace.append(current_rec)
            else:
                break
        current = bags.value(current_rec.seeds) + bags.value(current_rec.goods)
        while rsets and current < ell:
            owner, rest = rsets.popleft()
            current_rec.goods.extend(rest)
            used_low.update(rest)
            current_rec.closing = owner
            current += sv.value(rest)
        if current >= ell:
            bags.accept(current_rec)
            current_rec = None

    # stage 3: plain bag-filling with whatever low-value goods are left
    carry = current_rec if current_rec is not None else incomplete
    fillers = [g for g in bags.low if g not in used_low and g not in hv.hminus]
    if not bags.full():
        _plain_fill(bags, "3", fillers, carry=carry)


def lone_divider(
    values: Sequence[Sequence],
    thresholds: Sequence,
    divide: Callable[[int, frozenset, int, list], list],
) -> Allocation:
    """Run the Lone Divider protocol.

    ``values[i][g]`` is agent i's value for good g and ``thresholds[i]`` the
    value it must receive. ``divide(divider, remaining, count, allocated)``
    returns ``count`` disjoint bundles covering ``remaining``, each worth at
    least the divider's threshold; ``allocated`` lists the bundles handed out
    so far. The lowest-index remaining agent divides; acceptable bundles go out
    through a maximum envy-free matching and the rest recurse.
    """
    n = len(values)
    m = len(values[0]) if n else 0
    agents = list(range(n))
    remaining = frozenset(range(m))
    allocated: list[frozenset[int]] = []
    result: dict[int, frozenset[int]] = {}

    def worth(i, b):
        row = values[i]
        return sum(row[g] for g in b)

    while agents:
        divider = agents[0]
        parts = [frozenset(p) for p in divide(divider, remaining, len(agents), list(allocated))]
        if len(parts) != len(agents):
            raise DividerError(f"agent {divider} produced {len(parts)} parts, need {len(agents)}")
        covered: set[int] = set()
        for p in parts:
            if covered & p:
                raise DividerError(f"agent {divider} produced overlapping parts")
            covered |= p
        if covered != remaining:
            raise DividerError(f"agent {divider} did not partition the remaining goods")
        for p in parts:
            if worth(divider, p) < thresholds[divider]:
                raise DividerError(f"agent {divider} produced a part below its own threshold")
        graph = AcceptabilityGraph.from_acceptance(
            agents, range(len(parts)), lambda i, j: worth(i, parts[j]) >= thresholds[i]
        )
        matching = envy_free_matching(graph)
        if not matching:
            raise DividerError("empty envy-free matching")
        for i, j in sorted(matching):
            result[i] = parts[j]
            allocated.append(parts[j])
            remaining = remaining - parts[j]
        agents = [a for a in agents if a not in result]
    return Allocation(result, remaining)


def trivial_balanced_partition(remaining: frozenset[int], groups: BalancedGroups, count: int) -> list[frozenset[int]]:
    """Any ℓ-balanced partition: one good per group per bundle, the rest in the last bundle."""
    qs = [sorted(g for g in rng if g in remaining) for rng in groups.groups]
    bundles = [set(q[a] for q in qs) for a in range(count)]
    used = set().union(*bundles) if bundles else set()
    bundles[-1] |= set(remaining) - used
    return [frozenset(b) for b in bundles]


@dataclass
class OrdinalSolution:
    allocation: Allocation           # original goods (dummies removed)
    ordered_allocation: Allocation   # positions of the padded ordered instance
    shares: list                     # guaranteed value per agent in original units
    scaled: list                     # per-agent ordered ScaledValuation, None if degenerate
    ell: int
    d: int
    traces: list = field(default_factory=list)


def solve_with_witnesses(inst: Instance, ell: int, witnesses: Sequence, scaler) -> OrdinalSolution:
    """Shared driver: scale with the given witnesses, divide, un-order.

    ``witnesses[i]`` is passed to ``scaler(values_row, witness)`` which returns
    a ScaledValuation or raises DegenerateValuation. The instance must already
    have at least ℓn goods.
    """
    n = inst.n
    groups = BalancedGroups(n, ell)
    _, maps = order_instance(inst)
    scaled: list[ScaledValuation | None] = []
    for i in range(n):
        try:
            sv = scaler(inst.row(i), witnesses[i])
        except DegenerateValuation:
            scaled.append(None)
            continue
        scaled.append(sv.ordered()[0])
    zero_row = [Fraction(0)] * inst.m
    matrix = [sv.values if sv is not None else zero_row for sv in scaled]
    thresholds = [Fraction(ell) if sv is not None else Fraction(0) for sv in scaled]
    traces = []

    def divide(divider, remaining, count, allocated):
        sv = scaled[divider]
        if sv is None:
            return trivial_balanced_partition(remaining, groups, count)
        state = DividerState(k=n - count, allocated=allocated, remaining=remaining)
        parts = balanced_partition(sv, state, groups)
        traces.append((divider, state))
        return parts

    ordered_alloc = lone_divider(matrix, thresholds, divide)
    return OrdinalSolution(
        allocation=unorder_allocation(ordered_alloc, maps),
        ordered_allocation=ordered_alloc,
        shares=[],
        scaled=scaled,
        ell=ell,
        d=0,
        traces=traces,
    )


def ordinal_d(ell: int, n: int) -> int:
    """floor((ell + 1/2) n)."""
    return (2 * ell + 1) * n // 2


def solve_ordinal_detailed(
    inst: Instance, ell: int, method: str = "exact", max_goods: int = DEFAULT_MAX_GOODS
) -> OrdinalSolution:
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n, m = inst.n, inst.m
    d = ordinal_d(ell, n)
    padded = pad_to(inst, ell * n)
    if method == "exact":
        witnesses = [mms_exact(padded, i, ell, d, max_goods) for i in range(n)]
    elif method == "greedy":
        witnesses = [greedy_lower_bound(padded, i, ell, d) for i in range(n)]
    else:
        raise ValueError(f"unknown method {method!r}")
    sol = solve_with_witnesses(padded, ell, witnesses, lambda row, w: scale_values_to_mms(row, ell, d, w))
    sol.allocation = sol.allocation.restrict(m)
    sol.shares = [w.value for w in witnesses]
    sol.d = d
    return sol


def solve_ordinal(inst: Instance, ell: int, method: str = "exact", max_goods: int = DEFAULT_MAX_GOODS) -> Allocation:
    """Allocation giving every agent its ℓ-out-of-⌊(ℓ+½)n⌋ maximin share.

    ``method="greedy"`` replaces the exact shares by greedy-partition lower
    bounds, which keeps the run polynomial; each agent then gets at least its
    greedy bound.
    """
    return solve_ordinal_detailed(inst, ell, method, max_goods).allocation
