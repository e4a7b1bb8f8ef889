"""
Instances, bundles and allocations for indivisible goods with additive valuations.

Also houses the two normalizations every solver in this package relies on:
ordering an instance (every agent ranks the goods in the same positional order)
and turning an allocation of the ordered instance back into an allocation of the
original goods through a picking sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

Bundle = frozenset  # frozenset[int] of good indices


def bundle(goods: Iterable[int] = ()) -> frozenset[int]:
    return frozenset(int(g) for g in goods)


@dataclass(frozen=True)
class Instance:
    """n agents, m goods, non-negative valuation matrix ``values[i][j]``."""

    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.values)
        if not rows:
            raise ValueError("an instance needs at least one agent")
        m = len(rows[0])
        for row in rows:
            if len(row) != m:
                raise ValueError("valuation rows have different lengths")
            for v in row:
                if v < 0:
                    raise ValueError(f"negative valuation {v}")
        object.__setattr__(self, "values", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Instance":
        return cls(tuple(tuple(int(v) for v in row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0])

    def row(self, agent: int) -> tuple[int, ...]:
        return self.values[agent]

    def total(self, agent: int) -> int:
        return sum(self.values[agent])

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "values": [list(r) for r in self.values]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        try:
            rows = data["values"]
        except (KeyError, TypeError):
            raise ValueError("instance JSON must be an object with a 'values' field") from None
        for row in rows:
            for v in row:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ValueError(f"valuations must be integers, got {v!r}")
        inst = cls.from_rows(rows)
        if "n" in data and data["n"] != inst.n:
            raise ValueError(f"'n' is {data['n']} but there are {inst.n} rows")
        if "m" in data and data["m"] != inst.m:
            raise ValueError(f"'m' is {data['m']} but rows have {inst.m} entries")
        return inst


def load_instance(path: str | Path) -> Instance:
    with open(path) as fh:
        return Instance.from_dict(json.load(fh))


def dump_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n")


@dataclass
class Allocation:
    """Per-agent bundles plus whatever was left unallocated."""

    bundles: dict[int, frozenset[int]]
    unallocated: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        seen: set[int] = set()
        for agent, b in self.bundles.items():
            if seen & b:
                raise ValueError(f"bundle of agent {agent} overlaps another bundle")
            seen |= b
        if seen & self.unallocated:
            raise ValueError("unallocated goods overlap allocated bundles")

    def goods(self) -> frozenset[int]:
        out: frozenset[int] = frozenset(self.unallocated)
        for b in self.bundles.values():
            out |= b
        return out

    def is_complete(self, m: int) -> bool:
        return self.goods() == frozenset(range(m))

    def values(self, inst: Instance) -> list[int]:
        return [bundle_value(inst, i, self.bundles.get(i, frozenset())) for i in range(inst.n)]

    def restrict(self, m: int) -> "Allocation":
        """Drop goods with index >= m (e.g. zero-valued dummies)."""
        keep = lambda b: frozenset(g for g in b if g < m)
        return Allocation({a: keep(b) for a, b in self.bundles.items()}, keep(self.unallocated))

    def to_dict(self) -> dict:
        return {
            "bundles": {str(a): sorted(b) for a, b in sorted(self.bundles.items())},
            "unallocated": sorted(self.unallocated),
        }


@dataclass(frozen=True)
class OrderingMaps:
    """``perms[i][p]`` is the original index of agent i's p-th most valuable good."""

    perms: tuple[tuple[int, ...], ...]


def bundle_value(inst: Instance, agent: int, b: Iterable[int]):
    row = inst.values[agent]
    return sum(row[g] for g in b)


def order_instance(inst: Instance) -> tuple[Instance, OrderingMaps]:
    """Sort each agent's row non-increasingly; equal values keep ascending index."""
    perms = []
    rows = []
    for row in inst.values:
        perm = tuple(sorted(range(len(row)), key=lambda j: (-row[j], j)))
        perms.append(perm)
        rows.append(tuple(row[j] for j in perm))
    return Instance(tuple(rows)), OrderingMaps(tuple(perms))


def unorder_allocation(alloc: Allocation, maps: OrderingMaps) -> Allocation:
    """Map an allocation of ordered positions back to original goods.

    Positions are processed as turns 0..m-1. The owner of position p takes its
    most preferred good (according to its ordering map) among those not yet
    taken. Unowned positions are skipped, and goods nobody picked stay
    unallocated. An agent owning positions p_1 < p_2 < ... always takes, at its
    r-th turn, a good at least as valuable as its p_r-th best, so its value can
    only go up.
    """
    owner: dict[int, int] = {}
    for agent, b in alloc.bundles.items():
        for p in b:
            if p in owner:
                raise ValueError(f"position {p} appears in two bundles")
            owner[p] = agent
    m = len(maps.perms[0]) if maps.perms else 0
    taken: set[int] = set()
    cursor = [0] * len(maps.perms)
    picked: dict[int, set[int]] = {a: set() for a in alloc.bundles}
    for p in range(m):
        agent = owner.get(p)
        if agent is None:
            continue
        perm = maps.perms[agent]
        c = cursor[agent]
        while perm[c] in taken:
            c += 1
        cursor[agent] = c + 1
        taken.add(perm[c])
        picked[agent].add(perm[c])
    return Allocation(
        {a: frozenset(g) for a, g in picked.items()},
        frozenset(range(m)) - frozenset(taken),
    )


def pad_with_dummies(inst: Instance, count: int) -> Instance:
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return inst
    return Instance(tuple(row + (0,) * count for row in inst.values))


def pad_to(inst: Instance, m: int) -> Instance:
    """Add zero-valued dummies until the instance has at least ``m`` goods."""
    return pad_with_dummies(inst, max(0, m - inst.m))
