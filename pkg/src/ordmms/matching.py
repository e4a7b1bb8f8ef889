"""
Maximum-cardinality envy-free matchings in agent/bundle acceptability graphs.

A matching is envy-free when no unmatched agent is adjacent to a matched
bundle. Starting from a maximum matching, every bundle adjacent to an
unmatched agent is discarded and its partner freed; repeating until nothing
changes leaves the largest envy-free matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable


@dataclass(frozen=True)
class AcceptabilityGraph:
    agents: tuple
    parts: tuple
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "edges", frozenset(self.edges))
        agents, parts = set(self.agents), set(self.parts)
        for a, p in self.edges:
            if a not in agents or p not in parts:
                raise ValueError(f"edge {(a, p)} references an unknown vertex")

    @classmethod
    def from_acceptance(cls, agents: Iterable[Hashable], parts: Iterable[Hashable], accepts) -> "AcceptabilityGraph":
        """Build the graph from a predicate ``accepts(agent, part)``."""
        agents, parts = tuple(agents), tuple(parts)
        return cls(agents, parts, frozenset((a, p) for a in agents for p in parts if accepts(a, p)))

    def neighbours(self) -> dict:
        adj: dict = {a: [] for a in self.agents}
        order = {p: k for k, p in enumerate(self.parts)}
        for a, p in self.edges:
            adj[a].append(p)
        for a in adj:
            adj[a].sort(key=order.__getitem__)
        return adj


def maximum_matching(g: AcceptabilityGraph) -> dict:
    """Augmenting-path maximum matching; agents and parts scanned in their given order."""
    adj = g.neighbours()
    owner: dict = {}

    def augment(a, seen: set) -> bool:
        for p in adj[a]:
            if p in seen:
                continue
            seen.add(p)
            if p not in owner or augment(owner[p], seen):
                owner[p] = a
                return True
        return False

    for a in g.agents:
        augment(a, set())
    return {a: p for p, a in owner.items()}


def envy_free_matching(g: AcceptabilityGraph) -> set:
    """Largest matching in which no unmatched agent is adjacent to a matched part."""
    adj = g.neighbours()
    matched = maximum_matching(g)
    owner = {p: a for a, p in matched.items()}
    discarded: set = set()
    changed = True
    while changed:
        changed = False
        for a in g.agents:
            if a in matched:
                continue
            for p in adj[a]:
                if p in discarded:
                    continue
                discarded.add(p)
                if p in owner:
                    del matched[owner.pop(p)]
                    changed = True
    return set(matched.items())


def is_envy_free(g: AcceptabilityGraph, matching: Iterable[tuple]) -> bool:
    matching = set(matching)
    agents = [a for a, _ in matching]
    parts = [p for _, p in matching]
    if len(set(agents)) != len(agents) or len(set(parts)) != len(parts):
        return False
    if not matching <= g.edges:
        return False
    matched_agents, matched_parts = set(agents), set(parts)
    return not any(a not in matched_agents and p in matched_parts for a, p in g.edges)
