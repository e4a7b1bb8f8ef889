"""
Named instances used in docs, tests and the CLI.

Values with an ε are integerized: everything is multiplied by 1000 and ε
becomes 1, so all comparisons stay exact in integers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Instance


def _lone_divider_trap(n: int = 4) -> Instance:
    # 2n-3 goods at 1-ε and 2n-3 at ε, identical for every agent
    row = [999] * (2 * n - 3) + [1] * (2 * n - 3)
    return Instance.from_rows([row] * n)


def _balanced_trap(n: int = 6, ell: int = 2) -> Instance:
    # ℓn-1 pairs (1-ε, ε), one pair (1-ℓnε, ℓnε), n/2-2 pairs (1/2, 1/2); listed best-first
    k = ell * n
    row = [999] * (k - 1) + [1000 - k] + [500] * (2 * (n // 2 - 2)) + [k] + [1] * (k - 1)
    return Instance.from_rows([row] * n)


def _scaling_trap() -> Instance:
    row = [999] * 30 + [30]
    return Instance.from_rows([row] * 20)


def _worked_example() -> Instance:
    return Instance.from_rows(
        [
            [10, 8, 6, 3, 2, 1],
            [12, 7, 6, 5, 4, 2],
            [9, 8, 7, 4, 3, 1],
        ]
    )


@dataclass(frozen=True)
class BalancedTrap:
    """Where the first divider's unacceptable, 2-balanced bundle sits (ordered positions)."""

    n: int = 6
    ell: int = 2

    @property
    def divider_bundle(self) -> frozenset[int]:
        k = self.ell * self.n
        low_start = k + 2 * (self.n // 2 - 2) + 1
        # ℓ-1 top goods, the 1-ℓnε good, every ε good
        return frozenset(range(self.ell - 1)) | {k - 1} | frozenset(range(low_start, low_start + k - 1))

    @property
    def threshold(self) -> int:
        return 1000 * self.ell

    @property
    def d(self) -> int:
        return self.ell * self.n + self.n // 2 - 2


FIXTURES = {
    "example-3.2": _lone_divider_trap,
    "example-4.7": _balanced_trap,
    "appendix-B": _scaling_trap,
    "example-5.1": _worked_example,
}


def fixture_names() -> list[str]:
    return sorted(FIXTURES)


def load_fixture(name: str) -> Instance:
    key = name[:-5] if name.endswith(".json") else name
    try:
        return FIXTURES[key]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(fixture_names())}") from None
