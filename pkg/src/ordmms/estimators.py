"""
scikit-learn style wrappers.

Each allocator is fitted on a valuation matrix ``V`` of shape
(n_agents, n_goods) with non-negative integer entries. After ``fit`` the
allocation is exposed as ``labels_`` (owner of every good, -1 when the good
is unallocated), ``bundles_``, ``values_`` and ``shares_``. ``transform``
evaluates the fitted bundles under a valuation matrix: entry (i, j) is agent
i's value for agent j's bundle.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .core import Allocation, Instance
from .covering import ORACLES_BY_NAME, bbfs_allocation_detailed, ell_approx_allocation_detailed
from .lone_divider import solve_ordinal_detailed
from .mms import DEFAULT_MAX_GOODS


def check_valuations(V) -> np.ndarray:
    V = check_array(V, dtype=None, ensure_min_features=0)
    if not np.issubdtype(V.dtype, np.number):
        raise ValueError("valuations must be numeric")
    if np.any(V < 0):
        raise ValueError("valuations must be non-negative")
    if not np.all(np.equal(np.mod(V, 1), 0)):
        raise ValueError("valuations must be integers")
    return V.astype(np.int64)


class _AllocatorBase(BaseEstimator):
    def _solve(self, inst: Instance):
        raise NotImplementedError

    def fit(self, V, y=None):
        V = check_valuations(V)
        inst = Instance.from_rows(V.tolist())
        alloc, shares = self._solve(inst)
        self.n_agents_, self.n_features_in_ = V.shape
        self.allocation_: Allocation = alloc
        self.bundles_ = [sorted(alloc.bundles.get(i, ())) for i in range(inst.n)]
        labels = np.full(inst.m, -1, dtype=np.int64)
        for i, b in alloc.bundles.items():
            labels[list(b)] = i
        self.labels_ = labels
        self.values_ = np.array(alloc.values(inst), dtype=np.int64)
        self.shares_ = list(shares)
        return self

    def fit_predict(self, V, y=None) -> np.ndarray:
        return self.fit(V).labels_

    def transform(self, V) -> np.ndarray:
        check_is_fitted(self, "labels_")
        V = check_valuations(V)
        if V.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} goods, got {V.shape[1]}")
        owners = np.zeros((self.n_features_in_, self.n_agents_))
        mask = self.labels_ >= 0
        owners[np.nonzero(mask)[0], self.labels_[mask]] = 1
        return V @ owners


class OrdinalMMSAllocator(_AllocatorBase):
    """Every agent gets its ℓ-out-of-⌊(ℓ+½)n⌋ maximin share (or its greedy bound)."""

    def __init__(self, ell: int = 1, method: str = "exact", max_goods: int = DEFAULT_MAX_GOODS):
        self.ell = ell
        self.method = method
        self.max_goods = max_goods

    def _solve(self, inst):
        sol = solve_ordinal_detailed(inst, self.ell, self.method, self.max_goods)
        return sol.allocation, sol.shares


class BBFSAllocator(_AllocatorBase):
    """Bidirectional bag-filling with per-agent shares; at least 1-out-of-⌈3n/2⌉ MMS."""

    def __init__(self, check_prefix: bool = True):
        self.check_prefix = check_prefix

    def _solve(self, inst):
        sol = bbfs_allocation_detailed(inst, self.check_prefix)
        return sol.allocation, sol.shares


class CoverShareAllocator(_AllocatorBase):
    """ℓ times the 1-out-of-⌊(ℓ+½)n⌋ cover share, from a pluggable bin-covering oracle."""

    def __init__(self, ell: int = 1, oracle: str = "bidirectional"):
        self.ell = ell
        self.oracle = oracle

    def _solve(self, inst):
        if self.oracle not in ORACLES_BY_NAME:
            raise ValueError(f"unknown oracle {self.oracle!r}")
        sol = ell_approx_allocation_detailed(inst, self.ell, ORACLES_BY_NAME[self.oracle])
        return sol.allocation, sol.shares
