"""
Simulation campaigns on random instances.

``experiment_ordinal`` compares the greedy lower bound on the
ℓ-out-of-⌊(ℓ+½)n⌋ maximin share with the best known multiplicative factor
3/4 + 1/(12n) of the proportional share. ``experiment_thresholds`` pits
bidirectional against unidirectional bag-filling, with thresholds set per
agent by clone simulation or as a common fraction of proportionality.

Every trial draws from its own seed, derived from (seed, n, m, trial), so
results do not depend on the worker count or on the order trials run in.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import Instance, order_instance
from .covering import (
    bidirectional_bag_filling,
    bidirectional_oracle,
    cover_share,
    unidirectional_bag_filling,
    unidirectional_oracle,
)
from .lone_divider import ordinal_d
from .mms import greedy_partition

CSV_HEADER = ("n", "m", "param", "metric", "value")

METHODS = {
    "bidirectional": (bidirectional_bag_filling, bidirectional_oracle),
    "unidirectional": (unidirectional_bag_filling, unidirectional_oracle),
}


@dataclass(frozen=True)
class Distribution:
    kind: str
    a: int
    b: int = 0

    def __post_init__(self):
        if self.kind == "uniform":
            if self.a > self.b:
                raise ValueError(f"uniform needs lo <= hi, got {self.a} > {self.b}")
            if self.a < 0:
                raise ValueError("valuations must be non-negative")
        elif self.kind == "geometric":
            if self.a < 1:
                raise ValueError(f"geometric mean must be >= 1, got {self.a}")
        else:
            raise ValueError(f"unknown distribution {self.kind!r}")

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "Distribution":
        return cls("uniform", lo, hi)

    @classmethod
    def geometric(cls, mean: int) -> "Distribution":
        return cls("geometric", mean)

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """``uniform:LO:HI`` or ``geometric:MEAN``."""
        kind, *args = text.split(":")
        try:
            nums = [int(x) for x in args]
        except ValueError:
            raise ValueError(f"bad distribution {text!r}") from None
        if kind == "uniform" and len(nums) == 2:
            return cls.uniform(*nums)
        if kind == "geometric" and len(nums) == 1:
            return cls.geometric(nums[0])
        raise ValueError(f"bad distribution {text!r}; use uniform:LO:HI or geometric:MEAN")

    def __str__(self) -> str:
        return f"uniform:{self.a}:{self.b}" if self.kind == "uniform" else f"geometric:{self.a}"

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "uniform":
            return rng.integers(self.a, self.b, size=size, endpoint=True)
        # numpy's geometric counts trials, so its support already starts at 1
        return rng.geometric(1.0 / self.a, size=size)


def gen_instance(n: int, m: int, dist: Distribution, seed) -> Instance:
    """Random instance with i.i.d. valuations; ``seed`` is an int or a SeedSequence."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    return Instance.from_rows(dist.sample(rng, (n, m)).tolist())


def trial_seed(seed: int, n: int, m: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, n, m, trial])


@dataclass
class ExperimentReport:
    rows: list[tuple] = field(default_factory=list)

    def add(self, n, m, param, metric, value) -> None:
        self.rows.append((n, m, param, metric, float(value)))

    def get(self, n, m, param, metric) -> float:
        for r in self.rows:
            if r[:4] == (n, m, param, metric):
                return r[4]
        raise KeyError((n, m, param, metric))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for n, m, param, metric, value in self.rows:
            w.writerow((n, m, param, metric, f"{value:.6f}"))
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def write_svg(self, path, title: str = "") -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        matplotlib.rcParams["svg.hashsalt"] = "ordmms"
        series: dict = {}
        for n, m, param, metric, value in self.rows:
            if metric in ("mean", "min_of_means", "baseline"):
                key = (param if metric != "baseline" else "3/4+1/(12n)", metric, n)
                series.setdefault(key, []).append((m, value))
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for (param, metric, n), pts in sorted(series.items()):
            pts.sort()
            style = "--" if metric == "baseline" else "-"
            ax.plot([p[0] for p in pts], [p[1] for p in pts], style, label=f"{param} {metric} n={n}")
        ax.set_xlabel("m (goods)")
        ax.set_ylabel("ratio to proportional share")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=6)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _cells(ns, ms) -> list[tuple[int, int]]:
    # ``ms`` may be a fixed list or a function of n
    out = []
    for n in ns:
        for m in (ms(n) if callable(ms) else ms):
            if m >= 1:
                out.append((n, m))
    return out


def parse_grid(text: str, n: int | None = None) -> list[int]:
    """Comma-separated integers and ranges ``a-b`` or ``a-b/step``.

    A trailing ``n`` multiplies by the agent count: ``4n-80n/4n`` is
    4n, 8n, ..., 80n.
    """

    def num(tok: str) -> int:
        tok = tok.strip()
        if tok.endswith("n"):
            if n is None:
                raise ValueError(f"{text!r} refers to n but no n is given")
            return int(tok[:-1] or 1) * n
        return int(tok)

    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        step = 1
        if "/" in part:
            part, st = part.split("/", 1)
            step = num(st)
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(num(a), num(b) + 1, step))
        else:
            out.append(num(part))
    if not out:
        raise ValueError(f"empty grid {text!r}")
    return out


def _run(tasks: list, fn, workers: int) -> list:
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _ratio(value, total, n) -> float:
    if total == 0:
        return 1.0
    return float(Fraction(value * n, total))


def _ordinal_trial(task) -> dict:
    n, m, ells, dist, seed, trial = task
    inst = gen_instance(n, m, dist, trial_seed(seed, n, m, trial))
    out = {}
    for ell in ells:
        d = ordinal_d(ell, n)
        out[ell] = [_ratio(greedy_partition(inst.row(i), ell, d).value, inst.total(i), n) for i in range(n)]
    return out


def experiment_ordinal(
    ns: Iterable[int],
    ms,
    ells: Sequence[int],
    dist: Distribution,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ExperimentReport:
    """Greedy ordinal share over proportional share, per (n, m, ℓ) cell."""
    cells = _cells(ns, ms)
    ells = tuple(ells)
    tasks = [(n, m, ells, dist, seed, t) for n, m in cells for t in range(trials)]
    results = _run(tasks, _ordinal_trial, workers)
    report = ExperimentReport()
    for c, (n, m) in enumerate(cells):
        chunk = results[c * trials:(c + 1) * trials]
        for ell in ells:
            ratios = [r for res in chunk for r in res[ell]]
            report.add(n, m, f"ell={ell}", "mean", np.mean(ratios))
            report.add(n, m, f"ell={ell}", "min", min(ratios))
        report.add(n, m, "multiplicative", "baseline", 0.75 + 1 / (12 * n))
    return report


def _fill(method: str, ordered: Instance, thresholds) -> tuple[list, bool]:
    """Values received and whether every agent reached its threshold."""
    filling, _ = METHODS[method]
    res = filling(ordered, thresholds)
    got = [0] * ordered.n
    for a, b in res.filled:
        got[a] = sum(ordered.row(a)[g] for g in b)
    ok = all(got[i] >= thresholds[i] for i in range(ordered.n))
    return got, ok


def individual_thresholds(ordered: Instance, method: str) -> list[int]:
    _, oracle = METHODS[method]
    return [cover_share(ordered.row(i), ordered.n, oracle).value for i in range(ordered.n)]


def common_ratio(ordered: Instance, method: str, resolution: int = 1000) -> tuple[Fraction, list, bool]:
    """Largest t (in steps of 1/resolution) such that every agent gets t·v_i(M)/n.

    Searches t in [0, n] by bisection. Success need not be monotone in t, so
    the result is the bisection's answer, always a success point.
    """
    n = ordered.n
    totals = [ordered.total(i) for i in range(n)]

    def attempt(p):
        th = [Fraction(p * totals[i], resolution * n) for i in range(n)]
        return _fill(method, ordered, th)

    lo, hi = 0, resolution * n + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if attempt(mid)[1]:
            lo = mid
        else:
            hi = mid
    got, ok = attempt(lo)
    return Fraction(lo, resolution), got, ok


def _threshold_trial(task) -> dict:
    n, m, dist, seed, trial, mode = task
    inst = gen_instance(n, m, dist, trial_seed(seed, n, m, trial))
    ordered, _ = order_instance(inst)
    totals = [ordered.total(i) for i in range(n)]
    out = {}
    for method in METHODS:
        if mode == "individual":
            got, ok = _fill(method, ordered, individual_thresholds(ordered, method))
            t = None
        elif mode == "common":
            t, got, ok = common_ratio(ordered, method)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        out[method] = ([_ratio(got[i], totals[i], n) for i in range(n)], ok, t)
    return out


def experiment_thresholds(
    ns: Iterable[int],
    ms,
    trials: int,
    seed: int,
    mode: str = "individual",
    dist: Distribution = Distribution.uniform(0, 1000),
    workers: int = 1,
) -> ExperimentReport:
    """Bidirectional vs unidirectional bag-filling on ordered random instances.

    Reports, per (n, m, method): the minimum ratio of any agent, the mean ratio,
    the minimum over instances of the per-instance mean, and the fraction of
    instances in which every agent reached its threshold. Common mode also
    reports the mean common ratio found.
    """
    if mode not in ("individual", "common"):
        raise ValueError(f"unknown mode {mode!r}")
    cells = _cells(ns, ms)
    tasks = [(n, m, dist, seed, t, mode) for n, m in cells for t in range(trials)]
    results = _run(tasks, _threshold_trial, workers)
    report = ExperimentReport()
    for c, (n, m) in enumerate(cells):
        chunk = results[c * trials:(c + 1) * trials]
        for method in METHODS:
            per = [res[method] for res in chunk]
            ratios = [r for p in per for r in p[0]]
            report.add(n, m, method, "min", min(ratios))
            report.add(n, m, method, "mean", np.mean(ratios))
            report.add(n, m, method, "min_of_means", min(np.mean(p[0]) for p in per))
            report.add(n, m, method, "success", np.mean([p[1] for p in per]))
            if mode == "common":
                report.add(n, m, method, "common_ratio", np.mean([float(p[2]) for p in per]))
    return report
