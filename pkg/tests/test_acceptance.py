"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import itertools
import math
import random
import subprocess
import sys
import time

from oracles import brute_ef_size
from ordmms.core import Instance, order_instance
from ordmms.covering import (
    PrefixContainmentError,
    bbfs,
    bbfs_allocation,
    bbfs_allocation_detailed,
    bidirectional_bag_filling,
    cover_opt_exact,
)
from ordmms.experiments import Distribution, experiment_ordinal, experiment_thresholds
from ordmms.fixtures import BalancedTrap, load_fixture
from ordmms.lone_divider import BalancedGroups, is_l_balanced, ordinal_d, solve_ordinal_detailed
from ordmms.matching import AcceptabilityGraph, envy_free_matching, is_envy_free
from ordmms.mms import mms_exact, mms_of_values
from ordmms.responsive import counterexample_value, verify_counterexample, witness_partition


def property_family(seed: int, count: int):
    """n in 2..5, m in n..12, uniform(0, 20) valuations."""
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(2, 5)
        m = rng.randint(n, 12)
        yield Instance.from_rows([[rng.randint(0, 20) for _ in range(m)] for _ in range(n)])


def test_c1_worked_example(record):
    start = time.perf_counter()
    inst = load_fixture("example-5.1")
    thresholds = [bbfs(inst.row(i), 3).value for i in range(3)]
    alloc = bbfs_allocation(inst)
    bundles = [sorted(alloc.bundles[i]) for i in range(3)]
    values = alloc.values(inst)
    elapsed = time.perf_counter() - start
    ok = thresholds == [9, 11, 10] and bundles == [[0], [1, 4, 5], [2, 3]] and values == [10, 13, 11]
    ok = ok and elapsed < 1.0
    record(1, ok, f"thresholds {thresholds}, bundles {bundles}, values {values}, {elapsed:.3f}s")
    assert ok


def test_c2_ordinal_guarantee(record):
    start = time.perf_counter()
    violations, checked = [], 0
    for k, inst in enumerate(property_family(seed=2, count=500)):
        for ell in (1, 2):
            d = ordinal_d(ell, inst.n)
            sol = solve_ordinal_detailed(inst, ell)
            values = sol.allocation.values(inst)
            groups = BalancedGroups(inst.n, ell)
            for i in range(inst.n):
                share = mms_exact(inst, i, ell, d).value
                if values[i] < share:
                    violations.append((k, ell, i, values[i], share))
            for b in sol.ordered_allocation.bundles.values():
                if not is_l_balanced(b, groups):
                    violations.append((k, ell, "unbalanced", sorted(b)))
            checked += 1
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 300
    record(2, ok, f"{checked} runs (500 instances x ell in {{1,2}}), {len(violations)} violations, {elapsed:.1f}s")
    assert ok, violations[:5]


def test_c3_bbfs_guarantee(record):
    violations, fired = [], 0
    for k, inst in enumerate(property_family(seed=3, count=500)):
        try:
            sol = bbfs_allocation_detailed(inst, check_prefix=True)
        except PrefixContainmentError:
            fired += 1
            continue
        values = sol.allocation.values(inst)
        d = math.ceil(3 * inst.n / 2)
        if len(sol.allocation.bundles) != inst.n:
            violations.append((k, "not all served"))
        for i in range(inst.n):
            share = mms_exact(inst, i, 1, d).value
            if values[i] < share:
                violations.append((k, i, values[i], share))
    ok = not violations and fired == 0
    record(3, ok, f"500 instances, {len(violations)} violations, prefix check fired {fired} times")
    assert ok, violations[:5]


def test_c4_two_thirds_cover(record):
    rng = random.Random(4)
    violations, checked = [], 0
    while checked < 300:
        m = rng.randint(1, 12)
        row = [rng.randint(1, 30) for _ in range(m)]
        total = sum(row)
        t = rng.randint(1, max(1, total // 2))
        ordered, _ = order_instance(Instance.from_rows([row] * m))
        count = bidirectional_bag_filling(ordered, [t] * m).count
        opt = cover_opt_exact(row, t)
        if count < math.ceil(2 * (opt - 1) / 3):
            violations.append((row, t, count, opt))
        checked += 1
    record(4, not violations, f"{checked} identical-valuation instances, {len(violations)} violations")
    assert not violations, violations[:5]


def test_c5_sandwich(record):
    rng = random.Random(5)
    pool = [0, 1, 2, 3, 5, 8]
    vectors = [list(c) for m in range(0, 9) for c in itertools.combinations_with_replacement(pool, m)]
    vectors += [[rng.randint(0, 100) for _ in range(rng.randint(1, 8))] for _ in range(1000)]
    violations, checked = [], 0
    for values in vectors:
        for d in range(1, 6):
            for ell in range(1, min(3, d) + 1):
                lo = ell * mms_of_values(values, 1, d).value
                mid = mms_of_values(values, ell, d).value
                hi = ell * mms_of_values(values, 1, d - ell + 1).value
                if not lo <= mid <= hi:
                    violations.append((values, ell, d, lo, mid, hi))
                checked += 1
    detail = f"{checked} (values, ell, d) triples over {len(vectors)} value vectors, {len(violations)} violations"
    record(5, not violations, detail)
    assert not violations, violations[:5]


def _ef_agrees(rows, n_parts) -> bool:
    edges = {(a, p) for a, r in enumerate(rows) for p in range(n_parts) if r >> p & 1}
    g = AcceptabilityGraph(range(len(rows)), range(n_parts), edges)
    m = envy_free_matching(g)
    return is_envy_free(g, m) and len(m) == brute_ef_size(rows, n_parts)


def test_c6_envy_free_matching(record):
    labelled = multisets = sampled = 0
    bad = []
    for na in range(6):
        for np_ in range(6):
            if na * np_ <= 16:
                # every labelled graph
                for rows in itertools.product(range(1 << np_), repeat=na):
                    labelled += 1
                    if not _ef_agrees(rows, np_):
                        bad.append(rows)
            else:
                # every graph up to relabelling the agents
                for rows in itertools.combinations_with_replacement(range(1 << np_), na):
                    multisets += 1
                    if not _ef_agrees(rows, np_):
                        bad.append(rows)
    rng = random.Random(6)
    for size in (6, 7):
        for _ in range(1000):
            density = rng.random()
            rows = [sum(1 << p for p in range(size) if rng.random() < density) for _ in range(size)]
            sampled += 1
            if not _ef_agrees(rows, size):
                bad.append(rows)
    detail = (
        f"{labelled} labelled graphs, {multisets} agent-multisets (5+4, 4+5, 5+5), "
        f"{sampled} sampled 6+6/7+7, {len(bad)} disagreements"
    )
    record(6, not bad, detail)
    assert not bad, bad[:5]


def test_c7_responsive_counterexample(record):
    start = time.perf_counter()
    ok = verify_counterexample(2)
    witnesses = [
        counterexample_value(2, agent, b) for agent in (1, 2) for b in witness_partition(2, agent)
    ]
    elapsed = time.perf_counter() - start
    passed = ok and witnesses == [1, 1, 1, 1] and elapsed < 10
    record(7, passed, f"2^15 = 32768 bipartitions swept, witness values {witnesses}, {elapsed:.2f}s")
    assert passed


def test_c8_tightness_fixture(record):
    inst = load_fixture("example-4.7")
    trap = BalancedTrap()
    ordered, _ = order_instance(inst)
    row = ordered.row(0)
    b = trap.divider_bundle
    rest = [row[g] for g in range(len(row)) if g not in b]
    per_bundle = min(k for k in range(1, len(rest) + 1) if sum(sorted(rest, reverse=True)[:k]) >= trap.threshold)
    max_bundles = len(rest) // per_bundle
    ok = (
        mms_of_values(row, trap.ell, trap.d, max_goods=30).value == trap.threshold
        and is_l_balanced(b, BalancedGroups(trap.n, trap.ell))
        and sum(row[g] for g in b) < trap.threshold
        and len(rest) == 13
        and per_bundle >= 3
        and max_bundles <= 4 < trap.n - 1
        and cover_opt_exact(rest, trap.threshold) <= max_bundles
    )
    detail = f"{len(rest)} goods remain, >= {per_bundle} per acceptable bundle, <= {max_bundles} bundles < n-1 = {trap.n - 1}"
    record(8, ok, detail)
    assert ok


def test_c9_simulation_trends(record):
    start = time.perf_counter()
    dist = Distribution.uniform(1, 1000)
    ordinal = experiment_ordinal([4], [320], [1, 2], dist, trials=200, seed=9)
    r2 = ordinal.get(4, 320, "ell=2", "mean")
    r1 = ordinal.get(4, 320, "ell=1", "mean")
    ms = list(range(4, 101, 8))
    th = experiment_thresholds([4], ms, trials=200, seed=9, mode="individual", dist=dist)
    wins = sum(
        th.get(4, m, "bidirectional", "min_of_means") >= th.get(4, m, "unidirectional", "min_of_means")
        for m in ms
    )
    elapsed = time.perf_counter() - start
    baseline = 0.75 + 1 / 48
    ok = r2 > baseline and r1 < 0.75 and wins >= 0.95 * len(ms) and elapsed < 600
    detail = (
        f"ell=2 mean {r2:.4f} > {baseline:.4f}; ell=1 mean {r1:.4f} < 0.75; "
        f"bidirectional min-of-means wins {wins}/{len(ms)} cells; {elapsed:.1f}s"
    )
    record(9, ok, detail)
    assert ok


CLI_RUNS = [
    ["bbfs", "--in", "example-5.1"],
    ["solve", "--in", "example-5.1", "--ell", "1"],
    ["solve", "--in", "example-4.7", "--ell", "2", "--method", "greedy", "--format", "csv"],
    ["mms", "--in", "example-5.1", "--ell", "2", "--method", "bounds"],
    ["fixtures", "--name", "appendix-B"],
    ["simulate", "--experiment", "ordinal", "--ns", "4", "--ms", "4n-12n/4n", "--trials", "5", "--seed", "11"],
    ["simulate", "--experiment", "thresholds", "--ns", "3", "--ms", "3-9/3", "--trials", "5", "--seed", "11", "--mode", "common"],
]


def test_c10_cli_determinism(record, tmp_path):
    mismatched = []
    for k, argv in enumerate(CLI_RUNS):
        outputs = []
        for rep in range(2):
            out = tmp_path / f"{k}-{rep}.out"
            extra = ["--out", str(out)]
            if argv[0] == "simulate":
                extra += ["--svg", str(tmp_path / f"{k}-{rep}.svg")]
            subprocess.run([sys.executable, "-m", "ordmms", *argv, *extra], check=True, capture_output=True)
            blob = out.read_bytes()
            if argv[0] == "simulate":
                blob += (tmp_path / f"{k}-{rep}.svg").read_bytes()
            outputs.append(blob)
        if outputs[0] != outputs[1]:
            mismatched.append(" ".join(argv))
    record(10, not mismatched, f"{len(CLI_RUNS)} invocations run twice, {len(mismatched)} differ")
    assert not mismatched, mismatched
