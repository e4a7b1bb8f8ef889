from fractions import Fraction

import numpy as np
import pytest

from ordmms.core import Instance, order_instance
from ordmms.experiments import (
    CSV_HEADER,
    Distribution,
    ExperimentReport,
    common_ratio,
    experiment_ordinal,
    experiment_thresholds,
    gen_instance,
    individual_thresholds,
    parse_grid,
)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution.uniform(5, 1)
    with pytest.raises(ValueError):
        Distribution.geometric(0)
    with pytest.raises(ValueError):
        Distribution("normal", 1)
    assert Distribution.parse("uniform:1:1000") == Distribution.uniform(1, 1000)
    assert Distribution.parse("geometric:1000") == Distribution.geometric(1000)
    assert str(Distribution.geometric(7)) == "geometric:7"
    with pytest.raises(ValueError):
        Distribution.parse("uniform:1")


def test_gen_instance_deterministic_and_in_range():
    d = Distribution.uniform(1, 1000)
    a = gen_instance(3, 50, d, 42)
    assert a == gen_instance(3, 50, d, 42)
    assert a != gen_instance(3, 50, d, 43)
    assert all(1 <= v <= 1000 for row in a.values for v in row)


def test_geometric_mean():
    rng = np.random.default_rng(0)
    draws = Distribution.geometric(1000).sample(rng, 10 ** 5)
    assert draws.min() >= 1
    assert abs(draws.mean() - 1000) < 50


def test_parse_grid():
    assert parse_grid("3-5") == [3, 4, 5]
    assert parse_grid("4,20") == [4, 20]
    assert parse_grid("4n-12n/4n", 2) == [8, 16, 24]
    assert parse_grid("1n-6/2", 3) == [3, 5]
    with pytest.raises(ValueError):
        parse_grid("4n")
    with pytest.raises(ValueError):
        parse_grid("")


def test_ordinal_identical_goods_ratio():
    # m = d identical goods: greedy gives one per part, ratio ell*n/d
    report = experiment_ordinal([4], [6], [1], Distribution.uniform(7, 7), trials=3, seed=0)
    assert report.get(4, 6, "ell=1", "mean") == pytest.approx(4 / 6)
    assert report.get(4, 6, "ell=1", "min") == pytest.approx(4 / 6)
    assert report.get(4, 6, "multiplicative", "baseline") == pytest.approx(0.75 + 1 / 48)


def test_common_ratio_two_agents_two_goods():
    ordered, _ = order_instance(Instance.from_rows([[1, 1], [1, 1]]))
    t, got, ok = common_ratio(ordered, "bidirectional")
    assert ok and t == Fraction(1) and got == [1, 1]


def test_individual_thresholds_are_met_by_bidirectional():
    inst = gen_instance(4, 30, Distribution.uniform(0, 1000), 5)
    ordered, _ = order_instance(inst)
    th = individual_thresholds(ordered, "bidirectional")
    from ordmms.covering import bidirectional_bag_filling

    res = bidirectional_bag_filling(ordered, th)
    assert res.count == 4
    for a, b in res.filled:
        assert sum(ordered.row(a)[g] for g in b) >= th[a]


@pytest.mark.parametrize("mode", ["individual", "common"])
def test_threshold_report_consistency(mode):
    report = experiment_thresholds([3], [3, 8], trials=6, seed=1, mode=mode)
    for m in (3, 8):
        for method in ("bidirectional", "unidirectional"):
            lo = report.get(3, m, method, "min")
            mid = report.get(3, m, method, "min_of_means")
            mean = report.get(3, m, method, "mean")
            assert 0 <= lo <= mid <= mean + 1e-12
            assert 0 <= report.get(3, m, method, "success") <= 1
    assert report.get(3, 8, "bidirectional", "success") == 1.0


def test_workers_do_not_change_results():
    kw = dict(trials=4, seed=9, mode="individual")
    a = experiment_thresholds([3], [5, 9], workers=1, **kw)
    b = experiment_thresholds([3], [5, 9], workers=2, **kw)
    assert a.to_csv() == b.to_csv()


def test_csv_and_svg(tmp_path):
    r = ExperimentReport()
    r.add(4, 16, "ell=1", "mean", 0.5)
    r.add(4, 32, "ell=1", "mean", 0.6)
    r.add(4, 16, "multiplicative", "baseline", 0.77)
    text = r.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert text.splitlines()[1] == "4,16,ell=1,mean,0.500000"
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    r.write_svg(p1)
    r.write_svg(p2)
    assert p1.read_bytes() == p2.read_bytes()
    with pytest.raises(ValueError):
        experiment_thresholds([3], [3], 1, 0, mode="bogus")
