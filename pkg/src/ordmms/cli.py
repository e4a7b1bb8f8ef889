"""
Command-line entry point.

    ordmms mms --in inst.json --ell 2
    ordmms solve --in example-5.1 --ell 1
    ordmms bbfs --in example-5.1
    ordmms simulate --experiment ordinal --trials 200 --out report.csv
    ordmms verify-responsive --d 2
    ordmms fixtures [--name example-4.7]

``--in`` takes a JSON file ``{"n", "m", "values"}``; a name from the fixture
catalog works too when no such file exists. Output is JSON with sorted keys
unless ``--format csv`` is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .core import Instance, load_instance
from .covering import (
    bbfs,
    bbfs_allocation_detailed,
    ORACLES_BY_NAME as ORACLES,
    ell_approx_allocation_detailed,
)
from .experiments import Distribution, experiment_ordinal, experiment_thresholds, parse_grid
from .fixtures import fixture_names, load_fixture
from .lone_divider import DividerError, ordinal_d, solve_ordinal_detailed
from .mms import DEFAULT_MAX_GOODS, InstanceTooLarge, greedy_lower_bound, mms_bounds, mms_exact
from .responsive import goods_count, verify_counterexample


class CLIError(Exception):
    pass


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def read_instance(source: str | None) -> Instance:
    if source is None:
        raise CLIError("--in is required")
    if source == "-":
        return Instance.from_dict(json.load(sys.stdin))
    path = Path(source)
    if path.exists():
        return load_instance(path)
    try:
        return load_fixture(path.name)
    except KeyError:
        raise CLIError(f"no such file or fixture: {source}") from None


def _emit(args, payload: dict, table: list[list] | None = None) -> None:
    if args.format == "csv":
        if table is None:
            raise CLIError(f"{args.command} has no CSV form")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _agents(inst: Instance, agent: int | None) -> list[int]:
    if agent is None:
        return list(range(inst.n))
    if not 0 <= agent < inst.n:
        raise CLIError(f"agent {agent} out of range 0..{inst.n - 1}")
    return [agent]


def cmd_mms(args) -> None:
    inst = read_instance(args.input)
    d = args.d if args.d is not None else ordinal_d(args.ell, inst.n)
    out, table = {}, [["agent", "ell", "d", "method", "value", "upper"]]
    for i in _agents(inst, args.agent):
        if args.method == "exact":
            w = mms_exact(inst, i, args.ell, d, args.max_goods)
            out[str(i)] = {"value": w.value, "partition": sorted(sorted(b) for b in w.partition)}
            table.append([i, args.ell, d, "exact", w.value, ""])
        elif args.method == "greedy":
            w = greedy_lower_bound(inst, i, args.ell, d)
            out[str(i)] = {"value": w.value, "partition": sorted(sorted(b) for b in w.partition)}
            table.append([i, args.ell, d, "greedy", w.value, ""])
        else:
            lo, hi = mms_bounds(inst, i, args.ell, d, args.max_goods)
            out[str(i)] = {"lower": lo, "upper": hi}
            table.append([i, args.ell, d, "bounds", lo, hi])
    _emit(args, {"ell": args.ell, "d": d, "method": args.method, "agents": out}, table)


def _allocation_payload(inst: Instance, alloc, shares, extra: dict) -> tuple[dict, list]:
    values = alloc.values(inst)
    payload = dict(alloc.to_dict())
    payload["values"] = values
    payload["shares"] = [_num(s) for s in shares]
    payload.update(extra)
    table = [["agent", "value", "share", "bundle"]]
    for i in range(inst.n):
        b = " ".join(str(g) for g in sorted(alloc.bundles.get(i, ())))
        table.append([i, values[i], _num(shares[i]), b])
    return payload, table


def cmd_solve(args) -> None:
    inst = read_instance(args.input)
    if args.method in ("exact", "greedy"):
        sol = solve_ordinal_detailed(inst, args.ell, args.method, args.max_goods)
        extra = {"ell": args.ell, "d": sol.d, "method": args.method}
        payload, table = _allocation_payload(inst, sol.allocation, sol.shares, extra)
    elif args.method == "bbfs":
        if args.ell != 1:
            raise CLIError("--method bbfs works with --ell 1 only")
        sol = bbfs_allocation_detailed(inst)
        payload, table = _allocation_payload(
            inst, sol.allocation, sol.shares, {"ell": 1, "d": (3 * inst.n + 1) // 2, "method": "bbfs"}
        )
    elif args.method == "cover":
        sol = ell_approx_allocation_detailed(inst, args.ell, ORACLES[args.oracle])
        extra = {"ell": args.ell, "d": sol.d, "method": "cover", "oracle": args.oracle}
        payload, table = _allocation_payload(inst, sol.allocation, sol.shares, extra)
    else:
        raise CLIError(f"unknown method {args.method}")
    _emit(args, payload, table)


def cmd_bbfs(args) -> None:
    inst = read_instance(args.input)
    agents = _agents(inst, args.agent)
    shares = {i: bbfs(inst.row(i), inst.n) for i in agents}
    payload = {
        "thresholds": {str(i): s.value for i, s in shares.items()},
        "simulations": {str(i): [sorted(b) for b in s.witness.bundles()] for i, s in shares.items()},
    }
    table = [["agent", "threshold"]] + [[i, s.value] for i, s in shares.items()]
    if args.agent is None:
        sol = bbfs_allocation_detailed(inst)
        payload["allocation"] = sol.allocation.to_dict()
        payload["values"] = sol.allocation.values(inst)
    _emit(args, payload, table)


def cmd_simulate(args) -> None:
    if args.format == "json":
        raise CLIError("simulate writes CSV; drop --format json")
    dist = Distribution.parse(args.dist) if args.dist else None
    ns = parse_grid(args.ns) if args.ns else None
    if args.experiment == "ordinal":
        ns = ns or [4, 20]
        ms_text = args.ms or "4n-80n/4n"
        ells = parse_grid(args.ells) if args.ells else [1, 2, 3]
        report = experiment_ordinal(
            ns, lambda n: parse_grid(ms_text, n), ells, dist or Distribution.uniform(1, 1000),
            args.trials, args.seed, workers=args.workers,
        )
        title = f"ordinal share vs proportional ({dist or 'uniform:1:1000'})"
    else:
        ns = ns or list(range(3, 21))
        ms_text = args.ms or "1n-100"
        report = experiment_thresholds(
            ns, lambda n: parse_grid(ms_text, n), args.trials, args.seed, args.mode,
            dist or Distribution.uniform(0, 1000), workers=args.workers,
        )
        title = f"bag-filling, {args.mode} thresholds"
    text = report.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        report.write_svg(args.svg, title)


def cmd_verify_responsive(args) -> None:
    ok = verify_counterexample(args.d)
    payload = {"d": args.d, "goods": goods_count(args.d), "bipartitions": 2 ** goods_count(args.d), "verified": ok}
    if args.out:
        _emit(args, payload, [["d", "verified"], [args.d, ok]])
    else:
        print("verified" if ok else "NOT verified")
    if not ok:
        raise CLIError("counterexample check failed")


def cmd_fixtures(args) -> None:
    if args.name is None:
        _emit(args, {"fixtures": fixture_names()}, [["name"]] + [[n] for n in fixture_names()])
        return
    try:
        inst = load_fixture(args.name)
    except KeyError as exc:
        raise CLIError(exc.args[0]) from None
    _emit(args, inst.to_dict(), [[*row] for row in inst.values])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", metavar="PATH", help="instance JSON or fixture name")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"], default=None)

    p = argparse.ArgumentParser(prog="ordmms", description="Ordinal maximin-share allocation tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mms", parents=[common], help="maximin shares of one or all agents")
    s.add_argument("--agent", type=int)
    s.add_argument("--ell", type=int, default=1)
    s.add_argument("--d", type=int, help="default: floor((ell + 1/2) n)")
    s.add_argument("--method", choices=["exact", "greedy", "bounds"], default="exact")
    s.add_argument("--max-goods", type=int, default=DEFAULT_MAX_GOODS)
    s.set_defaults(func=cmd_mms)

    s = sub.add_parser("solve", parents=[common], help="compute an allocation")
    s.add_argument("--ell", type=int, default=1)
    s.add_argument(
        "--method", choices=["exact", "greedy", "bbfs", "cover"], default="exact",
        help="exact/greedy: balanced Lone Divider with exact or greedy shares; "
        "bbfs: bidirectional bag-filling; cover: cover-share pipeline",
    )
    s.add_argument("--oracle", choices=sorted(ORACLES), default="bidirectional")
    s.add_argument("--max-goods", type=int, default=DEFAULT_MAX_GOODS)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bbfs", parents=[common], help="bidirectional bag-filling shares and allocation")
    s.add_argument("--agent", type=int)
    s.set_defaults(func=cmd_bbfs)

    s = sub.add_parser("simulate", parents=[common], help="random-instance experiments (CSV)")
    s.add_argument("--experiment", choices=["ordinal", "thresholds"], required=True)
    s.add_argument("--dist", help="uniform:LO:HI or geometric:MEAN")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--ns", help="agent counts, e.g. 3-20 or 4,20")
    s.add_argument("--ms", help="good counts; a trailing n scales by n, e.g. 4n-80n/4n")
    s.add_argument("--ells", help="ell values for the ordinal experiment")
    s.add_argument("--mode", choices=["individual", "common"], default="individual")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--svg", metavar="PATH")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify-responsive", parents=[common], help="check the responsive-valuation counterexample")
    s.add_argument("--d", type=int, default=2)
    s.set_defaults(func=cmd_verify_responsive)

    s = sub.add_parser("fixtures", parents=[common], help="list fixtures or print one as JSON")
    s.add_argument("--name")
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CLIError, InstanceTooLarge, DividerError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"ordmms {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
