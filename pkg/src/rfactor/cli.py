"""Command-line driver: run verification suites, emit JSON reports.

Exit codes: 0 when every non-skipped check passes, 1 when any check fails,
2 for usage or IO errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exactnum import rat_from_str
from .verify import SuiteConfig, parse_mutate, report_to_json, run_suite

DEFAULT_SIZE_LIMIT = 50000

ORACLE_OPS = {
    "sl2": ("r1", "r2"),
    "sl3": ("r1", "r2", "r3", "r3-single"),
}

ORACLE_DEFAULT_CAP = {"sl2": 6, "sl3": 3}


def _pair_size(algebra: str, cap: int) -> int:
    """Number of two-site basis monomials at the given cap."""
    if algebra == "sl2":
        return (cap + 1) ** 2
    site = sum(
        1
        for b in range(cap // 2 + 1)
        for a in range(cap - 2 * b + 1)
        for c in range(cap - 2 * b - a + 1)
    )
    return site * site


def _add_common(sp, cap_default, trials_default):
    sp.add_argument("--cap", type=int, default=cap_default,
                    help="height truncation of the representation spaces")
    sp.add_argument("--trials", type=int, default=trials_default,
                    help="sampled parameter points per check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--check", action="append", metavar="NAME",
                    help="run only this check (repeatable)")
    sp.add_argument("--params", metavar="CSV",
                    help="explicit rational parameters, e.g. 1/2,1/3,0,1/5")
    sp.add_argument("--mutate", metavar="TAG",
                    help="inject an eigenvalue mutation, e.g. r1:1 or r2:b")
    sp.add_argument("--out", metavar="PATH",
                    help="write the JSON report here instead of stdout")
    sp.add_argument("--jobs", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rfactor",
        description="Exact verification of factorized rational R-operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("sl2", help="two-site sl2 suite"), 8, 20)
    _add_common(sub.add_parser("sl3", help="two-site sl3 suite"), 3, 10)
    _add_common(sub.add_parser("ybe", help="dense fundamental Yang-Baxter"), 2, 10)
    orc = sub.add_parser("oracle", help="independent linear-solve comparison")
    orc.add_argument("--algebra", required=True, choices=("sl2", "sl3"))
    orc.add_argument("--op", required=True,
                     help="which R-operator: r1, r2, r3, r3-single")
    _add_common(orc, None, 5)
    rpt = sub.add_parser("report", help="summarize an existing JSON report")
    rpt.add_argument("path")
    return parser


def _parse_params(parser, text):
    try:
        return tuple(rat_from_str(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        parser.error(f"bad --params: {e}")


def _make_config(parser, args) -> SuiteConfig:
    if args.command == "oracle":
        algebra = args.algebra
        if args.op not in ORACLE_OPS[algebra]:
            parser.error(
                f"--op for {algebra} must be one of {ORACLE_OPS[algebra]}"
            )
        checks = (f"oracle-{args.op}",)
        cap = args.cap if args.cap is not None else ORACLE_DEFAULT_CAP[algebra]
    else:
        algebra = args.command
        checks = tuple(args.check) if args.check else ()
        cap = args.cap
    if cap < 2:
        parser.error("--cap must be at least 2")
    if args.trials < 1:
        parser.error("--trials must be positive")
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        limit = int(os.environ.get("RFACTOR_SIZE_LIMIT", DEFAULT_SIZE_LIMIT))
    except ValueError:
        parser.error("RFACTOR_SIZE_LIMIT must be an integer")
    size = _pair_size("sl2" if algebra == "ybe" else algebra, cap)
    if size > limit:
        parser.error(
            f"cap {cap} needs a {size}-monomial basis, over the size limit "
            f"{limit} (RFACTOR_SIZE_LIMIT)"
        )
    params = _parse_params(parser, args.params) if args.params else None
    if params is not None and len(checks) != 1:
        parser.error("--params requires exactly one --check")
    mutate = None
    if args.mutate:
        if algebra not in ("sl2", "sl3") or args.command == "oracle":
            parser.error("--mutate applies to the sl2/sl3 suites only")
        try:
            mutate = parse_mutate(algebra, args.mutate)
        except ValueError as e:
            parser.error(str(e))
    try:
        return SuiteConfig(
            algebra=algebra,
            cap=cap,
            trials=args.trials,
            seed=args.seed,
            checks=checks,
            params=params,
            mutate=mutate,
            jobs=args.jobs,
        )
    except KeyError as e:
        parser.error(str(e.args[0]))


def _summary_line(check: dict) -> str:
    label = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[check["status"]]
    line = f"{label:<5} {check['name']} [{', '.join(check['params'])}]"
    if "witness" in check:
        w = check["witness"]
        line += f"  witness: {w['monomial']} -> {w['value']}"
    if check["status"] == "skipped" and check.get("reason"):
        line += f"  reason: {check['reason']}"
    return line


def _print_report(report) -> int:
    for check in report["checks"]:
        print(_summary_line(check))
    total = len(report["checks"])
    fails = sum(1 for c in report["checks"] if c["status"] == "fail")
    skips = sum(1 for c in report["checks"] if c["status"] == "skipped")
    print(
        f"{report['suite']}: {total} checks, {total - fails - skips} passed, "
        f"{fails} failed, {skips} skipped"
    )
    return 0 if report["all_passed"] else 1


def _cmd_report(path: str) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            report = json.load(fh)
        return _print_report(report)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"rfactor: cannot read report {path}: {e}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report":
        return _cmd_report(args.path)
    config = _make_config(parser, args)
    report = run_suite(config)
    text = report_to_json(report)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            print(f"rfactor: cannot write {args.out}: {e}", file=sys.stderr)
            return 2
        code = _print_report(report)
    else:
        code = _print_report(report)
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
