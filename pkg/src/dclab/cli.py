"""Command-line entry point: ``dclab``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .catalog import (
    CHECKS,
    InstanceError,
    builtin_instance,
    builtin_names,
    dump_instance,
    generate_finite_dim_instance,
    load_instance,
    serialize,
)
from .report import InapplicableCheck, export_csv, run_report

EXIT_OK, EXIT_MISMATCH, EXIT_ERROR = 0, 1, 2


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("window is empty")
    return lo, hi


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return q


def _checks(text: str) -> list[str]:
    names = [c.strip() for c in text.split(",") if c.strip()]
    bad = [c for c in names if c not in CHECKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {', '.join(CHECKS)}")
    return names


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dclab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list built-in instances")

    show = sub.add_parser("show", help="print an instance as JSON")
    show.add_argument("name")

    run = sub.add_parser("run", help="run checks and write a report")
    run.add_argument("--instance", required=True, help="built-in name or path to an instance file")
    run.add_argument("--checks", type=_checks, help="comma-separated; default: the instance's expected checks")
    run.add_argument("--out", required=True)
    run.add_argument("--tol", type=_rational)
    run.add_argument("--max-n", type=int)
    run.add_argument("--k-max", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--targets", type=int)
    run.add_argument("--radius", type=_rational)
    run.add_argument("--window", type=_window, help="LO:HI, e.g. --window=-9:9")
    run.add_argument("--wall-time", action="store_true", help="record elapsed time (breaks byte-identical reruns)")

    exp = sub.add_parser("export-csv", help="coverage rows of a report as CSV")
    exp.add_argument("--report", required=True)
    exp.add_argument("--out", required=True)

    gen = sub.add_parser("gen-fd", help="write a finite-dimensional instance file")
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--out", required=True)
    return p


def _join_window(argv: list[str]) -> list[str]:
    # "--window -9:9" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--window":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--window={nxt}")
        else:
            out.append(tok)
    return out


def _resolve(name: str):
    if name in builtin_names():
        return builtin_instance(name)
    if Path(name).exists():
        return load_instance(name)
    raise InstanceError(f"{name!r} is neither a built-in instance nor a file")


def _run(args) -> int:
    inst = _resolve(args.instance)
    seed = args.seed
    env_seed = os.environ.get("DCLAB_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    overrides = {
        "tol": args.tol,
        "max_n": args.max_n,
        "k_max": args.k_max,
        "seed": seed,
        "targets": args.targets,
        "radius": args.radius,
        "window": args.window,
    }
    if args.radius is not None:
        overrides["radii"] = ()
    params = inst.params.replace(**overrides)
    inst = inst.with_params(params)
    echo = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items() if k != "func"}
    echo["DCLAB_SEED"] = env_seed
    report = run_report(inst, args.checks, args.out, wall_time=args.wall_time, cli=echo)
    for key, v in report.expectations.items():
        mark = "ok" if v["match"] else "MISMATCH"
        print(f"{key}: {v['actual']} (expected {v['expected']}) {mark}")
    for key, got in report.verdicts.items():
        if key not in report.expectations:
            print(f"{key}: {got}")
    return EXIT_OK if report.ok else EXIT_MISMATCH


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(_join_window(sys.argv[1:] if argv is None else list(argv)))
    try:
        if args.command == "catalog":
            for name in builtin_names():
                print(f"{name}\t{builtin_instance(name).description}")
            return EXIT_OK
        if args.command == "show":
            print(json.dumps(serialize(_resolve(args.name)), indent=2))
            return EXIT_OK
        if args.command == "run":
            return _run(args)
        if args.command == "export-csv":
            report = json.loads(Path(args.report).read_text())
            n = export_csv(report, args.out)
            print(f"{n} rows written to {args.out}")
            return EXIT_OK
        if args.command == "gen-fd":
            inst = generate_finite_dim_instance(args.dim)
            dump_instance(inst, args.out)
            print(f"{inst.name} written to {args.out}")
            return EXIT_OK
    except (InstanceError, InapplicableCheck, OSError, json.JSONDecodeError) as exc:
        print(f"dclab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
