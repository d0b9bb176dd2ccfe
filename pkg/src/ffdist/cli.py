"""Command-line front end.

Exit codes: 0 all assertable checks passed, 2 an assertable check was
violated, 3 configuration error, 4 budget exceeded on a fatal path.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .errors import BudgetExceededError, ConfigError
from .experiments import (
    CheckSpec,
    ExperimentConfig,
    GeneratorSpec,
    rows_to_csv,
    rows_to_json,
    run_experiment,
    threshold_scan,
)
from .theorems import threshold_exponent

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3, 4


def demo_config_path() -> Path:
    return Path(str(resources.files("ffdist") / "data" / "demo.json"))


def _add_set_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, required=True, help="odd prime modulus")
    parser.add_argument("--set", dest="explicit", help="explicit comma-separated members of A")
    parser.add_argument("--gen", choices=["ap", "random", "geo"], default="ap")
    parser.add_argument("--size", type=int, help="size of the generated set")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", choices=["json", "csv"], default="json")
    parser.add_argument("--jobs", type=int, default=1)


def _generator(args) -> GeneratorSpec:
    if args.explicit is not None:
        try:
            values = tuple(int(v) for v in args.explicit.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"--set must be a comma-separated list of integers: {args.explicit!r}")
        return GeneratorSpec("explicit", values=values)
    if args.size is None:
        raise ConfigError("give either --set or --size")
    return GeneratorSpec(args.gen, size=args.size, seed=args.seed)


def _lambda(text: str):
    return None if text == "all" else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffdist", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="does a sumset expression cover F_p?")
    _add_set_args(p)
    p.add_argument("--expr", required=True, help='e.g. "(A-A)^2 + A^2 x4" or "Δ(A^5)"')

    p = sub.add_parser("construct", help="incidence constructions behind the coverage theorems")
    p.add_argument("which", choices=["thm1", "thm14", "thm15"])
    _add_set_args(p)
    p.add_argument("--lambda", dest="lam", type=_lambda, default=None, help="all | <value>")

    p = sub.add_parser("bounds", help="exact quantities against the sumset/energy bounds")
    p.add_argument("which", choices=["thm2", "lemma-energy", "variants"])
    _add_set_args(p)

    p = sub.add_parser("incidence", help="fuzz the explicit-constant incidence bounds")
    p.add_argument("which", choices=["vinh", "hanson", "plane"])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=["json", "csv"], default="json")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("scan", help="empirical minimal set size for a coverage expression")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--gen", choices=["ap", "random", "geo"], default="random")
    p.add_argument("--expr", required=True)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run an experiment config (JSON)")
    p.add_argument("config", nargs="?", help="config path; omit with --demo")
    p.add_argument("--demo", action="store_true", help="run the bundled demo config")
    p.add_argument("--out", choices=["json", "csv"], default="csv", help="format written to stdout")
    p.add_argument("--csv-out", help="also write CSV here")
    p.add_argument("--json-out", help="also write JSON here")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int, help="override the master seed")

    p = sub.add_parser("exponent", help="threshold exponent for product sets in dimension d >= 6")
    p.add_argument("--d", type=int, required=True)
    return parser


def _single_cell(args, check: CheckSpec, gen: GeneratorSpec) -> ExperimentConfig:
    return ExperimentConfig(primes=(args.p,), generators=(gen,), checks=(check,),
                            trials=getattr(args, "trials", 1), master_seed=args.seed, jobs=args.jobs)


def _emit(rows, fmt: str) -> None:
    sys.stdout.write(rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows))


def _exit_code(rows, fatal_errors: bool) -> int:
    if any(r.status == "violation" for r in rows):
        return EXIT_VIOLATION
    if fatal_errors:
        for r in rows:
            if r.status == "error":
                budget = r.detail.get("error_kind") == "budget"
                label = "budget exceeded" if budget else "configuration error"
                print(f"{label}: {r.verdict}", file=sys.stderr)
                return EXIT_BUDGET if budget else EXIT_CONFIG
    return EXIT_OK


def _run(args) -> int:
    if args.command == "exponent":
        eps, exponent = threshold_exponent(args.d)
        print(json.dumps({"d": args.d, "eps": str(eps), "exponent": str(exponent),
                          "exponent_float": float(exponent)}))
        return EXIT_OK

    if args.command == "scan":
        result = threshold_scan(args.p, args.gen, args.expr, args.trials, args.seed)
        print(json.dumps(result.to_json(), indent=1))
        return EXIT_OK

    if args.command == "run":
        if args.demo == bool(args.config):
            raise ConfigError("give exactly one of a config path or --demo")
        config = ExperimentConfig.load(demo_config_path() if args.demo else args.config)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        if overrides:
            config = dataclasses.replace(config, **overrides)
        rows = list(run_experiment(config))
        csv_path = args.csv_out or config.csv_path
        json_path = args.json_out or config.json_path
        if csv_path:
            Path(csv_path).write_text(rows_to_csv(rows), encoding="utf-8")
        if json_path:
            Path(json_path).write_text(rows_to_json(rows), encoding="utf-8")
        _emit(rows, args.out)
        return _exit_code(rows, fatal_errors=False)

    if args.command == "incidence":
        check = CheckSpec("incidence-fuzz", fuzz=args.which, samples=args.samples)
        gen = GeneratorSpec("ap", size=1)
    else:
        gen = _generator(args)
        if args.command == "coverage":
            check = CheckSpec("coverage", expr=args.expr)
        elif args.command == "construct":
            check = CheckSpec(args.which, lam=args.lam)
        else:
            check = CheckSpec(args.which)
    rows = list(run_experiment(_single_cell(args, check, gen)))
    _emit(rows, args.out)
    return _exit_code(rows, fatal_errors=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
