"""Command-line interface.

    rotodrum run <config> [--seed N] [--out DIR] [--threads K]
    rotodrum list-experiments
    rotodrum theory <formula> [key=value ...]

Exit codes: 0 = pass, 1 = acceptance failure, 2 = config error,
3 = numerical abort (e.g. a simultaneous-collision tie).
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, parse_config
from .errors import ParseError, RotodrumError, SimultaneousCollision, ValidationError
from .experiments import EXPERIMENT_SUMMARIES, run_experiment
from .theory import (
    ball_volume_ratio,
    mean_flight_large_d,
    mean_flight_time,
    rho0,
    stationary_density,
    v_star,
)

_THEORY_FORMULAS = {
    "mean_flight": (
        mean_flight_time,
        ("d", "ef", "mass", "omega", "rho"),
        "expected flight time between lateral-wall reflections",
    ),
    "density": (
        stationary_density,
        ("r", "d", "ef", "mass", "omega", "rho", "half_len"),
        "stationary position density at horizontal radius r",
    ),
    "vstar": (
        v_star,
        ("ef", "mass", "omega", "rho"),
        "maximum co-rotating speed (attained at the wall)",
    ),
    "rho0": (
        rho0,
        ("ef", "mass", "omega"),
        "inner forbidden radius for E_F < 0",
    ),
    "mean_flight_large_d": (
        mean_flight_large_d,
        ("ef", "mass", "omega", "rho", "d"),
        "large-dimension limit of the mean flight time",
    ),
    "ball_volume_ratio": (
        ball_volume_ratio,
        ("d",),
        "ratio of unit-ball volumes B(d)/B(d-1)",
    ),
}

_INT_PARAMS = {"d"}
_DEFAULTS = {"mass": 1.0, "half_len": 1.0}


def _theory_command(args) -> int:
    if args.formula not in _THEORY_FORMULAS:
        print(f"unknown formula {args.formula!r}; available:", file=sys.stderr)
        for name, (_, params, doc) in _THEORY_FORMULAS.items():
            print(f"  {name}({', '.join(params)})  -- {doc}", file=sys.stderr)
        return 2
    fn, param_names, _ = _THEORY_FORMULAS[args.formula]
    supplied = dict(_DEFAULTS)
    for tok in args.params:
        if "=" not in tok:
            print(f"expected key=value, got {tok!r}", file=sys.stderr)
            return 2
        key, _, raw = tok.partition("=")
        if key not in param_names:
            print(f"{args.formula} takes {param_names}, not {key!r}", file=sys.stderr)
            return 2
        supplied[key] = int(raw) if key in _INT_PARAMS else float(raw)
    missing = [p for p in param_names if p not in supplied]
    if missing:
        print(f"missing parameters: {', '.join(missing)}", file=sys.stderr)
        return 2
    try:
        value = fn(**{k: supplied[k] for k in param_names})
    except (ValueError, RotodrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(repr(float(value)))
    return 0


def _run_command(args) -> int:
    try:
        cfg = parse_config(args.config)
    except (ParseError, ValidationError) as exc:
        if isinstance(exc, ValidationError):
            for msg in exc.errors:
                print(f"config error: {msg}", file=sys.stderr)
        else:
            print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.values["threads"] = args.threads
    if args.perturb:
        cfg.values["perturb_on_tie"] = True
    try:
        report = run_experiment(cfg, out_dir=args.out)
    except SimultaneousCollision as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        print("hint: rerun with --perturb to jitter the initial state by 1e-9",
              file=sys.stderr)
        return 3
    except RotodrumError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    summary = {k: report[k] for k in ("experiment", "passed", "checks")}
    print(json.dumps(summary, indent=2, default=lambda o: o.item()))
    return 0 if report["passed"] else 1


def _list_command(_args) -> int:
    for name in EXPERIMENTS:
        print(f"{name:28s} {EXPERIMENT_SUMMARIES[name]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotodrum",
        description="rotating-drum particle experiments and closed-form checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config", help="path to a key-value or JSON config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=None, help="worker threads")
    p_run.add_argument(
        "--perturb", action="store_true",
        help="on a simultaneous-collision tie, perturb the initial state by 1e-9 and retry",
    )
    p_run.set_defaults(func=_run_command)

    p_list = sub.add_parser("list-experiments", help="list available experiments")
    p_list.set_defaults(func=_list_command)

    p_theory = sub.add_parser("theory", help="print closed-form values")
    p_theory.add_argument("formula", help="|".join(_THEORY_FORMULAS))
    p_theory.add_argument("params", nargs="*", help="key=value parameters")
    p_theory.set_defaults(func=_theory_command)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
