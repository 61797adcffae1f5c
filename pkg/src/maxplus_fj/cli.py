"""Command-line entry point: ``maxplus-fj simulate | bounds | verify``.

Exit codes: 0 success, 1 property failure, 2 usage or input error.
The default seed can be overridden with the ``MAXPLUS_FJ_SEED`` variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import (DEFAULT_CONFIDENCE, DEFAULT_REPLICATIONS, DEFAULT_SAMPLES, bounds_report,
                       estimate_gamma, estimate_limit_matrix, matrix_to_json, network_key,
                       simulate_replications)
from .network import NetworkError, compile_network, load_spec
from .oracle import run_suite

SEED_ENV = "MAXPLUS_FJ_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _load(path: str):
    if not os.path.isfile(path):
        raise UsageError(f"network spec not found: {path}")
    try:
        return compile_network(load_spec(path))
    except NetworkError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse_x0(text: str | None, n: int):
    if text is None:
        return None
    try:
        x0 = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--x0 must be a comma-separated list of numbers, got {text!r}") from None
    if len(x0) != n or not all(np.isfinite(x0)):
        raise UsageError(f"--x0 needs {n} finite values")
    return x0


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _network_doc(net) -> dict:
    return {"n": net.n, "p": net.p, "key": network_key(net)}


def _limit_doc(limit) -> dict:
    return {
        "mean": matrix_to_json(limit.mean),
        "stderr": matrix_to_json(limit.stderr),
        "offset_mean": matrix_to_json(limit.offset_mean),
        "offset_stderr": matrix_to_json(limit.offset_stderr),
        "drift": limit.drift if np.isfinite(limit.drift) else None,
    }


def cmd_simulate(args) -> int:
    net = _load(args.spec)
    x0 = _parse_x0(args.x0, net.n)
    runs = simulate_replications(net, args.horizon, args.replications, args.seed, x0=x0,
                                 track_product=True, workers=args.workers)
    gamma = estimate_gamma(net, args.horizon, seed=args.seed, confidence=args.confidence, runs=runs)
    limit = estimate_limit_matrix(net, args.horizon, seed=args.seed, runs=runs)
    doc = {
        "config": {"command": "simulate", "spec": args.spec, "horizon": args.horizon,
                   "replications": args.replications, "seed": args.seed, "x0": x0,
                   "confidence": args.confidence},
        "network": _network_doc(net),
        "gamma": gamma.to_dict(),
        "limit_matrix": _limit_doc(limit),
    }
    if args.trace_csv:
        with open(args.trace_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "mean"] + [f"rep{r}" for r in range(len(runs))])
            rg = np.stack([r.running_gamma() for r in runs], axis=1)
            for k, row in enumerate(rg, start=1):
                w.writerow([k, repr(float(row.mean()))] + [repr(float(v)) for v in row])
    _emit(doc, args.out)
    return 0


def cmd_bounds(args) -> int:
    net = _load(args.spec)
    gamma = limit = None
    if args.horizon:
        runs = simulate_replications(net, args.horizon, args.replications, args.seed,
                                     track_product=True, workers=args.workers)
        gamma = estimate_gamma(net, args.horizon, seed=args.seed, runs=runs)
        limit = estimate_limit_matrix(net, args.horizon, seed=args.seed, runs=runs)
    report = bounds_report(net, gamma, limit, samples=args.samples, seed=args.seed, workers=args.workers)
    doc = {
        "config": {"command": "bounds", "spec": args.spec, "samples": args.samples, "seed": args.seed,
                   "horizon": args.horizon, "replications": args.replications if args.horizon else None},
        "network": _network_doc(net),
        "bounds": report.to_dict(),
    }
    if gamma is not None:
        doc["gamma"] = gamma.to_dict()
        doc["limit_matrix"] = _limit_doc(limit)
    _emit(doc, args.out)
    return 0


def cmd_verify(args) -> int:
    summary = run_suite(args.trials, args.seed, workers=args.workers, inject=args.inject_failure)
    doc = {"config": {"command": "verify", "trials": args.trials, "seed": args.seed,
                      "inject_failure": args.inject_failure},
           **summary.to_dict()}
    _emit(doc, args.out)
    if not summary.all_passed:
        print("property failures; counterexamples:", file=sys.stderr)
        print(json.dumps(summary.counterexamples, indent=2), file=sys.stderr)
        return 1
    return 0


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxplus-fj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=default_seed)
        p.add_argument("--workers", type=_positive, default=1,
                       help="worker threads; results do not depend on it")
        p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("simulate", help="estimate the cycle time by simulation")
    p.add_argument("spec")
    p.add_argument("--horizon", type=_positive, default=10_000)
    p.add_argument("--replications", type=_positive, default=DEFAULT_REPLICATIONS)
    p.add_argument("--confidence", type=float, default=DEFAULT_CONFIDENCE)
    p.add_argument("--x0", help="initial departure vector, comma separated (default zeros)")
    p.add_argument("--trace-csv", help="write running ||x(k)||/k per epoch as CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="lower and upper bounds on the cycle time")
    p.add_argument("spec")
    p.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES)
    p.add_argument("--horizon", type=_positive, default=None,
                   help="also simulate with this horizon and compare against the bounds")
    p.add_argument("--replications", type=_positive, default=DEFAULT_REPLICATIONS)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the randomized property suite")
    p.add_argument("--trials", type=_positive, default=1000)
    p.add_argument("--inject-failure", action="store_true", help=argparse.SUPPRESS)
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
        args = parser.parse_args(argv)
        if getattr(args, "confidence", 0.5) <= 0 or getattr(args, "confidence", 0.5) >= 1:
            parser.error("--confidence must lie in (0, 1)")
        return args.func(args)
    except UsageError as exc:
        print(f"maxplus-fj: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"maxplus-fj: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
