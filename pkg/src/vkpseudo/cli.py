"""Command-line entry point: ``run``, ``attack-sweep`` and ``vectors``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import adversary, sim, vectors
from .errors import ScenarioError
from .scenario import load_scenario


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    rows, results = sim.run_scenario(scenario, keep_results=True)
    sim.emit_metrics(rows, args.out)
    if args.transcript:
        first = next((r for rs in results for r in rs), None)
        sim.emit_transcript(first.transcript if first else [], args.transcript)
    for row in rows:
        print(", ".join(f"{k}={row[k]}" for k in ("scheme", "k", "marked_fraction", "auth_success_rate",
                                                   "recovery_count", "imsi_exposure_count", "status")))
    return 0 if all(r["status"] == "ok" for r in rows) else 1


def cmd_attack_sweep(args) -> int:
    scheme = "static-baseline" if args.scheme == "baseline" else args.scheme
    rows = sim.estimate_rows(scheme, args.attack, args.k, args.marked, args.pool, args.rounds, args.trials, args.seed)
    sim.emit_metrics(rows, args.out, adversary.CSV_FIELDS)
    for row in rows:
        print(f"k={row['k']} marked={row['marked_fraction']} success={row['success_rate']:.4f} "
              f"[{row['ci_low']:.4f}, {row['ci_high']:.4f}]")
    return 0


def cmd_vectors(args) -> int:
    results, elapsed = vectors.run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else ""))
    print(f"{sum(r.passed for r in results)}/{len(results)} passed in {elapsed:.3f}s")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vkpseudo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file and write metrics CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--transcript")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("attack-sweep", help="Monte Carlo attack success over k and marked fraction")
    p.add_argument("--scheme", required=True, choices=["baseline", "static-baseline", "variable"])
    p.add_argument("--attack", required=True, choices=list(adversary.ATTACKS))
    p.add_argument("--k", type=_int_list, required=True, help="comma-separated list, e.g. 2,4,8")
    p.add_argument("--marked", type=_float_list, default=[0.0], help="comma-separated fractions")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pool", type=int, default=100)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack_sweep)

    p = sub.add_parser("vectors", help="check ZUC, Milenage and HMAC conformance vectors")
    p.set_defaults(func=cmd_vectors)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
