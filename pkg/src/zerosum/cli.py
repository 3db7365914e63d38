"""Command line front end.  Exit status is 0 exactly when every verdict passes."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .harness import (DISTRIBUTIONS, OUT_ENV, SOLVERS, ExperimentSpec, SpecError,
                      compare_solvers, run_experiment, verify_gibbs, verify_poly)
from .oracles import ORACLE_KINDS

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _game_flags(p: argparse.ArgumentParser):
    p.add_argument("--spec", help="JSON run descriptor; explicit flags override its fields")
    p.add_argument("--game", help="payoff matrix CSV (first line 'm,n')")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--dist", choices=DISTRIBUTIONS)
    p.add_argument("--game-seed", type=int)
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--T", type=int, nargs="+", help="horizon (several values for a sweep)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--eps", type=float, help="target gap; picks T when --T is absent")
    p.add_argument("--eps-g", dest="eps_G", type=float, help="sampler TV error (default 1/T)")
    p.add_argument("--oracle", choices=ORACLE_KINDS)
    p.add_argument("--samples", dest="samples_per_round", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zerosum", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run trials of one solver on one game")
    _game_flags(p)

    p = sub.add_parser("sweep", help="convergence sweep over T, or the ledger-scaling sweep")
    p.add_argument("--kind", choices=("convergence", "ledger"), default="convergence")
    _game_flags(p)

    p = sub.add_parser("compare", help="paired-seed comparison of two solver setups")
    _game_flags(p)
    p.add_argument("--solver-b", choices=SOLVERS)
    p.add_argument("--oracle-b", choices=ORACLE_KINDS)
    p.add_argument("--lambda-b", dest="lam_b", type=float)
    p.add_argument("--eps-g-b", dest="eps_G_b", type=float)

    p = sub.add_parser("verify-gibbs", help="closed-form multi-Gibbs checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("verify-poly", help="polynomial approximant checks")
    p.add_argument("--out")
    return ap


def spec_from_args(args) -> ExperimentSpec:
    base = {}
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            base = json.load(fh)
    keys = ("game", "m", "n", "dist", "game_seed", "solver", "lam", "eps", "eps_G", "oracle",
            "samples_per_round", "seed", "trials", "workers", "out")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    if args.T is not None:
        if args.command == "sweep":
            base["Ts"] = args.T
        elif len(args.T) != 1:
            raise SpecError([f"--T takes one value for {args.command}, got {args.T}"])
        else:
            base["T"] = args.T[0]
    if "eps" in base and "T" not in base:
        base["T"] = None
    if args.command == "sweep":
        base["sweep"] = args.kind
    return ExperimentSpec.from_dict(base)


def _emit(report, out, name="report.json"):
    for v in report.verdicts:
        print(v.line())
    for note in report.notes:
        print(f"note: {note}")
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / name).write_text(report.dumps() + "\n")
        print(f"wrote {Path(out) / name}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    default_out = os.environ.get(OUT_ENV)
    try:
        if args.command == "verify-gibbs":
            report = verify_gibbs(seed=args.seed)
            _emit(report, args.out or default_out, "verify_gibbs.json")
        elif args.command == "verify-poly":
            report = verify_poly()
            _emit(report, args.out or default_out, "verify_poly.json")
        elif args.command == "compare":
            a = spec_from_args(args)
            b = ExperimentSpec.from_dict({**a.to_json(),
                                          "solver": args.solver_b or a.solver,
                                          "oracle": args.oracle_b or a.oracle,
                                          "lam": args.lam_b if args.lam_b is not None else a.lam,
                                          "eps_G": args.eps_G_b})
            cmp = compare_solvers(a, b)
            print(f"{'seed':>12} {'gap_a':>12} {'gap_b':>12} {'regret_a':>10} {'regret_b':>10} "
                  f"{'cost_a':>12} {'cost_b':>12}")
            for r in cmp.table:
                print(f"{r['seed']:>12} {r['gap_a']:>12.4e} {r['gap_b']:>12.4e} "
                      f"{r['regret_a']:>10.4f} {r['regret_b']:>10.4f} "
                      f"{r['cost_a']:>12} {r['cost_b']:>12}")
            print(f"median |gap_a - gap_b| = {cmp.median_gap_difference:.4e}")
            for v in cmp.a.verdicts + cmp.b.verdicts:
                print(v.line())
            out = a.out or default_out
            if out:
                Path(out).mkdir(parents=True, exist_ok=True)
                (Path(out) / "compare.json").write_text(
                    json.dumps(cmp.to_json(), indent=2, sort_keys=True) + "\n")
            return EXIT_OK if cmp.a.passed and cmp.b.passed else EXIT_FAIL
        else:
            spec = spec_from_args(args)
            report = run_experiment(spec)
            agg = report.aggregate
            if "gap" in agg:
                print(f"T={agg['T']} trials={len(report.trials)} median gap={agg['gap']['median']:.4e} "
                      f"median regret={agg['regret']['median']:.4f} bound={agg['bound']:.4f}")
            for k, v in report.fits.items():
                print(f"fit {k}: {v}")
            _emit(report, None)
            out = spec.out or default_out
            if out:
                print(f"wrote {Path(out) / 'report.json'}")
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
