"""Command-line entry point: ``unilab {run,psi,sdim,check}``."""
from __future__ import annotations

import argparse
import logging
import sys
import time

from unilab import geometry as geo
from unilab.models import SeedSpec


def _cmd_run(args) -> int:
    from unilab.experiments import load_spec, run_experiment, write_outputs
    from unilab.experiments.spec import SpecError

    try:
        spec = load_spec(args.spec_file)
    except (OSError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    spec = spec.with_overrides(seed=args.seed, output_dir=args.out)
    t0 = time.perf_counter()
    rows = run_experiment(spec, threads=args.threads)
    paths = write_outputs(spec, rows, args.format)
    failed = sum(r.failed for r in rows)
    print(f"{spec.name}: {len(rows)} rows in {time.perf_counter() - t0:.1f}s ({failed} failed trials)")
    for p in paths:
        print(f"  wrote {p}")
    return 0


def _cmd_psi(args) -> int:
    try:
        if args.inverse:
            print(format(geo.psi_l1_inverse(args.rho), ".17g"))
        else:
            print(format(geo.psi_l1(args.rho), ".17g"))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_sdim(args) -> int:
    seed = SeedSpec(args.seed)
    try:
        T = geo.parse_set(args.set, seed)
        est = geo.statistical_dimension(T, args.samples, seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"set        {geo.describe(T)}")
    print(f"sdim       {est.value:.6f}")
    print(f"std_error  {est.std_error:.6f}")
    print(f"samples    {est.n_samples}")
    try:
        w = geo.gaussian_width(T, args.samples, seed)
        print(f"width      {w.value:.6f} (+/- {w.std_error:.6f})")
    except geo.UnsupportedSetError:
        pass
    return 0


def _cmd_check(args) -> int:
    from unilab.check import run_checks

    results = run_checks(seed=args.seed if args.seed is not None else 2024, only=args.only)
    width = max((len(r.name) for r in results), default=10)
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag}  {r.module:<16} {r.name:<{width}}  {r.seconds:6.1f}s  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} invariants hold")
    return 1 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unilab", description="Universality experiments for random embeddings.")
    p.add_argument("-v", "--verbose", action="store_true", help="log failed trials")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment spec file")
    r.add_argument("spec_file")
    r.add_argument("--seed", type=int, default=None, help="override the master seed")
    r.add_argument("--threads", type=int, default=1, help="worker processes")
    r.add_argument("--out", default=None, help="output directory (overrides the experiment file)")
    r.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("psi", help="evaluate the l1 phase-transition curve")
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--inverse", action="store_true", help="evaluate the inverse instead")
    s.set_defaults(func=_cmd_psi)

    d = sub.add_parser("sdim", help="Monte Carlo statistical dimension of a set")
    d.add_argument("--set", required=True, help="descriptor such as orthant:D=64 or subspace:k=10,D=50")
    d.add_argument("--samples", type=int, default=100000)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=_cmd_sdim)

    c = sub.add_parser("check", help="run the invariant suite")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--only", default=None, help="restrict to one module or check name")
    c.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
