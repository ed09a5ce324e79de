"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Prints one line per kernel with the best-of-N time for each backend and the
speedup.  Both backends are checked to agree before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from unilab import kernels
from unilab.kernels import backends


def cases(quick: bool):
    rng = np.random.default_rng(0)
    D = 64 if quick else 256
    v = rng.normal(size=D)
    G = rng.normal(size=(512 if quick else 8192, 64))
    signs = np.zeros(64)
    signs[:16] = 1.0
    A = rng.normal(size=(32, 64))
    M = A.T @ A
    L = float(np.linalg.eigvalsh(M)[-1])
    t0 = np.full(64, 1 / 64)
    Phi = rng.normal(size=(24, 64))
    x = np.zeros(64)
    x[:6] = 1.0
    Aeq = np.hstack([Phi, -Phi])
    b = Phi @ x
    c = np.ones(128)
    return {
        "project_simplex": lambda k: k.project_simplex(v, 1.0),
        "project_l1_ball": lambda k: k.project_l1_ball(v, 1.0),
        "simplex_excess_rows": lambda k: k.simplex_excess_rows(G, 32.0),
        "l1_polar_min_rows": lambda k: k.l1_polar_min_rows(G, signs, 1e-10),
        "pg_quadratic": lambda k: k.pg_quadratic(M, np.zeros(64), t0, kernels.SET_SIMPLEX, np.zeros(64), 1.0, L, 2000, 0.0)[0],
        "lp_simplex": lambda k: k.lp_simplex(Aeq, b, c, 1e-9, 10000)[1],
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small inputs, one repeat")
    args = ap.parse_args(argv)
    found = backends()
    repeat = 1 if args.quick else args.repeat
    print(f"backends: {', '.join(sorted(found))} (active: {kernels.BACKEND})")
    print(f"{'kernel':<22}" + "".join(f"{name:>14}" for name in sorted(found)) + f"{'speedup':>10}")
    for label, fn in cases(args.quick).items():
        outs = {name: np.asarray(fn(k)) for name, k in found.items()}
        ref = outs["python"]
        for name, out in outs.items():
            if not np.allclose(out, ref, atol=1e-8):
                raise SystemExit(f"{label}: {name} disagrees with python")
        times = {}
        for name, k in found.items():
            times[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=repeat))
        line = f"{label:<22}" + "".join(f"{times[n] * 1e3:12.3f}ms" for n in sorted(found))
        if "cython" in times:
            line += f"{times['python'] / times['cython']:9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
