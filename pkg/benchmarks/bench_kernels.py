"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--h 0.25] [--paths 200] [--steps 20000]

Both backends run on identical inputs and must return identical results;
the script checks that before printing timings.
"""

import argparse
import time

import numpy as np

from divmca import _fallback
from divmca.chain import Grid, KernelTable
from divmca.model import example_model
from divmca.solver import solve

try:
    from divmca import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.25)
    ap.add_argument("--B", type=float, default=100.0)
    ap.add_argument("--n-u", type=int, default=101)
    ap.add_argument("--paths", type=int, default=200)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    model = example_model("prop-exp", n_u=args.n_u)
    grid = Grid(args.h, args.B)
    table = KernelTable(model, grid)
    sol = solve(model, grid, table=table)
    V0 = sol.V * 0.9

    def sweep(mod):
        V = V0.copy()
        mod.gs_sweep(V, *table.arrays)
        return V

    level = np.array([grid.B if b is None else b - grid.h for b in sol.barrier])
    sim = (7, args.paths, 30.0, 0, 1e-3, args.steps, model.r, grid.h, model.regimes.q, table.b,
           table.sigma, sol.u_index, level, 0, 1.0, 0.0, None)

    cases = [
        ("gs_sweep", lambda mod: sweep(mod)),
        ("bellman_all", lambda mod: mod.bellman_all(sol.V, *table.arrays)),
        ("simulate_paths", lambda mod: mod.simulate_paths(*sim)),
    ]
    print(f"prop-exp, h={grid.h}, B={grid.B}, n_u={args.n_u}, "
          f"{args.paths} paths x {args.steps} steps, best of {args.repeat}")
    print(f"{'kernel':<16}{'compiled s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn in cases:
        tc, oc = best_of(lambda: fn(_kernels), args.repeat)
        tp, op = best_of(lambda: fn(_fallback), 1)
        for a, b in zip(np.atleast_1d(oc) if isinstance(oc, np.ndarray) else oc,
                        np.atleast_1d(op) if isinstance(op, np.ndarray) else op):
            assert np.array_equal(a, b), f"{name}: backends disagree"
        print(f"{name:<16}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.0f}x")


if __name__ == "__main__":
    main()
