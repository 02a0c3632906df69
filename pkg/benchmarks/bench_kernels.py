"""Benchmark the contouring kernels: compiled extension vs NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 512,1024,2048] [--levels 32]
"""

import argparse
import time

import numpy as np

from conicvol import CurvatureBand, Divisor, build_extremal
from conicvol import levelset as ls
from conicvol._kernels import _pure

try:
    from conicvol._kernels import _fast
except ImportError:
    _fast = None


def bench(fn, u, levels, spacing, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(u, levels, spacing)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="512,1024,2048")
    ap.add_argument("--levels", type=int, default=32)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    metric = build_extremal("Vmin", Divisor.from_orders([-0.5]),
                            CurvatureBand(0.25, 1.0))
    print(f"{'N':>6} {'levels':>7} {'pure [s]':>10} {'ext [s]':>10} "
          f"{'speedup':>8}")
    for n in sizes:
        grid = ls.grid_from_metric(metric, 8.0, n)
        levels = np.quantile(grid.u, np.linspace(0.2, 0.95, args.levels))
        t_pure = bench(_pure.contour_measures, grid.u, levels, grid.spacing)
        if _fast is None:
            print(f"{n:>6} {args.levels:>7} {t_pure:>10.3f} {'n/a':>10} "
                  f"{'n/a':>8}")
            continue
        t_fast = bench(_fast.contour_measures, grid.u, levels, grid.spacing)
        p, a = _pure.contour_measures(grid.u, levels[:4], grid.spacing)
        pf, af = _fast.contour_measures(grid.u, levels[:4], grid.spacing)
        assert np.allclose(p, pf, rtol=1e-12) and np.allclose(a, af, rtol=1e-12)
        print(f"{n:>6} {args.levels:>7} {t_pure:>10.3f} {t_fast:>10.3f} "
              f"{t_pure / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
