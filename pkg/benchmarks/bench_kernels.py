"""Compare the compiled and pure-Python projected Gauss-Seidel sweep kernels.

    python3 benchmarks/bench_kernels.py [--sizes 50 200 800] [--repeat 3]

Both backends run the same number of sweeps on the same problems; the
script prints wall time per backend and the maximum difference of the
solutions.
"""

import argparse
import time

import numpy as np

from coulomb2d import _accel
from coulomb2d.bem import LineMesh, assemble_a, discrete_gap, gap_function
from coulomb2d.halfspace import HalfSpaceConstants
from coulomb2d.vi import pgs_box_solve


def sliding_problem(n: int):
    """Steady-sliding cone VI at f = 0.5 as a box problem ``lo = -inf, hi = 0``."""
    mesh = LineMesh.uniform(n)
    c = HalfSpaceConstants(1.0, 0.2, 0.3, 1.0)
    M, _, _ = assemble_a(mesh, c, 0.5, 1)
    g = discrete_gap(mesh, gap_function({"kind": "parabola", "params": {"curvature": 1.0, "delta": 0.1}}))
    # cone VI  t <= 0,  M t - g <= 0: box with hi = 0
    return M, g, np.full(n, -np.inf), np.zeros(n)


def time_backend(backend, G, b, lo, hi, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        z, sweeps, res = pgs_box_solve(G, b, lo, hi, omega=1.2, tol=1e-12, max_sweeps=5000, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, z, sweeps, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = sorted(_accel.BACKENDS)
    print(f"available backends: {', '.join(backends)} (default {_accel.BACKEND})")
    if "cython" not in backends:
        print("compiled kernel not built; only the fallback is timed")
    print(f"{'n':>6} {'backend':>8} {'sweeps':>7} {'residual':>10} {'seconds':>10} {'speedup':>8}")
    for n in args.sizes:
        G, b, lo, hi = sliding_problem(n)
        results = {bk: time_backend(bk, G, b, lo, hi, args.repeat) for bk in backends}
        ref = results["python"][0]
        for bk in backends:
            t, z, sweeps, res = results[bk]
            print(f"{n:>6} {bk:>8} {sweeps:>7} {res:>10.2e} {t:>10.4f} {ref / t:>7.1f}x")
        if len(results) > 1:
            diff = np.abs(results["python"][1] - results["cython"][1]).max()
            print(f"{'':>6} max |z_cython - z_python| = {diff:.2e}")


if __name__ == "__main__":
    main()
