"""Pure numpy fallback for the projected Gauss-Seidel sweep."""

import numpy as np


def _merits(z, w, lo, hi):
    out = np.abs(w).astype(float)
    up = np.isinf(lo) & np.isfinite(hi)
    a = hi[up] - z[up]
    b = -w[up]
    out[up] = np.abs(a + b - np.sqrt(a * a + b * b))
    down = np.isfinite(lo) & np.isinf(hi)
    a = z[down] - lo[down]
    b = w[down]
    out[down] = np.abs(a + b - np.sqrt(a * a + b * b))
    box = np.isfinite(lo) & np.isfinite(hi)
    out[box] = np.abs(z[box] - np.clip(z[box] - w[box], lo[box], hi[box]))
    return out


def box_residual(MT, q, lo, hi, z, scale):
    w = MT.T @ z - q
    return float(_merits(z, w * scale, lo, hi).max(initial=0.0))


def pgs_box(MT, q, lo, hi, z, scale, omega, tol, max_sweeps, refresh):
    n = z.shape[0]
    w = MT.T @ z - q
    res = float(_merits(z, w * scale, lo, hi).max(initial=0.0))
    if res < tol:
        return 0, res
    diag = np.diag(MT).copy()
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            zi = z[i]
            znew = min(max(zi - omega * w[i] / diag[i], lo[i]), hi[i])
            delta = znew - zi
            if delta != 0.0:
                z[i] = znew
                w += delta * MT[i]
        if refresh > 0 and sweep % refresh == 0:
            w = MT.T @ z - q
        res = float(_merits(z, w * scale, lo, hi).max(initial=0.0))
        if res != res:
            return sweep, res
        if res < tol:
            w = MT.T @ z - q
            res = float(_merits(z, w * scale, lo, hi).max(initial=0.0))
            if res < tol:
                return sweep, res
    return max_sweeps, res
