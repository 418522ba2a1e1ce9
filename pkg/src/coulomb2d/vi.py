"""Variational inequalities over the nonpositive orthant.

A :class:`ConeVI` asks for ``t <= 0`` with ``M t - q <= 0`` and
``t . (M t - q) = 0``.  With ``z = -t`` this is the linear complementarity
problem ``z >= 0, M z + q >= 0, z . (M z + q) = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _accel


class SolveStatus(str, enum.Enum):
    SOLVED = "Solved"
    NOT_CONVERGED = "NotConverged"
    RAY_TERMINATION = "RayTermination"
    NON_COERCIVE = "NonCoercive"


@dataclass
class SolveReport:
    status: SolveStatus
    iterations: int
    residual: float
    solver: str = ""
    history: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "solver": self.solver,
            "history": [float(h) for h in self.history],
            **self.info,
        }


@dataclass
class ConeVI:
    M: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.M = np.ascontiguousarray(self.M, dtype=float)
        self.q = np.ascontiguousarray(self.q, dtype=float).ravel()
        n = self.q.shape[0]
        if self.M.shape != (n, n):
            raise ValueError(f"matrix shape {self.M.shape} does not match load length {n}")

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def slack(self, t) -> np.ndarray:
        return self.M @ t - self.q


def fischer_burmeister(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a + b - np.hypot(a, b)


def vi_residual(p: ConeVI, t) -> float:
    """Largest Fischer-Burmeister violation of ``(-t, -(M t - q))``."""
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return 0.0
    return float(np.abs(fischer_burmeister(-t, -p.slack(t))).max())


def _kernels(backend: str | None):
    if backend in (None, "auto"):
        return _accel.pgs_box, _accel.box_residual
    try:
        return _accel.BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(_accel.BACKENDS)}") from None


def pgs_box_solve(G, b, lo, hi, z0=None, *, omega=1.0, tol=1e-10, max_sweeps=10_000,
                  scale=None, refresh=50, backend=None):
    """Projected SOR for ``<G z - b, y - z> >= 0`` over the box ``lo <= y <= hi``.

    Returns ``(z, sweeps, residual)``; the residual is Fischer-Burmeister on
    one-sided bounds and the natural residual on two-sided ones, computed on
    ``scale * (G z - b)``.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    if not 0 < omega < 2:
        raise ValueError("relaxation factor must lie in (0, 2)")
    if n and np.any(np.diag(G) <= 0):
        raise ValueError("projected Gauss-Seidel needs a positive diagonal")
    lo = np.array(np.broadcast_to(lo, (n,)), dtype=float)
    hi = np.array(np.broadcast_to(hi, (n,)), dtype=float)
    z = np.clip(np.zeros(n) if z0 is None else np.array(z0, dtype=float), lo, hi)
    z = np.ascontiguousarray(z)
    scale = np.ones(n) if scale is None else np.ascontiguousarray(scale, dtype=float)
    if n == 0:
        return z, 0, 0.0
    sweep, _ = _kernels(backend)
    sweeps, res = sweep(
        np.ascontiguousarray(G.T), np.ascontiguousarray(b, dtype=float), lo, hi, z, scale,
        float(omega), float(tol), int(max_sweeps), int(refresh),
    )
    return z, int(sweeps), float(res)


def box_merit(G, b, lo, hi, z, scale=None) -> float:
    _, residual = _kernels(None)
    n = len(z)
    scale = np.ones(n) if scale is None else np.ascontiguousarray(scale, dtype=float)
    return float(residual(np.ascontiguousarray(np.asarray(G, dtype=float).T),
                          np.ascontiguousarray(b, dtype=float),
                          np.array(np.broadcast_to(lo, (n,)), dtype=float),
                          np.array(np.broadcast_to(hi, (n,)), dtype=float),
                          np.ascontiguousarray(z, dtype=float), scale))


def polish_box(G, b, lo, hi, z, scale=None, rounds: int = 3):
    """Refine a box-VI iterate by solving its active-set equations exactly.

    Components pinned at a bound stay there; the rest solve ``G z = b``.  The
    refined point is kept only if it is feasible and has a smaller merit.
    """
    G = np.asarray(G, dtype=float)
    n = len(z)
    lo = np.broadcast_to(lo, (n,)).astype(float)
    hi = np.broadcast_to(hi, (n,)).astype(float)
    best = np.array(z, dtype=float)
    best_res = box_merit(G, b, lo, hi, best, scale)
    for _ in range(rounds):
        w = G @ best - b
        span = np.maximum(1.0, np.abs(best))
        at_lo = (best - lo <= 1e-12 * span) & (w >= 0)
        at_hi = (hi - best <= 1e-12 * span) & (w <= 0)
        fixed = at_lo | at_hi | (lo == hi)
        free = ~fixed
        cand = best.copy()
        cand[at_lo] = lo[at_lo]
        cand[at_hi] = hi[at_hi]
        if free.any():
            rhs = b[free] - G[np.ix_(free, fixed)] @ cand[fixed]
            try:
                cand[free] = np.linalg.solve(G[np.ix_(free, free)], rhs)
            except np.linalg.LinAlgError:
                break
        if np.any(cand < lo) or np.any(cand > hi):
            break
        res = box_merit(G, b, lo, hi, cand, scale)
        if not res < best_res:
            break
        best, best_res = cand, res
    return best, best_res


def psor_solve(p: ConeVI, omega: float = 1.3, tol: float = 1e-10, max_sweeps: int | None = None,
               t0=None, backend=None):
    """Projected Gauss-Seidel with over-relaxation on the cone VI.

    Converges when the symmetric part of ``M`` is positive definite; otherwise
    the report is ``NotConverged`` (possibly with a non-finite residual).
    """
    n = p.n
    if max_sweeps is None:
        max_sweeps = 100 * max(n, 1)
    if n and np.any(np.diag(p.M) <= 0):
        t = np.zeros(n)
        return t, SolveReport(SolveStatus.NOT_CONVERGED, 0, vi_residual(p, t), solver="psor",
                              info={"omega": omega, "reason": "non-positive diagonal"})
    z0 = None if t0 is None else -np.asarray(t0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        z, sweeps, res = pgs_box_solve(
            p.M, -p.q, 0.0, np.inf, z0, omega=omega, tol=tol, max_sweeps=max_sweeps, backend=backend
        )
    t = -z
    ok = math.isfinite(res) and res < tol
    if ok:
        res = vi_residual(p, t)
        ok = res < tol
    status = SolveStatus.SOLVED if ok else SolveStatus.NOT_CONVERGED
    return t, SolveReport(status, sweeps, res, solver="psor", info={"omega": omega})


def projected_gradient(p: ConeVI, rho: float | None = None, tol: float = 1e-10,
                       max_iter: int = 2000, blowup: float = 1e6, t0=None):
    """Fixed-step projection iteration ``t <- min(0, t - rho (M t - q))``.

    Used as a divergence detector: the report carries ``diverged = True`` when
    the residual exceeds ``blowup`` times its initial value or stops being
    finite.
    """
    n = p.n
    if rho is None:
        nrm = np.linalg.norm(p.M, 2) if n else 1.0
        rho = 1.0 / nrm if nrm > 0 else 1.0
    t = np.zeros(n) if t0 is None else np.minimum(np.asarray(t0, dtype=float), 0.0)
    r0 = vi_residual(p, t)
    history = [r0]
    res = r0
    diverged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_iter + 1):
            t = np.minimum(0.0, t - rho * p.slack(t))
            res = vi_residual(p, t)
            if k % 100 == 0:
                history.append(res)
            if res < tol:
                return t, SolveReport(SolveStatus.SOLVED, k, res, solver="projected-gradient",
                                      history=history, info={"diverged": False})
            if not math.isfinite(res) or res > blowup * max(r0, tol):
                diverged = True
                history.append(res)
                break
    return t, SolveReport(SolveStatus.NOT_CONVERGED, k, res, solver="projected-gradient",
                          history=history, info={"diverged": diverged})


def _polish(p: ConeVI, z):
    """Re-solve the active equations exactly for a pivoting solution."""
    active = z > 0
    if not active.any():
        return z
    out = np.zeros_like(z)
    try:
        out[active] = np.linalg.solve(p.M[np.ix_(active, active)], -p.q[active])
    except np.linalg.LinAlgError:
        return z
    if np.any(out[active] < 0):
        return z
    return out


def lemke_solve(p: ConeVI, tol: float = 1e-10, max_pivots: int | None = None, pivot_tol: float = 1e-12):
    """Lemke's complementary pivoting with covering vector ``e = 1``.

    Ties in the ratio test go to the artificial variable first, then follow
    the lexicographic rule on the basis inverse, then the smallest variable
    index.  A column with no positive entry signals a
    secondary ray and yields ``RayTermination``.
    """
    n = p.n
    M, q = p.M, p.q
    if max_pivots is None:
        max_pivots = 100 * (n + 1)
    if n == 0 or q.min() >= 0:
        t = np.zeros(n)
        return t, SolveReport(SolveStatus.SOLVED, 0, vi_residual(p, t), solver="lemke")

    # variables: w_0..w_{n-1}, z_0..z_{n-1}, artificial z0 = 2n
    art = 2 * n
    T = np.zeros((n, 2 * n + 2))
    T[:, :n] = np.eye(n)
    T[:, n:2 * n] = -M
    T[:, art] = -1.0
    T[:, -1] = q
    basis = np.arange(n)

    def pivot(r, c):
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T[:] -= np.outer(col, T[r])
        basis[r] = c

    r = int(np.argmin(q))
    pivot(r, art)
    leaving = r  # w_r left
    pivots = 1
    while pivots < max_pivots:
        entering = leaving + n if leaving < n else leaving - n
        col = T[:, entering]
        pos = col > pivot_tol
        if not pos.any():
            t = -_extract(basis, T, n)
            return t, SolveReport(
                SolveStatus.RAY_TERMINATION, pivots, vi_residual(p, t), solver="lemke",
                info={"artificial": float(_artificial(basis, T, art))},
            )
        r = _ratio_test(T, col, pos, basis, art, n, pivot_tol)
        leaving = int(basis[r])
        pivot(r, entering)
        pivots += 1
        if leaving == art:
            z = _polish(p, _extract(basis, T, n))
            t = -z
            res = vi_residual(p, t)
            status = SolveStatus.SOLVED if res < tol else SolveStatus.NOT_CONVERGED
            return t, SolveReport(status, pivots, res, solver="lemke")
    t = -_extract(basis, T, n)
    return t, SolveReport(SolveStatus.NOT_CONVERGED, pivots, vi_residual(p, t), solver="lemke",
                          info={"reason": "pivot cap"})


def _ratio_test(T, col, pos, basis, art, n, pivot_tol):
    """Minimum ratio row; ties resolved lexicographically on ``B^-1`` (no cycling)."""
    rows = np.flatnonzero(pos)
    ratios = T[rows, -1] / col[rows]
    rmin = ratios.min()
    ties = rows[ratios <= rmin + pivot_tol * max(1.0, abs(rmin))]
    if ties.size > 1:
        art_rows = ties[basis[ties] == art]
        if art_rows.size:
            return int(art_rows[0])
        for k in range(n):
            vals = T[ties, k] / col[ties]
            vmin = vals.min()
            ties = ties[vals <= vmin + pivot_tol * max(1.0, abs(vmin))]
            if ties.size == 1:
                break
        if ties.size > 1:
            ties = ties[np.argsort(basis[ties], kind="stable")]
    return int(ties[0])


def _extract(basis, T, n):
    z = np.zeros(n)
    for row, var in enumerate(basis):
        if n <= var < 2 * n:
            z[var - n] = max(T[row, -1], 0.0)
    return z


def _artificial(basis, T, art):
    rows = np.flatnonzero(basis == art)
    return T[rows[0], -1] if rows.size else 0.0


# ---------------------------------------------------------------------------
# operator-class probes


@dataclass
class ProbeReport:
    min_monotonicity_quotient: float
    min_monotonicity_pairing: float
    max_output_norm: float
    max_input_norm: float
    coercivity_quotients: list
    coercivity_increasing: bool
    n_pairs: int

    def as_dict(self) -> dict:
        return {
            "min_monotonicity_quotient": self.min_monotonicity_quotient,
            "min_monotonicity_pairing": self.min_monotonicity_pairing,
            "max_output_norm": self.max_output_norm,
            "max_input_norm": self.max_input_norm,
            "coercivity_quotients": self.coercivity_quotients,
            "coercivity_increasing": self.coercivity_increasing,
            "n_pairs": self.n_pairs,
        }


def pseudomonotone_probe(
    operator_apply: Callable[[np.ndarray, np.ndarray], np.ndarray],
    pairs: Sequence[tuple],
    norm: Callable[[np.ndarray], float] | None = None,
    rays: Sequence[np.ndarray] = (),
    ray_scales: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
    pairing: Callable[[np.ndarray, np.ndarray], float] | None = None,
) -> ProbeReport:
    """Finite-sample checks of monotonicity, boundedness and coercivity.

    ``operator_apply(t, tau)`` evaluates the operator with its first (frozen)
    slot at ``t``.  For each pair the frozen-slot quotient
    ``<A(t, t) - A(t, tau), t - tau> / ||t - tau||^2`` is recorded; along each
    ray ``s t0`` the quotient ``<A(s t0, s t0), s t0> / ||s t0||`` is
    evaluated at ``ray_scales``.
    """
    if norm is None:
        norm = lambda v: float(np.linalg.norm(v))  # noqa: E731
    if pairing is None:
        pairing = lambda a, b: float(np.dot(a, b))  # noqa: E731
    quotients, pairings, outs, ins = [], [], [], []
    for t, tau in pairs:
        t = np.asarray(t, dtype=float)
        tau = np.asarray(tau, dtype=float)
        a_tt = np.asarray(operator_apply(t, t))
        a_ttau = np.asarray(operator_apply(t, tau))
        d = t - tau
        val = pairing(a_tt - a_ttau, d)
        nd = norm(d)
        pairings.append(val)
        quotients.append(val / nd**2 if nd > 0 else math.inf)
        outs.extend([float(np.linalg.norm(a_tt)), float(np.linalg.norm(a_ttau))])
        ins.extend([norm(t), norm(tau)])
    coercive = []
    for t0 in rays:
        t0 = np.asarray(t0, dtype=float)
        row = []
        for s in ray_scales:
            ts = s * t0
            row.append(pairing(np.asarray(operator_apply(ts, ts)), ts) / norm(ts))
        coercive.append(row)
    increasing = all(all(b > a for a, b in zip(r, r[1:])) for r in coercive)
    return ProbeReport(
        min_monotonicity_quotient=min(quotients, default=math.inf),
        min_monotonicity_pairing=min(pairings, default=math.inf),
        max_output_norm=max(outs, default=0.0),
        max_input_norm=max(ins, default=0.0),
        coercivity_quotients=coercive,
        coercivity_increasing=increasing,
        n_pairs=len(pairings),
    )


def loglog_slope(h, d) -> float:
    """Least-squares slope of ``log d`` against ``log h``."""
    h = np.log(np.asarray(h, dtype=float))
    d = np.log(np.asarray(d, dtype=float))
    return float(np.polyfit(h, d, 1)[0])
