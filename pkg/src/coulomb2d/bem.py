"""Piecewise-constant Galerkin boundary elements on the segment [-1, 1].

The steady-sliding indentor problem reads: find ``t <= 0`` with
``a(t, s - t) >= <g, s - t>`` for every ``s <= 0``, where

    a = (C1 - w f C2) S + w f C3 A,
    S(t1, t2) = -<log|x| * t1, t2>,   A(t1, t2) = <sgn(x) * t1, t2>,

``w = +-1`` is the sliding direction and ``f`` the friction coefficient.  All
element integrals are closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .halfspace import HalfSpaceConstants
from .kernels1d import (
    double_cell_integrals,
    log_potential,
    log_primitive2,
    sgn_potential,
    sgn_primitive2,
)
from .vi import ConeVI, SolveReport, SolveStatus, lemke_solve, projected_gradient, psor_solve


@dataclass(frozen=True)
class LineMesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a line mesh needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] != -1.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must span exactly [-1, 1]")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, n: int) -> "LineMesh":
        nodes = np.linspace(-1.0, 1.0, n + 1)
        nodes[0], nodes[-1] = -1.0, 1.0
        return cls(nodes)

    @classmethod
    def graded(cls, n: int) -> "LineMesh":
        """Cosine-graded mesh, refined towards both endpoints."""
        nodes = -np.cos(np.linspace(0.0, math.pi, n + 1))
        nodes[0], nodes[-1] = -1.0, 1.0
        return cls(nodes)

    @property
    def n(self) -> int:
        return self.nodes.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])


def assemble_S(mesh: LineMesh) -> np.ndarray:
    """``S_ij = -int_{E_i} int_{E_j} log|x - s| ds dx``."""
    S = -double_cell_integrals(mesh.nodes, log_primitive2)
    return 0.5 * (S + S.T)


def assemble_A(mesh: LineMesh) -> np.ndarray:
    """``A_ij = int_{E_i} int_{E_j} sgn(x - s) ds dx``, exactly skew."""
    full = double_cell_integrals(mesh.nodes, sgn_primitive2)
    upper = np.triu(full, 1)
    return upper - upper.T


def coercivity_indicator(c: HalfSpaceConstants, f: float, w_sign: int) -> float:
    return c.C1 - w_sign * f * c.C2


def critical_friction(c: HalfSpaceConstants) -> float:
    """Friction coefficient at which the indicator vanishes for the worse sliding direction."""
    return math.inf if c.C2 == 0 else c.C1 / abs(c.C2)


def classify(kappa: float) -> str:
    if kappa > 0:
        return "coercive"
    if kappa < 0:
        return "non-coercive"
    return "skew-degenerate"


def _check_friction(f, w_sign):
    if f < 0:
        raise ValueError("friction coefficient must be nonnegative")
    if w_sign not in (-1, 1):
        raise ValueError("sliding direction must be +1 or -1")


def assemble_a(mesh: LineMesh, c: HalfSpaceConstants, f: float, w_sign: int,
               S=None, A=None):
    """Matrix of the steady-sliding form, its indicator ``kappa`` and classification."""
    _check_friction(f, w_sign)
    if S is None:
        S = assemble_S(mesh)
    if A is None:
        A = assemble_A(mesh)
    kappa = coercivity_indicator(c, f, w_sign)
    return kappa * S + w_sign * f * c.C3 * A, kappa, classify(kappa)


# ---------------------------------------------------------------------------
# gaps


def gap_function(spec: dict):
    """Callable gap from ``{"kind": "flat"|"parabola"|"table", "params": {...}}``.

    flat: ``g = value``; parabola: ``g = curvature x^2 - delta``;
    table: linear interpolation of ``x``/``g`` samples.
    """
    kind = spec.get("kind")
    params = dict(spec.get("params", {}))
    if kind == "flat":
        value = float(params.get("value", -1.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if kind == "parabola":
        k = float(params.get("curvature", 1.0))
        delta = float(params.get("delta", 0.0))
        return lambda x: k * np.asarray(x, dtype=float) ** 2 - delta
    if kind == "table":
        xs = np.asarray(params["x"], dtype=float)
        gs = np.asarray(params["g"], dtype=float)
        if xs.shape != gs.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("table gap needs matching increasing x and g arrays")
        return lambda x: np.interp(x, xs, gs)
    raise ValueError(f"unknown gap kind {kind!r}")


def discrete_gap(mesh: LineMesh, g) -> np.ndarray:
    """Load vector ``|E_i| g(mid_i)``; ``g`` is a callable or midpoint samples."""
    vals = g(mesh.midpoints) if callable(g) else np.asarray(g, dtype=float)
    if vals.shape != (mesh.n,):
        raise ValueError("gap samples must have one value per element")
    return mesh.lengths * vals


# ---------------------------------------------------------------------------
# solves


@dataclass
class SteadySlideResult:
    t: np.ndarray
    report: SolveReport
    kappa: float
    f_critical: float
    classification: str
    u_n: np.ndarray = field(default=None)
    probe: "NonexistenceReport | None" = None

    @property
    def total_load(self) -> float:
        return float(self.report.info.get("total_load", math.nan))


def normal_displacement(mesh, c, f, w_sign, t, points=None):
    """Surface normal displacement produced by ``t`` with ``t_t = -w f t``."""
    x = mesh.midpoints if points is None else np.asarray(points, dtype=float)
    kappa = coercivity_indicator(c, f, w_sign)
    return -kappa * log_potential(mesh.nodes, t, x) + w_sign * f * c.C3 * sgn_potential(mesh.nodes, t, x)


def solve_steady_sliding(mesh: LineMesh, c: HalfSpaceConstants, f: float, w_sign: int, g,
                         *, solver: str = "auto", omega: float = 1.3, tol: float = 1e-10,
                         max_sweeps: int | None = None, probe_on_failure: bool = True):
    """Solve the discrete steady-sliding cone VI.

    ``g`` is a callable gap or its midpoint samples.  ``solver`` is ``psor``,
    ``lemke`` or ``auto`` (PSOR, then pivoting if PSOR stalls).  A
    non-positive indicator short-circuits to ``NonCoercive`` and runs the
    nonexistence probe.
    """
    M, kappa, cls = assemble_a(mesh, c, f, w_sign)
    gh = discrete_gap(mesh, g)
    fcrit = critical_friction(c)
    n = mesh.n
    if kappa <= 0:
        probe = nonexistence_probe(mesh, c, f, w_sign) if probe_on_failure else None
        report = SolveReport(SolveStatus.NON_COERCIVE, 0, math.nan, solver="none",
                             info={"kappa": kappa, "f_critical": fcrit, "classification": cls})
        return SteadySlideResult(np.zeros(n), report, kappa, fcrit, cls, np.full(n, math.nan), probe)

    p = ConeVI(M, gh)
    if solver not in ("auto", "psor", "lemke"):
        raise ValueError(f"unknown solver {solver!r}")
    if solver in ("auto", "psor"):
        t, report = psor_solve(p, omega=omega, tol=tol, max_sweeps=max_sweeps)
        if solver == "auto" and not report.solved:
            t, report = lemke_solve(p, tol=tol)
    else:
        t, report = lemke_solve(p, tol=tol)
    report.info.update({
        "kappa": kappa,
        "f_critical": fcrit,
        "classification": cls,
        "total_load": float(t @ mesh.lengths),
        "contact_elements": int(np.count_nonzero(t < 0)),
    })
    u = normal_displacement(mesh, c, f, w_sign, t)
    return SteadySlideResult(t, report, kappa, fcrit, cls, u)


# ---------------------------------------------------------------------------
# nonexistence


def smooth_bump(x, center: float = 0.0, radius: float = 0.5):
    """``exp(1 - 1/(1 - r^2))`` on ``|x - center| < radius``, zero elsewhere."""
    r = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


@dataclass
class NonexistenceReport:
    kappa: float
    f_critical: float
    regime: str
    failure_mode: str
    lemke_status: str
    lemke_pivots: int
    psor_status: str
    gradient_status: str
    gradient_history: list
    certificate: float
    rigorous: bool
    notes: str = ""

    @property
    def evidence(self) -> bool:
        return self.failure_mode in ("ray-termination", "divergence")

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["evidence"] = self.evidence
        return out


def nonexistence_probe(mesh: LineMesh, c: HalfSpaceConstants, f: float, w_sign: int, *,
                       radius: float = 0.5, max_pivots: int = 20_000, gradient_iters: int = 50_000):
    """Attempt the solve with gap ``g = a(g~)`` built from a nonnegative bump ``g~``.

    A solution ``t`` would give ``a(t - g~, t - g~) = -<g~, a(t - g~)> >= 0``.
    With a negative indicator the symmetric part of ``a`` is negative
    definite, so no discrete solution exists: pivoting can only end on a
    secondary ray and projection iterations cannot settle.  At a vanishing
    indicator the form is skew-symmetric and the argument degenerates.
    """
    _check_friction(f, w_sign)
    kappa = coercivity_indicator(c, f, w_sign)
    if kappa > 0:
        raise ValueError(f"probe needs a non-positive indicator, got kappa = {kappa:.6g}")
    M, _, regime = assemble_a(mesh, c, f, w_sign)
    bump = smooth_bump(mesh.midpoints, radius=radius)
    p = ConeVI(M, M @ bump)
    t_l, rep_l = lemke_solve(p, max_pivots=max_pivots)
    _, rep_p = psor_solve(p)
    t_g, rep_g = projected_gradient(p, max_iter=gradient_iters)
    candidates = [t for t in (t_l, t_g) if np.all(np.isfinite(t))]
    # the quadratic form at returned candidates; a genuine solution needs >= 0
    cert = min((float((t - bump) @ M @ (t - bump)) for t in candidates), default=math.nan)
    if rep_l.status is SolveStatus.RAY_TERMINATION:
        mode = "ray-termination"
    elif rep_g.info.get("diverged"):
        mode = "divergence"
    elif rep_l.solved or rep_g.solved:
        mode = "solved"
    else:
        mode = "inconclusive"
    notes = ""
    if regime == "skew-degenerate":
        notes = "indicator vanishes: the form is skew-symmetric and coercivity is lost"
    return NonexistenceReport(
        kappa=kappa,
        f_critical=critical_friction(c),
        regime=regime,
        failure_mode=mode,
        lemke_status=rep_l.status.value,
        lemke_pivots=rep_l.iterations,
        psor_status=rep_p.status.value,
        gradient_status=rep_g.status.value,
        gradient_history=[float(h) for h in rep_g.history],
        certificate=cert,
        rigorous=kappa < 0,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# kernel diagnostics


def equilibrium_density(mesh: LineMesh, sampling: str = "midpoint") -> np.ndarray:
    """Element values of ``1 / (pi sqrt(1 - x^2))``.

    ``midpoint`` samples the density; ``average`` uses exact cell means.
    """
    if sampling == "midpoint":
        x = mesh.midpoints
        return 1.0 / (math.pi * np.sqrt(1.0 - x * x))
    if sampling == "average":
        return np.diff(np.arcsin(mesh.nodes)) / (math.pi * mesh.lengths)
    raise ValueError(f"unknown sampling {sampling!r}")


def equilibrium_potential(mesh: LineMesh, sampling: str = "midpoint", S=None) -> np.ndarray:
    """Cell-averaged potential ``-(log|.| * w)`` of the equilibrium density; ideally ``log 2``."""
    if S is None:
        S = assemble_S(mesh)
    return S @ equilibrium_density(mesh, sampling) / mesh.lengths


def decomposition_identity(mesh: LineMesh, t, S=None):
    """Both sides of ``S(t, t) = S(t0, t0) + log 2 <t, 1>^2`` with ``t0 = t - <t, 1> w``."""
    if S is None:
        S = assemble_S(mesh)
    t = np.asarray(t, dtype=float)
    w = equilibrium_density(mesh, "average")
    mass = float(t @ mesh.lengths)
    t0 = t - mass * w / float(w @ mesh.lengths)
    return float(t @ S @ t), float(t0 @ S @ t0) + math.log(2.0) * mass**2


def fourier_sgn_check(sigma: float = 0.05, half_width: float = 8.0, n: int = 2**15,
                      window: float = 0.5) -> float:
    """Max deviation between ``sgn * gaussian`` and its Fourier-multiplier evaluation.

    The unitary transform of ``sgn`` is ``-i sqrt(2/pi) / xi``.  Sampled on the
    periodic interval ``[-L, L)`` (dropping the mean mode) it yields the
    Fourier coefficients ``-i / (L xi_k)`` of ``sgn(x) - x / L``.  The check
    multiplies them with the transformed Gaussian, inverts, adds the linear
    term back and compares with ``erf(x / (sigma sqrt 2))`` for
    ``|x| <= window * L``.
    """
    L = half_width
    dx = 2 * L / n
    x = -L + dx * np.arange(n)
    gauss = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    g_int = dx * np.fft.fft(np.fft.ifftshift(gauss))  # ~ int G(x) exp(-i xi_k x) dx
    xi = 2 * math.pi * np.fft.fftfreq(n, d=dx)
    coeff = np.zeros(n, dtype=complex)
    nz = xi != 0
    sgn_hat = -1j * math.sqrt(2 / math.pi) / xi[nz]
    coeff[nz] = math.sqrt(2 * math.pi) / (2 * L) * sgn_hat
    conv = np.fft.fftshift(np.fft.ifft(coeff * g_int) * n).real
    exact = erf(x / (sigma * math.sqrt(2)))
    sel = np.abs(x) <= window * L
    return float(np.abs(conv[sel] + x[sel] / L - exact[sel]).max())
