"""Incremental Signorini-Coulomb contact on a triangulated body.

The inner Tresca problem (prescribed friction threshold) is solved exactly in
its dual: the contact multipliers ``z = (p, q)`` at the contact nodes solve a
box-constrained VI with the condensed flexibility ``G = B K^-1 B^T``.  The
outer Coulomb problem is a fixed point on the normal traction: given ``t^k``
the Tresca problem with threshold ``-f t^k`` yields a displacement whose
equilibrium residual on the contact boundary is ``t^{k+1}``.

The oblique variant works on ``(u1, u2) = (u_n, u_t - alpha u_n)`` with
the friction bounds ``-S / (1 - alpha f) <= q <= S / (1 + alpha f)`` on the
tangential multiplier.  With ``alpha = 0`` it performs exactly the same
arithmetic as the normal/tangential path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..elasticity import ElasticModulus
from ..halfspace import boundary_alpha
from ..vi import SolveReport, SolveStatus, box_merit, pgs_box_solve, polish_box
from .assembly import Stiffness, assemble_stiffness, load_vector, modulus_field
from .laws import (
    contact_states,
    kkt_residuals,
    oblique_components,
    require_friction_condition,
)
from .mesh import DomainMesh


class InvalidThreshold(ValueError):
    pass


class ContactNotConverged(RuntimeError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass
class ContactData:
    """Loads and contact data; nodal fields are ordered like ``mesh.contact.nodes``."""

    gap: np.ndarray
    friction: np.ndarray
    w_t: np.ndarray
    body_force: object = (0.0, 0.0)
    traction: object = None

    def __post_init__(self):
        self.gap = np.asarray(self.gap, dtype=float)
        self.friction = np.asarray(self.friction, dtype=float)
        self.w_t = np.asarray(self.w_t, dtype=float)
        if np.any(self.friction < 0):
            raise ValueError("friction coefficients must be nonnegative")
        if not (self.gap.shape == self.friction.shape == self.w_t.shape):
            raise ValueError("gap, friction and w_t must have one value per contact node")

    @classmethod
    def uniform(cls, mesh: DomainMesh, gap=0.0, friction=0.0, w_t=0.0, body_force=(0.0, 0.0),
                traction=None):
        """Broadcast scalars or evaluate callables ``fn(x, y)`` at the contact nodes."""
        xy = mesh.nodes[mesh.contact.nodes]

        def nodal(v):
            if callable(v):
                return np.array([float(v(x, y)) for x, y in xy])
            return np.broadcast_to(np.asarray(v, dtype=float), (len(xy),)).copy()

        return cls(nodal(gap), nodal(friction), nodal(w_t), body_force, traction)

    def replace(self, **kw) -> "ContactData":
        vals = dict(gap=self.gap, friction=self.friction, w_t=self.w_t,
                    body_force=self.body_force, traction=self.traction)
        vals.update(kw)
        return ContactData(**vals)


@dataclass
class TrescaResult:
    u: np.ndarray  # full displacement vector
    z: np.ndarray  # multipliers (p, q) in the solve basis
    u_n: np.ndarray
    u_t: np.ndarray
    t_n: np.ndarray
    t_t: np.ndarray
    sweeps: int
    residual: float
    status: SolveStatus

    @property
    def u1(self):
        return self.u_n


@dataclass
class StepResult:
    u: np.ndarray
    t: np.ndarray  # normal traction (oblique: t1)
    t_n: np.ndarray
    t_t: np.ndarray
    u_n: np.ndarray
    u_t: np.ndarray
    report: SolveReport
    kkt: dict
    states: list
    mode: str
    alpha: np.ndarray
    z: np.ndarray = field(repr=False, default=None)


class ContactProblem:
    """Factorised elastic body with its contact boundary and loads."""

    def __init__(self, mesh: DomainMesh, moduli, data: ContactData, stiffness: Stiffness | None = None,
                 pgs_tol: float = 1e-13, max_sweeps: int = 20_000):
        self.mesh = mesh
        self.moduli = moduli
        self.stiffness = stiffness if stiffness is not None else assemble_stiffness(mesh, moduli)
        self.chain = mesh.contact
        self.pgs_tol = pgs_tol
        self.max_sweeps = max_sweeps
        self._alpha = None
        self._build_trace()
        self.set_data(data)

    # -- setup ----------------------------------------------------------------

    def _build_trace(self):
        c = self.chain
        m = c.size
        st = self.stiffness
        pos = np.full(st.n_dofs, -1)
        pos[st.free] = np.arange(st.free.size)
        B = np.zeros((2 * m, st.free.size))
        for i, node in enumerate(c.nodes):
            dx, dy = pos[2 * node], pos[2 * node + 1]
            B[i, dx], B[i, dy] = c.normals[i]
            B[m + i, dx], B[m + i, dy] = c.tangents[i]
        self.B = B
        self.KinvBT = st.solve(B.T)
        G = B @ self.KinvBT
        self.G = 0.5 * (G + G.T)

    def set_data(self, data: ContactData):
        m = self.chain.size
        if data.gap.shape != (m,):
            raise ValueError(f"contact data must have {m} nodal values")
        self.data = data
        self.f_ext = load_vector(self.mesh, data.body_force, data.traction)
        self.u0 = self.stiffness.solve(self.stiffness.restrict(self.f_ext))
        self.b0 = self.B @ self.u0

    # -- traces ---------------------------------------------------------------

    def traces(self, u_full):
        """Normal and tangential displacement at the contact nodes."""
        ur = self.stiffness.restrict(u_full)
        m = self.chain.size
        v = self.B @ ur
        return v[:m], v[m:]

    def reaction(self, u_full):
        """Contact traction densities ``(t_n, t_t)`` from the equilibrium residual ``K u - f``."""
        r = (self.stiffness.K_full @ u_full - self.f_ext).reshape(-1, 2)[self.chain.nodes]
        w = self.chain.weights
        t_n = np.einsum("ij,ij->i", r, self.chain.normals) / w
        t_t = np.einsum("ij,ij->i", r, self.chain.tangents) / w
        return t_n, t_t

    def alpha_field(self) -> np.ndarray:
        """``C2 / C1`` at each contact node from the averaged adjacent modulus in the node frame."""
        if self._alpha is None:
            L = modulus_field(self.mesh, self.moduli)
            adj = self.mesh.node_elements(self.chain.nodes)
            angles = self.chain.tangent_angles
            cache = {}
            out = np.zeros(self.chain.size)
            for i, elems in enumerate(adj):
                avg = L[elems].mean(axis=0)
                key = (tuple(np.round(avg.ravel(), 14)), round(float(angles[i]), 14))
                if key not in cache:
                    cache[key] = boundary_alpha(ElasticModulus.from_matrix(0.5 * (avg + avg.T)), angles[i])
                out[i] = cache[key]
            self._alpha = out
        return self._alpha

    def dual_norm(self, t) -> float:
        """``sqrt(F^T K^-1 F)`` for the nodal force ``F`` of a normal traction ``t`` on the contact boundary."""
        m = self.chain.size
        wt = self.chain.weights * np.asarray(t, dtype=float)
        val = float(wt @ self.G[:m, :m] @ wt)
        return math.sqrt(max(val, 0.0))

    # -- inner Tresca problem -------------------------------------------------------

    def _oblique_system(self, alpha):
        m = self.chain.size
        a = np.asarray(alpha, dtype=float)
        G = self.G
        top = np.hstack([G[:m, :m], G[:m, m:] - G[:m, :m] * a[None, :]])
        bot_raw = np.hstack([G[m:, :m], G[m:, m:] - G[m:, :m] * a[None, :]])
        bot = bot_raw - a[:, None] * top
        b0 = np.concatenate([self.b0[:m], self.b0[m:] - a * self.b0[:m]])
        return np.vstack([top, bot]), b0

    def solve_tresca(self, threshold, tau=None, unilateral: bool = True, alpha=None, z0=None) -> TrescaResult:
        """Minimise the Tresca energy with friction threshold ``threshold`` (>= 0).

        With ``unilateral`` the normal (oblique: first) component obeys
        ``u_n <= g``; otherwise ``tau`` is a prescribed normal traction.
        ``alpha`` selects the oblique energy; ``None`` means ``alpha = 0``.
        """
        data = self.data
        m = self.chain.size
        w = self.chain.weights
        thr = np.asarray(threshold, dtype=float)
        if thr.shape != (m,):
            raise InvalidThreshold(f"threshold must have {m} nodal values")
        if np.any(thr < 0) or not np.all(np.isfinite(thr)):
            raise InvalidThreshold("friction threshold must be finite and nonnegative")
        a = np.zeros(m) if alpha is None else np.asarray(alpha, dtype=float)
        f = data.friction
        if np.any(np.abs(a) * f >= 1):
            raise InvalidThreshold("oblique weights need f |alpha| < 1")
        G, b0 = self._oblique_system(a)
        S = w * thr
        d = np.concatenate([data.gap, data.w_t - a * data.gap])
        b = b0 - d
        if unilateral:
            lo_p, hi_p = np.zeros(m), np.full(m, np.inf)
        else:
            if tau is None:
                raise ValueError("a prescribed normal traction is needed when not unilateral")
            tau = np.asarray(tau, dtype=float)
            if np.any(tau > 0):
                raise ValueError("prescribed normal traction must be nonpositive")
            lo_p = hi_p = -w * tau
        lo = np.concatenate([lo_p, -S / (1 - a * f)])
        hi = np.concatenate([hi_p, S / (1 + a * f)])
        diag = np.diag(G).copy()
        scale = 1.0 / diag
        # scale-free tolerance: multipliers are compared with the unconstrained response
        force_scale = max(float(np.max(np.abs(b) * scale, initial=0.0)),
                          float(np.max(lo_p, initial=0.0)), 1e-300)
        tol = self.pgs_tol * force_scale
        z, sweeps, res = pgs_box_solve(G, b, lo, hi, z0, omega=1.0, tol=tol,
                                       max_sweeps=self.max_sweeps, scale=scale)
        z, res = polish_box(G, b, lo, hi, z, scale)
        status = SolveStatus.SOLVED if res < 10 * tol else SolveStatus.NOT_CONVERGED
        p, q = z[:m], z[m:]
        p_phys = p - a * q
        u_red = self.u0 - self.KinvBT @ np.concatenate([p_phys, q])
        u = self.stiffness.extend(u_red)
        v = self.B @ u_red
        return TrescaResult(u, z, v[:m], v[m:], -p_phys / w, -q / w, sweeps, res / force_scale, status)

    def tresca_slack(self, res: TrescaResult, threshold, v_full, tau=None, unilateral=True, alpha=None):
        """Left side minus right side of the Tresca variational inequality at test field ``v``.

        Nonnegative for every admissible ``v`` iff ``res`` is the minimiser.
        """
        m = self.chain.size
        w = self.chain.weights
        a = np.zeros(m) if alpha is None else np.asarray(alpha, dtype=float)
        f = self.data.friction
        S = w * np.asarray(threshold, dtype=float)
        d2 = self.data.w_t - a * self.data.gap
        K = self.stiffness.K_full

        def j(u_full):
            un, ut = self.traces(u_full)
            x = (ut - a * un) - d2
            return float(np.sum(S * (np.maximum(x, 0) / (1 + a * f) + np.maximum(-x, 0) / (1 - a * f))))

        def load(u_full):
            val = float(self.f_ext @ u_full)
            if not unilateral:
                un, _ = self.traces(u_full)
                val += float(np.sum(w * np.asarray(tau) * un))
            return val

        dv = v_full - res.u
        return float(res.u @ (K @ dv)) - load(dv) + j(v_full) - j(res.u)

    def apply_scrA(self, t, tau, oblique: bool = False, alpha=None) -> np.ndarray:
        """Normal displacement of the Tresca solve with threshold ``-f t`` and normal load ``tau``."""
        t = np.asarray(t, dtype=float)
        if np.any(t > 0) or np.any(np.asarray(tau) > 0):
            raise ValueError("both traction slots must lie in the nonpositive cone")
        if oblique and alpha is None:
            alpha = self.alpha_field()
        res = self.solve_tresca(-self.data.friction * t, tau=tau, unilateral=False,
                                alpha=alpha if oblique else None)
        return res.u_n

    # -- outer Coulomb problem ----------------------------------------------------

    def solve_contact_step(self, mode: str = "isotropic", *, tol: float = 1e-12, max_iter: int = 500,
                           theta: float = 1.0, t0=None, z0=None, alpha=None) -> StepResult:
        """Fixed point ``t -> reaction(Tresca(-f t))`` on the normal (oblique: first) traction."""
        if mode not in ("isotropic", "oblique"):
            raise ValueError(f"unknown mode {mode!r}")
        if not 0 < theta <= 1:
            raise ValueError("damping factor must lie in (0, 1]")
        m = self.chain.size
        f = self.data.friction
        if mode == "oblique":
            a = self.alpha_field() if alpha is None else np.asarray(alpha, dtype=float)
            margin = require_friction_condition(f, a)
        else:
            a = None
            margin = 1.0
        t = np.zeros(m) if t0 is None else np.minimum(np.asarray(t0, dtype=float), 0.0)
        z = z0
        history = []
        status = SolveStatus.NOT_CONVERGED
        inner_sweeps = 0
        k = 0
        for k in range(1, max_iter + 1):
            res = self.solve_tresca(-f * t, unilateral=True, alpha=a, z0=z)
            inner_sweeps += res.sweeps
            z = res.z
            t_n, t_t = self.reaction(res.u)
            t1 = t_n if a is None else oblique_components((t_n, t_t), a, "to_oblique", "traction")[0]
            t_new = np.minimum(t1, 0.0)
            t_next = (1 - theta) * t + theta * t_new
            change = self.dual_norm(t_next - t)
            rel = change / (1.0 + self.dual_norm(t))
            history.append(rel)
            t = t_next
            if not np.isfinite(rel):
                break
            # with f = 0 the threshold vanishes identically and one solve is exact
            if rel < tol or not np.any(f):
                status = SolveStatus.SOLVED
                break
        if status is SolveStatus.SOLVED and (theta < 1 or k > 1):
            # make the final state consistent with the converged threshold, so that
            # restarting from it reproduces the same state in one iteration
            res = self.solve_tresca(-f * t, unilateral=True, alpha=a, z0=z)
            z = res.z
            t_n, t_t = self.reaction(res.u)
        u_n, u_t = res.u_n, res.u_t
        d = self.data
        kkt = kkt_residuals(u_n, u_t, t_n, t_t, d.gap, f, d.w_t, a)
        states = contact_states(u_n, u_t, t_n, d.gap, f, d.w_t)
        t_out = t_n if a is None else oblique_components((t_n, t_t), a, "to_oblique", "traction")[0]
        report = SolveReport(
            status, k, history[-1] if history else 0.0, solver=f"fixed-point/{mode}", history=history,
            info={"inner_sweeps": int(inner_sweeps), "friction_margin": margin, "theta": theta,
                  "inner_residual": float(res.residual), "kkt": kkt},
        )
        return StepResult(res.u, t_out, t_n, t_t, u_n, u_t, report, kkt, states, mode,
                          np.zeros(m) if a is None else a, z)


# -- functional wrappers ------------------------------------------------------------


def solve_tresca(mesh, moduli, data, threshold, tau=None, unilateral=True, oblique_alpha=None):
    return ContactProblem(mesh, moduli, data).solve_tresca(threshold, tau, unilateral, oblique_alpha)


def solve_contact_step(mesh, moduli, data, mode="isotropic", **kw) -> StepResult:
    return ContactProblem(mesh, moduli, data).solve_contact_step(mode, **kw)


def dual_norm(problem: ContactProblem, t) -> float:
    return problem.dual_norm(t)
