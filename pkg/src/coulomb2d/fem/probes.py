"""Sampled diagnostics of the contact operators on a fixed mesh."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..vi import ProbeReport, loglog_slope, pseudomonotone_probe
from .contact import ContactData, ContactProblem
from .mesh import rectangle_mesh


def probe_problem(n_contact: int = 30, friction: float = 0.3, moduli=None, side_load=(0.01, 0.0)):
    """Rectangle ``2 x 1`` with ``n_contact`` nodes on a sliding contact bottom.

    Top clamped, sides loaded by ``side_load``; used by the operator probes.
    """
    from ..elasticity import isotropic_modulus

    moduli = isotropic_modulus(1.0, 0.3) if moduli is None else moduli
    nx = n_contact - 1
    ny = max(2, nx // 2)
    tag = lambda x, y, side: {"bottom": "C", "top": "U"}.get(side, "T")  # noqa: E731
    mesh = rectangle_mesh(2.0, 1.0, nx, ny, tag)
    data = ContactData.uniform(mesh, gap=0.0, friction=friction, traction=side_load)
    return ContactProblem(mesh, moduli, data)


def trace_norm(problem: ContactProblem, v) -> float:
    """Norm dual to ``dual_norm``: ``sqrt(v^T G_nn^-1 v)`` for a nodal normal displacement."""
    m = problem.chain.size
    Gnn = problem.G[:m, :m]
    v = np.asarray(v, dtype=float)
    return math.sqrt(max(float(v @ np.linalg.solve(Gnn, v)), 0.0))


def random_cone_pairs(m: int, n_pairs: int, rng: np.random.Generator, scale: float = 0.1):
    return [(-scale * rng.random(m), -scale * rng.random(m)) for _ in range(n_pairs)]


def operator_probe(problem: ContactProblem, n_pairs: int = 100, seed: int = 0, scale: float = 0.1,
                   n_rays: int = 4, oblique: bool = False) -> ProbeReport:
    """Frozen-slot monotonicity, boundedness and coercivity along rays."""
    rng = np.random.default_rng(seed)
    m = problem.chain.size
    w = problem.chain.weights
    alpha = problem.alpha_field() if oblique else None
    apply = lambda t, tau: problem.apply_scrA(t, tau, oblique=oblique, alpha=alpha)  # noqa: E731
    pairs = random_cone_pairs(m, n_pairs, rng, scale)
    rays = [-scale * rng.random(m) for _ in range(n_rays)]
    return pseudomonotone_probe(
        apply, pairs, norm=problem.dual_norm, rays=rays,
        pairing=lambda a, b: float(np.sum(w * a * b)),
    )


@dataclass
class HolderReport:
    steps: list
    input_norms: list
    output_norms: list
    slope: float

    def as_dict(self) -> dict:
        return {"steps": self.steps, "input_norms": self.input_norms,
                "output_norms": self.output_norms, "slope": self.slope}


def holder_probe(problem: ContactProblem, seed: int = 0, scale: float = 0.1, levels: int = 9,
                 oblique: bool = False) -> HolderReport:
    """Log-log slope of ``||A(t + h d, tau) - A(t, tau)||`` against ``dual_norm(h d)``.

    A fixed random base point, direction and normal load are used with
    ``h = 2^-k scale`` for ``k = 0 .. levels - 1``; the output is measured
    in the trace norm dual to ``dual_norm``.
    """
    rng = np.random.default_rng(seed)
    m = problem.chain.size
    alpha = problem.alpha_field() if oblique else None
    t = -scale * rng.random(m)
    tau = -scale * rng.random(m)
    d = -rng.random(m)
    base = problem.apply_scrA(t, tau, oblique=oblique, alpha=alpha)
    hs, ins, outs = [], [], []
    for k in range(levels):
        h = scale * 2.0**-k
        v = problem.apply_scrA(t + h * d, tau, oblique=oblique, alpha=alpha)
        hs.append(h)
        ins.append(problem.dual_norm(h * d))
        outs.append(trace_norm(problem, v - base))
    return HolderReport(hs, ins, outs, loglog_slope(ins, outs))
