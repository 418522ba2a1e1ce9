"""Pointwise Signorini-Coulomb laws in the normal/tangential and oblique bases.

Sign conventions: ``t_n <= 0`` is compressive, the gap constraint is
``u_n <= g`` and the tangential traction opposes the slip,
``t_t = f t_n sgn(u_t - w_t)`` whenever ``u_t != w_t``.

The oblique basis attached to ``alpha`` uses

    u1 = u_n,  u2 = u_t - alpha u_n,  t1 = t_n + alpha t_t,  t2 = t_t,

which preserves the pairing ``t_n u_n + t_t u_t = t1 u1 + t2 u2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FrictionConditionViolated(ValueError):
    """``sup f |alpha| >= 1``: the oblique formulation is not available."""


def oblique_components(pair, alpha, direction: str = "to_oblique", kind: str = "displacement"):
    """Convert a ``(normal, tangential)`` pair to the oblique basis or back.

    ``kind`` selects the displacement map ``(u_n, u_t) <-> (u1, u2)`` or the
    traction map ``(t_n, t_t) <-> (t1, t2)``.
    """
    a = np.asarray(alpha, dtype=float)
    x, y = (np.asarray(v, dtype=float) for v in pair)
    if kind == "displacement":
        if direction == "to_oblique":
            return x, y - a * x
        if direction == "from_oblique":
            return x, y + a * x
    elif kind == "traction":
        if direction == "to_oblique":
            return x + a * y, y
        if direction == "from_oblique":
            return x - a * y, y
    else:
        raise ValueError(f"unknown kind {kind!r}")
    raise ValueError(f"unknown direction {direction!r}")


def friction_condition_check(f, alpha) -> float:
    """Margin ``1 - max(f |alpha|)``; the oblique solver needs it positive."""
    f = np.asarray(f, dtype=float)
    a = np.asarray(alpha, dtype=float)
    if f.size == 0:
        return 1.0
    return float(1.0 - np.max(f * np.abs(a)))


def require_friction_condition(f, alpha) -> float:
    margin = friction_condition_check(f, alpha)
    if margin <= 0:
        raise FrictionConditionViolated(
            f"sup f|alpha| = {1 - margin:.6g} >= 1; the oblique contact formulation requires f|alpha| < 1"
        )
    return margin


@dataclass
class LawCheck:
    condition_i: bool
    condition_ii: bool

    @property
    def agree(self) -> bool:
        return self.condition_i == self.condition_ii


def _coulomb_n_t(t_n, t_t, u_n, u_t, f, g, tol):
    if u_n - g > tol or t_n > tol:
        return False
    if abs(t_n * (u_n - g)) > tol:
        return False
    if abs(t_t) > -f * t_n + tol:
        return False
    if abs(u_t) > tol and abs(t_t - f * t_n * np.sign(u_t)) > tol:
        return False
    return True


def _coulomb_oblique(t1, t2, u1, u2, f, alpha, g, tol):
    if u1 - g > tol or t1 > tol:
        return False
    if abs(t1 * (u1 - g)) > tol:
        return False
    lower = f * t1 / (1 + alpha * f)
    upper = -f * t1 / (1 - alpha * f)
    if t2 < lower - tol or t2 > upper + tol:
        return False
    slip = u2 + alpha * g
    if slip > tol and abs(t2 - lower) > tol:
        return False
    if slip < -tol and abs(t2 - upper) > tol:
        return False
    return True


def friction_law_check(t_n, t_t, u_n, u_t, f, alpha, g, tol: float = 1e-9) -> LawCheck:
    """Evaluate the Coulomb-Signorini law in both bases for one point (no prior slip).

    (i) is the law in normal/tangential form, (ii) the oblique form with the
    one-sided bounds ``f t1 / (1 + alpha f) <= t2 <= -f t1 / (1 - alpha f)``
    selected by the sign of ``u2 + alpha g``.
    """
    if f < 0 or not abs(alpha) * f < 1:
        raise ValueError("friction_law_check needs f >= 0 and |alpha| f < 1")
    t1, t2 = oblique_components((t_n, t_t), alpha, "to_oblique", "traction")
    u1, u2 = oblique_components((u_n, u_t), alpha, "to_oblique", "displacement")
    return LawCheck(
        _coulomb_n_t(t_n, t_t, u_n, u_t, f, g, tol),
        _coulomb_oblique(float(t1), float(t2), float(u1), float(u2), f, alpha, g, tol),
    )


def kkt_residuals(u_n, u_t, t_n, t_t, g, f, w_t, alpha=None) -> dict:
    """Maximum violations of the discrete contact conditions on the contact nodes.

    Without ``alpha`` the normal/tangential law is checked; with ``alpha``
    the oblique conditions are used (``w_t`` shifts the slip reference).
    """
    u_n, u_t, t_n, t_t, g, f, w_t = (np.asarray(v, dtype=float) for v in (u_n, u_t, t_n, t_t, g, f, w_t))
    if u_n.size == 0:
        return dict.fromkeys(["gap", "sign", "complementarity", "cone", "sliding"], 0.0)
    if alpha is None:
        slip = u_t - w_t
        out = {
            "gap": np.maximum(u_n - g, 0.0),
            "sign": np.maximum(t_n, 0.0),
            "complementarity": np.abs(t_n * (u_n - g)),
            "cone": np.maximum(np.abs(t_t) + f * t_n, 0.0),
            "sliding": np.abs(t_t * slip - f * t_n * np.abs(slip)),
        }
    else:
        a = np.asarray(alpha, dtype=float)
        t1, t2 = oblique_components((t_n, t_t), a, "to_oblique", "traction")
        u1, u2 = oblique_components((u_n, u_t), a, "to_oblique", "displacement")
        lower = f * t1 / (1 + a * f)
        upper = -f * t1 / (1 - a * f)
        slip = u2 - (w_t - a * g)
        out = {
            "gap": np.maximum(u1 - g, 0.0),
            "sign": np.maximum(t1, 0.0),
            "complementarity": np.abs(t1 * (u1 - g)),
            "cone": np.maximum(np.maximum(lower - t2, t2 - upper), 0.0),
            "sliding": np.maximum(slip, 0.0) * np.abs(t2 - lower) + np.maximum(-slip, 0.0) * np.abs(upper - t2),
        }
    return {k: float(np.max(v)) for k, v in out.items()}


def contact_states(u_n, u_t, t_n, g, f, w_t, tol: float = 1e-9) -> list:
    """Label each node ``separation``, ``contact`` (frictionless), ``stick``, ``slip+`` or ``slip-``."""
    u_n, u_t, t_n, g, f, w_t = (np.asarray(v, dtype=float) for v in (u_n, u_t, t_n, g, f, w_t))
    scale = max(1.0, float(np.max(np.abs(t_n), initial=0.0)))
    dscale = max(1e-300, float(np.max(np.abs(np.concatenate([u_n, u_t, g])), initial=0.0)))
    labels = []
    for k in range(u_n.size):
        if t_n[k] > -tol * scale and u_n[k] - g[k] < 0:
            labels.append("separation")
        elif f[k] == 0:
            labels.append("contact")
        else:
            s = u_t[k] - w_t[k]
            if abs(s) <= tol * max(1.0, dscale):
                labels.append("stick")
            else:
                labels.append("slip+" if s > 0 else "slip-")
    return labels
