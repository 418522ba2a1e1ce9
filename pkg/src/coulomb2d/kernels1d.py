"""Closed-form antiderivatives of the ``log|x|`` and ``sgn(x)`` line kernels.

These make every piecewise-constant integral on a line mesh exact.
"""

import numpy as np


def log_primitive(z):
    """``G`` with ``G' = log|z|``, continuous at 0 (``G(0) = 0``)."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(az > 0, z * np.log(az) - z, 0.0)
    return out


def log_primitive2(z):
    """``F`` with ``F'' = log|z|`` and ``F(0) = 0``."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(az > 0, 0.5 * z * z * np.log(az) - 0.75 * z * z, 0.0)
    return out


def sgn_primitive(z):
    return np.abs(np.asarray(z, dtype=float))


def sgn_primitive2(z):
    z = np.asarray(z, dtype=float)
    return 0.5 * z * np.abs(z)


def log_potential(nodes, density, points):
    """``(log|.| * t)(x)`` for piecewise-constant ``density`` on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(points, dtype=float)[:, None]
    cell = log_primitive(x - nodes[None, :-1]) - log_primitive(x - nodes[None, 1:])
    return cell @ np.asarray(density, dtype=float)


def sgn_potential(nodes, density, points):
    """``(sgn * t)(x)`` for piecewise-constant ``density`` on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(points, dtype=float)[:, None]
    cell = sgn_primitive(x - nodes[None, :-1]) - sgn_primitive(x - nodes[None, 1:])
    return cell @ np.asarray(density, dtype=float)


def double_cell_integrals(nodes, primitive2):
    """Matrix of ``int_{E_i} int_{E_j} k(x - s) ds dx`` from a second primitive of ``k``."""
    nodes = np.asarray(nodes, dtype=float)
    a = nodes[:-1, None]
    b = nodes[1:, None]
    c = nodes[None, :-1]
    d = nodes[None, 1:]
    return primitive2(b - c) - primitive2(a - c) - primitive2(b - d) + primitive2(a - d)
