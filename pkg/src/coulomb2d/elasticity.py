"""Plane-strain elastic moduli in the scaled (Mandel) convention.

A modulus maps ``(eps_xx, eps_yy, sqrt(2) eps_xy)`` to
``(sig_xx, sig_yy, sqrt(2) sig_xy)`` through a symmetric 3x3 matrix.  Only the
upper triangle ``(L11, L12, L13, L22, L23, L33)`` is stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)


class InvalidModulus(ValueError):
    """Raised for non-physical elastic input."""


@dataclass(frozen=True)
class ElasticModulus:
    L11: float
    L12: float
    L13: float
    L22: float
    L23: float
    L33: float

    @classmethod
    def from_matrix(cls, m) -> "ElasticModulus":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise InvalidModulus(f"expected a 3x3 matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=1e-12, atol=1e-14 * np.abs(m).max()):
            raise InvalidModulus("modulus matrix is not symmetric")
        return cls(m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2])

    @classmethod
    def from_mandel(cls, entries) -> "ElasticModulus":
        vals = [float(v) for v in entries]
        if len(vals) != 6:
            raise InvalidModulus("mandel entries must be [L11, L12, L13, L22, L23, L33]")
        return cls(*vals)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.L11, self.L12, self.L13],
                [self.L12, self.L22, self.L23],
                [self.L13, self.L23, self.L33],
            ]
        )

    def as_tuple(self) -> tuple[float, ...]:
        return (self.L11, self.L12, self.L13, self.L22, self.L23, self.L33)

    def stress(self, eps_xx: float, eps_yy: float, eps_xy: float) -> np.ndarray:
        """Return ``(sig_xx, sig_yy, sig_xy)`` for a tensorial strain."""
        s = self.matrix @ np.array([eps_xx, eps_yy, SQRT2 * eps_xy])
        return np.array([s[0], s[1], s[2] / SQRT2])

    def __mul__(self, factor: float) -> "ElasticModulus":
        return ElasticModulus(*(factor * v for v in self.as_tuple()))

    __rmul__ = __mul__


def isotropic_modulus(E: float, nu: float) -> ElasticModulus:
    """Plane-strain isotropic modulus from Young modulus and Poisson ratio."""
    if not E > 0:
        raise InvalidModulus(f"Young modulus must be positive, got {E}")
    if not -1.0 < nu < 0.5:
        raise InvalidModulus(f"Poisson ratio must lie in (-1, 1/2), got {nu}")
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return ElasticModulus(lam + 2 * mu, lam, 0.0, lam + 2 * mu, 0.0, 2 * mu)


def ellipticity_constant(modulus: ElasticModulus) -> float:
    """Smallest eigenvalue of the Mandel matrix; <= 0 means invalid."""
    return float(np.linalg.eigvalsh(modulus.matrix)[0])


def check_elliptic(modulus: ElasticModulus) -> ElasticModulus:
    if ellipticity_constant(modulus) <= 0:
        raise InvalidModulus("modulus is not positive definite")
    return modulus


def mandel_rotation(theta: float) -> np.ndarray:
    """Mandel matrix of ``eps -> r eps r^T`` for the planar rotation ``r(theta)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [c * c, s * s, -SQRT2 * c * s],
            [s * s, c * c, SQRT2 * c * s],
            [SQRT2 * c * s, -SQRT2 * c * s, c * c - s * s],
        ]
    )


def rotate_modulus(modulus: ElasticModulus, theta: float) -> ElasticModulus:
    """Modulus of the material rotated by ``theta`` (counter-clockwise).

    The components of a fixed material in axes rotated by ``theta`` are
    ``rotate_modulus(modulus, -theta)``.
    """
    R = mandel_rotation(theta)
    m = R @ modulus.matrix @ R.T
    m = 0.5 * (m + m.T)
    return ElasticModulus.from_matrix(m)


def voigt_to_mandel(voigt) -> ElasticModulus:
    """Convert an engineering-Voigt plane stiffness (shear as gamma_xy) to Mandel form."""
    v = np.asarray(voigt, dtype=float)
    if v.shape != (3, 3):
        raise InvalidModulus("Voigt stiffness must be 3x3")
    scale = np.array([1.0, 1.0, SQRT2])
    return ElasticModulus.from_matrix(v * np.outer(scale, scale))


def mandel_to_voigt(modulus: ElasticModulus) -> np.ndarray:
    scale = np.array([1.0, 1.0, 1.0 / SQRT2])
    return modulus.matrix * np.outer(scale, scale)


def modulus_from_json(obj: dict) -> ElasticModulus:
    """Build a modulus from ``{"E":..,"nu":..}``, ``{"mandel":[..]}`` or ``{"voigt":[[..]]}``."""
    if not isinstance(obj, dict):
        raise InvalidModulus("modulus must be a JSON object")
    if obj.get("plane", "strain") != "strain":
        raise InvalidModulus("only plane strain is supported")
    keys = set(obj) - {"plane"}
    if keys == {"E", "nu"}:
        return isotropic_modulus(float(obj["E"]), float(obj["nu"]))
    if keys == {"mandel"}:
        return check_elliptic(ElasticModulus.from_mandel(obj["mandel"]))
    if keys == {"voigt"}:
        return check_elliptic(voigt_to_mandel(obj["voigt"]))
    raise InvalidModulus(f"unrecognised modulus keys {sorted(keys)}")
