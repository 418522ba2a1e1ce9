"""Neumann-to-Dirichlet constants of the anisotropic elastic half-plane.

The half-plane occupies ``y < 0`` with outward normal ``+y``.  A surface
traction ``(t_t, t_n) = (sig_xy, sig_yy)`` produces the surface displacement

    u_n = -C1 log|x| * t_n - C2 log|x| * t_t - C3 sgn(x) * t_t
    u_t = -C4 log|x| * t_t - C2 log|x| * t_n + C3 sgn(x) * t_n

up to an affine field, which is normalised to zero here.  The constants are
obtained from four scalar moments of the inverse characteristic polynomial,
which stays smooth across repeated roots (the isotropic case).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate

from .elasticity import SQRT2, ElasticModulus, rotate_modulus
from .kernels1d import log_potential, sgn_potential

QUAD_EPSABS = 1e-10
QUAD_MAX_EVALS = 1_000_000
_GK_POINTS = 21


class NonInvertibleSystem(ArithmeticError):
    """The traction-to-layer-force system is numerically singular."""


class QuadratureError(ArithmeticError):
    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class CharPoly:
    """Coefficients of ``P(x) = a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0``."""

    a4: float
    a3: float
    a2: float
    a1: float
    a0: float

    @property
    def ascending(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3, self.a4])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (((self.a4 * x + self.a3) * x + self.a2) * x + self.a1) * x + self.a0


@dataclass(frozen=True)
class MomentIntegrals:
    I0: float
    I1: float
    I2: float
    I3: float
    error_estimate: float = 0.0


@dataclass(frozen=True)
class HalfSpaceConstants:
    C1: float
    C2: float
    C3: float
    C4: float

    @property
    def alpha(self) -> float:
        return self.C2 / self.C1

    @property
    def determinant(self) -> float:
        """``pi^2 C1 C4 - pi^2 C2^2 - 4 C3^2``; positive for any elliptic modulus."""
        return math.pi**2 * (self.C1 * self.C4 - self.C2**2) - 4.0 * self.C3**2

    def scaled(self, factor: float) -> "HalfSpaceConstants":
        return HalfSpaceConstants(
            factor * self.C1, factor * self.C2, factor * self.C3, factor * self.C4
        )

    def as_dict(self) -> dict:
        return {"C1": self.C1, "C2": self.C2, "C3": self.C3, "C4": self.C4, "alpha": self.alpha}


def _symbol_polys(m: ElasticModulus):
    """Entries of the acoustic matrix ``M(1, x)`` as ascending polynomials in ``x``."""
    L11, L12, L13, L22, L23, L33 = m.as_tuple()
    M11 = np.array([L11, SQRT2 * L13, 0.5 * L33])
    M12 = np.array([0.5 * SQRT2 * L13, 0.5 * L33 + L12, 0.5 * SQRT2 * L23])
    M22 = np.array([0.5 * L33, SQRT2 * L23, L22])
    return M11, M12, M22


def _traction_polys(m: ElasticModulus):
    """Rows of ``B(1, x)``: ``(sig_xy, sig_yy) = i B (u_x, u_y)`` in Fourier variables."""
    L11, L12, L13, L22, L23, L33 = m.as_tuple()
    return [
        [np.array([L13 / SQRT2, 0.5 * L33]), np.array([0.5 * L33, L23 / SQRT2])],
        [np.array([L12, L23 / SQRT2]), np.array([L23 / SQRT2, L22])],
    ]


def symbol_matrix(m: ElasticModulus, xi: float, eta: float) -> np.ndarray:
    """Acoustic matrix ``M(xi, eta)`` of the plane equilibrium operator."""
    L11, L12, L13, L22, L23, L33 = m.as_tuple()
    m11 = L11 * xi**2 + SQRT2 * L13 * xi * eta + 0.5 * L33 * eta**2
    m12 = 0.5 * SQRT2 * L13 * xi**2 + (0.5 * L33 + L12) * xi * eta + 0.5 * SQRT2 * L23 * eta**2
    m22 = 0.5 * L33 * xi**2 + SQRT2 * L23 * xi * eta + L22 * eta**2
    return np.array([[m11, m12], [m12, m22]])


def char_poly(m: ElasticModulus) -> CharPoly:
    L11, L12, L13, L22, L23, L33 = m.as_tuple()
    return CharPoly(
        a4=0.5 * (L22 * L33 - L23**2),
        a3=SQRT2 * (L13 * L22 - L23 * L12),
        a2=L11 * L22 + L13 * L23 - L33 * L12 - L12**2,
        a1=SQRT2 * (L11 * L23 - L13 * L12),
        a0=0.5 * (L11 * L33 - L13**2),
    )


def _quad_tan(fun, budget):
    """Integrate ``fun`` over the real line after ``x = tan(theta)``."""

    def g(theta):
        c = math.cos(theta)
        return fun(math.tan(theta)) / (c * c)

    h = 0.5 * math.pi
    val, err, info = integrate.quad(
        g, -h, h, epsabs=QUAD_EPSABS, epsrel=1e-13, limit=budget, full_output=True
    )[:3]
    if info["neval"] > QUAD_MAX_EVALS or err > QUAD_EPSABS * 10:
        raise QuadratureError("moment integral did not converge", err)
    return val, err


def moment_integrals(P: CharPoly, *, budget: int | None = None) -> MomentIntegrals:
    """``I0..I2 = int x^k / P`` and the regularised third moment ``I3``."""
    if P.a4 <= 0:
        raise ValueError("characteristic polynomial must have a positive leading coefficient")
    if budget is None:
        budget = QUAD_MAX_EVALS // (2 * _GK_POINTS)
    a = P.ascending

    def p(x):
        return (((a[4] * x + a[3]) * x + a[2]) * x + a[1]) * x + a[0]

    I0, e0 = _quad_tan(lambda x: 1.0 / p(x), budget)
    I1, e1 = _quad_tan(lambda x: x / p(x), budget)
    I2, e2 = _quad_tan(lambda x: x * x / p(x), budget)
    I3, e3 = _quad_tan(lambda x: a[4] * x**3 / p(x) - x / (1.0 + x * x), budget)
    return MomentIntegrals(I0, I1, I2, I3, error_estimate=max(e0, e1, e2, e3))


def _pad(p, n=4):
    return np.pad(p, (0, n - len(p)))


def n2d_matrix(m: ElasticModulus, moments: MomentIntegrals | None = None) -> np.ndarray:
    """Complex 2x2 matrix ``H`` with ``u_hat(xi, 0) = H T / (sqrt(2 pi) |xi|)`` for ``xi > 0``.

    Rows and columns are ordered ``(x, y) = (tangent, normal)``.
    """
    M11, M12, M22 = _symbol_polys(m)
    P = char_poly(m)
    if moments is None:
        moments = moment_integrals(P)
    I = np.array([moments.I0, moments.I1, moments.I2])
    adj = [[M22, -M12], [-M12, M11]]

    # surface displacement per unit layer force
    G = np.array([[float(_pad(adj[i][j], 3) @ I) for j in range(2)] for i in range(2)])

    # traction just below the layer per unit layer force; the cubic part of
    # B adj(M) / P is split into a regularised moment and the jump term
    B = _traction_polys(m)
    J = np.empty((2, 2))
    jump = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            N = _pad(npoly.polyadd(npoly.polymul(B[i][0], adj[0][j]), npoly.polymul(B[i][1], adj[1][j])))
            J[i, j] = N[0] * I[0] + N[1] * I[1] + N[2] * I[2] + N[3] / P.a4 * moments.I3
            jump[i, j] = N[3] / P.a4
    Q = math.pi * jump + 1j * J
    scale = np.abs(Q).max() ** 2
    if abs(np.linalg.det(Q)) < 1e-10 * scale:
        raise NonInvertibleSystem("layer-force system is singular; modulus not elliptic?")
    return G @ np.linalg.inv(Q)


def n2d_constants(m: ElasticModulus) -> HalfSpaceConstants:
    """Neumann-to-Dirichlet constants ``C1..C4`` for a homogeneous half-plane."""
    H = n2d_matrix(m) / math.pi
    # H / pi = [[C4, C2 - 2i C3 / pi], [C2 + 2i C3 / pi, C1]]
    C4 = H[0, 0].real
    C1 = H[1, 1].real
    C2 = 0.5 * (H[0, 1].real + H[1, 0].real)
    C3 = 0.25 * math.pi * (H[1, 0].imag - H[0, 1].imag)
    return HalfSpaceConstants(C1=C1, C2=C2, C3=C3, C4=C4)


def isotropic_constants(E: float, nu: float) -> HalfSpaceConstants:
    c1 = 2.0 * (1.0 - nu * nu) / (math.pi * E)
    return HalfSpaceConstants(C1=c1, C2=0.0, C3=(1.0 - 2.0 * nu) * (1.0 + nu) / (2.0 * E), C4=c1)


def boundary_alpha(m: ElasticModulus, tangent_angle: float) -> float:
    """``C2 / C1`` in the boundary frame whose x-axis is the tangent at ``tangent_angle``.

    The outward normal is the tangent rotated by +90 degrees.
    """
    local = rotate_modulus(m, -tangent_angle)
    return n2d_constants(local).alpha


def iso_fundamental_displacement(E, nu, T, x, y):
    """Displacement of the isotropic half-plane ``y < 0`` under a point force ``T``.

    ``(x, y) = (0, 0)`` is rejected; on ``y = 0`` the limit from inside is used.
    """
    x = float(x)
    y = float(y)
    if x == 0.0 and y == 0.0:
        raise ValueError("fundamental solution is singular at the origin")
    if y > 0:
        raise ValueError("point must lie in the closed half-plane y <= 0")
    Tx, Ty = T
    r2 = x * x + y * y
    at = math.atan(x / y) if y < 0 else -0.5 * math.pi * math.copysign(1.0, x)
    k = 1.0 / (math.pi * E)
    log_term = -(1 - nu * nu) * math.log(r2)
    shear = (1 + nu) * x * y / r2
    skew = (1 - 2 * nu) * (1 + nu) * at
    ux_x = k * (log_term - (1 + nu) * y * y / r2)
    ux_y = k * (-skew + shear)
    uy_x = k * (skew + shear)
    uy_y = k * (log_term + (1 + nu) * y * y / r2)
    return np.array([Tx * ux_x + Ty * ux_y, Tx * uy_x + Ty * uy_y])


def surface_response(c: HalfSpaceConstants, nodes, t_n, t_t, points=None):
    """Surface displacements ``(u_n, u_t)`` for piecewise-constant tractions on ``nodes``.

    Evaluated at element midpoints unless ``points`` is given.
    """
    nodes = np.asarray(nodes, dtype=float)
    if points is None:
        points = 0.5 * (nodes[1:] + nodes[:-1])
    log_n = log_potential(nodes, t_n, points)
    log_t = log_potential(nodes, t_t, points)
    sgn_n = sgn_potential(nodes, t_n, points)
    sgn_t = sgn_potential(nodes, t_t, points)
    u_n = -c.C1 * log_n - c.C2 * log_t - c.C3 * sgn_t
    u_t = -c.C4 * log_t - c.C2 * log_n + c.C3 * sgn_n
    return u_n, u_t
