import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb2d.elasticity import ElasticModulus, isotropic_modulus, rotate_modulus
from coulomb2d.halfspace import (
    CharPoly,
    HalfSpaceConstants,
    boundary_alpha,
    char_poly,
    iso_fundamental_displacement,
    isotropic_constants,
    moment_integrals,
    n2d_constants,
    n2d_matrix,
    surface_response,
    symbol_matrix,
)

from .util import random_modulus, stroh_n2d


def test_char_poly_is_symbol_determinant():
    rng = np.random.default_rng(11)
    for _ in range(5):
        m = random_modulus(rng)
        P = char_poly(m)
        for x in np.linspace(-5, 5, 23):
            assert np.linalg.det(symbol_matrix(m, 1.0, x)) == pytest.approx(P(x), rel=1e-12, abs=1e-12)


def test_isotropic_char_poly_double_roots():
    P = char_poly(isotropic_modulus(1.0, 0.0))
    x = np.linspace(-3, 3, 31)
    np.testing.assert_allclose(P(x) / (1 + x * x) ** 2, P.a4, rtol=1e-13)


def test_isotropic_char_poly_positive_on_grid():
    P = char_poly(isotropic_modulus(1.0, 0.3))
    assert np.all(P(np.linspace(-100, 100, 20001)) > 0)


def test_orthotropic_char_poly_is_even():
    P = char_poly(ElasticModulus(2.0, 0.3, 0.0, 1.0, 0.0, 1.0))
    assert P.a3 == 0.0 and P.a1 == 0.0
    assert P.a4 > 0


def test_moments_of_squared_quadratic():
    mo = moment_integrals(CharPoly(1.0, 0.0, 2.0, 0.0, 1.0))
    assert mo.I0 == pytest.approx(math.pi / 2, abs=1e-11)
    assert mo.I1 == pytest.approx(0.0, abs=1e-11)
    assert mo.I2 == pytest.approx(math.pi / 2, abs=1e-11)
    assert mo.I3 == pytest.approx(0.0, abs=1e-11)


def test_moments_match_brute_force_quadrature():
    P = char_poly(random_modulus(np.random.default_rng(5)))
    mo = moment_integrals(P)
    from scipy import integrate

    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=2000)
    ref = [integrate.quad(lambda x, k=k: x**k / P(x), -np.inf, np.inf, **kw)[0] for k in range(3)]
    ref.append(integrate.quad(lambda x: P.a4 * x**3 / P(x) - x / (1 + x * x), -np.inf, np.inf, **kw)[0])
    np.testing.assert_allclose([mo.I0, mo.I1, mo.I2, mo.I3], ref, atol=1e-9)


def test_isotropic_moment_signs():
    mo = moment_integrals(char_poly(isotropic_modulus(1.0, 0.3)))
    assert mo.I1 == pytest.approx(0, abs=1e-12)
    assert mo.I3 == pytest.approx(0, abs=1e-12)
    assert mo.I0 > 0 and mo.I2 > 0


def test_isotropic_constants_closed_form():
    c = n2d_constants(isotropic_modulus(1.0, 0.3))
    assert c.C1 == pytest.approx(2 * 0.91 / math.pi, rel=1e-10)
    assert c.C4 == pytest.approx(c.C1, rel=1e-10)
    assert c.C2 == pytest.approx(0, abs=1e-12)
    assert c.C3 == pytest.approx(0.26, rel=1e-10)
    assert c.C1 == pytest.approx(0.57932, abs=1e-5)


def test_constants_scale_inversely_with_E():
    c1 = n2d_constants(isotropic_modulus(1.0, 0.3))
    c2 = n2d_constants(isotropic_modulus(2.0, 0.3))
    for a, b in zip((c1.C1, c1.C3, c1.C4), (c2.C1, c2.C3, c2.C4)):
        assert b == pytest.approx(a / 2, rel=1e-10)


def test_matches_stroh_eigenvector_oracle():
    rng = np.random.default_rng(21)
    for _ in range(10):
        m = random_modulus(rng)
        np.testing.assert_allclose(n2d_matrix(m) / math.pi, stroh_n2d(m), atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_positivity_and_determinant(seed):
    c = n2d_constants(random_modulus(np.random.default_rng(seed), floor=0.05))
    assert c.C1 > 0 and c.C4 > 0
    assert c.determinant > 0


def test_rotated_orthotropic_stays_positive():
    m = rotate_modulus(ElasticModulus(3.0, 0.5, 0.0, 1.0, 0.0, 0.8), 0.4)
    c = n2d_constants(m)
    assert c.C1 > 0 and c.C4 > 0 and c.determinant > 0


def test_alpha_isotropic_vanishes_for_all_angles():
    iso = isotropic_modulus(1.0, 0.3)
    for th in np.linspace(0, 2 * math.pi, 9):
        assert boundary_alpha(iso, th) == pytest.approx(0, abs=1e-12)


def test_alpha_orthotropic_aligned_vanishes():
    assert boundary_alpha(ElasticModulus(2.0, 0.3, 0.0, 1.0, 0.0, 1.0), 0.0) == pytest.approx(0, abs=1e-12)


def test_alpha_triclinic_nonzero_and_resolution_stable():
    m = ElasticModulus(2.0, 0.3, 0.2, 1.0, -0.1, 1.0)
    a = boundary_alpha(m, 0.0)
    assert abs(a) > 1e-3 and math.isfinite(a)
    P = char_poly(m)
    lo = moment_integrals(P, budget=2000)
    hi = moment_integrals(P, budget=20000)
    H_lo, H_hi = n2d_matrix(m, lo), n2d_matrix(m, hi)
    assert H_lo[0, 1].real / H_lo[1, 1].real == pytest.approx(H_hi[0, 1].real / H_hi[1, 1].real, abs=1e-8)


def test_fundamental_solution_even_normal_response():
    for r in (0.1, 1.0, 3.0):
        a = iso_fundamental_displacement(1.0, 0.3, (0, 1), -r, 0.0)
        b = iso_fundamental_displacement(1.0, 0.3, (0, 1), r, 0.0)
        assert a[1] == pytest.approx(b[1], rel=1e-14)


def test_fundamental_solution_jump():
    E, nu = 1.0, 0.3
    left = iso_fundamental_displacement(E, nu, (1, 0), -1e-8, 0.0)
    right = iso_fundamental_displacement(E, nu, (1, 0), 1e-8, 0.0)
    assert abs(left[1] - right[1]) == pytest.approx(0.52, rel=1e-12)
    assert abs(left[1] - right[1]) == pytest.approx((1 - 2 * nu) * (1 + nu) / E, rel=1e-12)


def test_fundamental_solution_rejects_origin_and_upper_half():
    with pytest.raises(ValueError):
        iso_fundamental_displacement(1, 0.3, (1, 0), 0.0, 0.0)
    with pytest.raises(ValueError):
        iso_fundamental_displacement(1, 0.3, (1, 0), 0.0, 1.0)


def test_fundamental_interior_continuity():
    # the interior field approaches the surface trace
    a = iso_fundamental_displacement(1.0, 0.3, (1, 1), 0.7, -1e-9)
    b = iso_fundamental_displacement(1.0, 0.3, (1, 1), 0.7, 0.0)
    np.testing.assert_allclose(a, b, atol=1e-8)


def _point_load(h=1e-4):
    return np.array([-h / 2, h / 2]), np.array([1.0 / h])


def test_surface_response_point_normal_load():
    c = HalfSpaceConstants(0.7, 0.0, 0.2, 0.9)
    nodes, dens = _point_load()
    x = np.array([0.3, 0.8, 2.0])
    u_n, _ = surface_response(c, nodes, dens, np.zeros(1), x)
    np.testing.assert_allclose(u_n, -c.C1 * np.log(np.abs(x)), atol=1e-7)


def test_surface_response_tangential_jump():
    c = HalfSpaceConstants(0.7, 0.1, 0.2, 0.9)
    nodes, dens = _point_load()
    u_n, _ = surface_response(c, nodes, np.zeros(1), dens, np.array([-1e-2, 1e-2]))
    jump = u_n[0] - u_n[1]
    assert jump == pytest.approx(2 * c.C3, rel=1e-6)


def test_surface_response_matches_isotropic_fundamental_solution():
    E, nu = 1.5, 0.25
    c = isotropic_constants(E, nu)
    nodes, dens = _point_load()
    x = np.array([-2.0, -0.5, 0.4, 1.3])
    u_n, u_t = surface_response(c, nodes, np.zeros(1), dens, x)
    ref = np.array([iso_fundamental_displacement(E, nu, (1, 0), xi, 0.0) for xi in x])
    # equal up to an additive constant
    d_n = u_n - ref[:, 1]
    d_t = u_t - ref[:, 0]
    assert np.ptp(d_n) < 1e-7
    assert np.ptp(d_t) < 1e-7


def test_isotropic_constants_function_matches_pipeline():
    a = isotropic_constants(2.0, 0.1)
    b = n2d_constants(isotropic_modulus(2.0, 0.1))
    np.testing.assert_allclose([a.C1, a.C2, a.C3, a.C4], [b.C1, b.C2, b.C3, b.C4], rtol=1e-9, atol=1e-12)
