import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb2d.bem import (
    LineMesh,
    assemble_A,
    assemble_a,
    assemble_S,
    classify,
    coercivity_indicator,
    critical_friction,
    decomposition_identity,
    discrete_gap,
    equilibrium_density,
    equilibrium_potential,
    fourier_sgn_check,
    gap_function,
    nonexistence_probe,
    smooth_bump,
    solve_steady_sliding,
)
from coulomb2d.halfspace import HalfSpaceConstants, isotropic_constants
from coulomb2d.kernels1d import log_potential, log_primitive, log_primitive2, sgn_potential
from coulomb2d.vi import ConeVI, SolveStatus, lemke_solve, psor_solve, vi_residual

SYNTH = HalfSpaceConstants(1.0, 0.5, 0.3, 1.0)


# -- mesh and kernels ---------------------------------------------------------------


def test_line_mesh_validation():
    with pytest.raises(ValueError):
        LineMesh(np.array([-1.0, 0.5, 0.2, 1.0]))
    with pytest.raises(ValueError):
        LineMesh(np.array([-1.0, 0.9]))
    m = LineMesh.graded(10)
    assert m.n == 10 and m.lengths.sum() == pytest.approx(2.0)
    assert m.lengths[0] < m.lengths[5]


def test_log_primitives_differentiate_correctly():
    z = np.array([-2.0, -0.3, 0.4, 1.7])
    h = 1e-6
    d1 = (log_primitive(z + h) - log_primitive(z - h)) / (2 * h)
    np.testing.assert_allclose(d1, np.log(np.abs(z)), atol=1e-8)
    d2 = (log_primitive2(z + h) - 2 * log_primitive2(z) + log_primitive2(z - h)) / h**2
    np.testing.assert_allclose(d2, np.log(np.abs(z)), atol=1e-3)


def test_potentials_single_cell():
    nodes = np.array([0.0, 1.0])
    x = np.array([2.0])
    # int_0^1 log|2 - s| ds = 2 log 2 - 1
    assert log_potential(nodes, [1.0], x)[0] == pytest.approx(2 * math.log(2) - 1)
    assert sgn_potential(nodes, [1.0], np.array([0.25]))[0] == pytest.approx(0.25 - 0.75)


def test_single_element_S():
    S = assemble_S(LineMesh.uniform(1))
    assert S[0, 0] == pytest.approx(6 - 4 * math.log(2), abs=1e-12)
    assert S[0, 0] == pytest.approx(3.227411, abs=1e-6)


def test_two_elements_S_symmetric():
    S = assemble_S(LineMesh.uniform(2))
    assert S[0, 1] == S[1, 0]
    assert S[0, 0] == pytest.approx(S[1, 1], abs=1e-14)


def _gauss_double(a, b, c, d, kernel, n=40):
    x, w = np.polynomial.legendre.leggauss(n)
    xs = 0.5 * (b - a) * x + 0.5 * (a + b)
    ss = 0.5 * (d - c) * x + 0.5 * (c + d)
    K = kernel(xs[:, None] - ss[None, :])
    return 0.25 * (b - a) * (d - c) * float(w @ K @ w)


def test_S_matches_tensor_quadrature_on_separated_cells():
    mesh = LineMesh(np.array([-1.0, -0.6, -0.1, 0.3, 1.0]))
    S = assemble_S(mesh)
    nodes = mesh.nodes
    for i, j in [(0, 2), (0, 3), (1, 3), (3, 0)]:
        ref = -_gauss_double(nodes[i], nodes[i + 1], nodes[j], nodes[j + 1], lambda z: np.log(np.abs(z)))
        assert S[i, j] == pytest.approx(ref, rel=1e-12)


def test_S_positive_definite():
    for n in (16, 256):
        assert np.linalg.eigvalsh(assemble_S(LineMesh.uniform(n)))[0] > 0


def test_A_properties():
    mesh = LineMesh(np.array([-1.0, -0.5, 0.2, 1.0]))
    A = assemble_A(mesh)
    assert np.all(np.diag(A) == 0)
    assert np.array_equal(A, -A.T)
    L = mesh.lengths
    assert A[2, 0] == pytest.approx(L[2] * L[0], rel=1e-14)
    A2 = assemble_A(LineMesh.uniform(2))
    assert A2[1, 0] == pytest.approx(1.0) and A2[0, 1] == pytest.approx(-1.0)


# -- the steady-sliding form ------------------------------------------------------------


def test_frictionless_form_is_C1_S():
    mesh = LineMesh.uniform(8)
    M, kappa, cls = assemble_a(mesh, SYNTH, 0.0, 1)
    np.testing.assert_allclose(M, SYNTH.C1 * assemble_S(mesh))
    assert kappa == SYNTH.C1 and cls == "coercive"


def test_isotropic_indicator_independent_of_friction():
    c = isotropic_constants(1.0, 0.3)
    for f in (0.0, 1.0, 10.0, 1e3):
        assert coercivity_indicator(c, f, 1) == pytest.approx(c.C1)
    assert critical_friction(c) == math.inf


def test_noncoercive_classification():
    assert coercivity_indicator(SYNTH, 3.0, 1) == pytest.approx(-0.5)
    assert classify(-0.5) == "non-coercive"
    assert classify(0.0) == "skew-degenerate"
    assert critical_friction(SYNTH) == pytest.approx(2.0)
    # the other sliding direction stays coercive
    assert coercivity_indicator(SYNTH, 3.0, -1) > 0


def test_invalid_friction_inputs():
    with pytest.raises(ValueError):
        assemble_a(LineMesh.uniform(2), SYNTH, -1.0, 1)
    with pytest.raises(ValueError):
        assemble_a(LineMesh.uniform(2), SYNTH, 1.0, 0)


# -- gaps and the solve ----------------------------------------------------------------------


def test_gap_functions():
    x = np.array([-0.5, 0.0, 0.5])
    np.testing.assert_allclose(gap_function({"kind": "flat", "params": {"value": -2}})(x), -2)
    np.testing.assert_allclose(gap_function({"kind": "parabola", "params": {"curvature": 2, "delta": 0.1}})(x),
                               [0.4, -0.1, 0.4])
    tab = gap_function({"kind": "table", "params": {"x": [-1, 1], "g": [0, 2]}})
    np.testing.assert_allclose(tab(x), [0.5, 1.0, 1.5])
    with pytest.raises(ValueError):
        gap_function({"kind": "wavy"})
    mesh = LineMesh.uniform(4)
    np.testing.assert_allclose(discrete_gap(mesh, lambda z: np.ones_like(z)), mesh.lengths)


def test_nonnegative_gap_gives_zero_traction():
    mesh = LineMesh.uniform(32)
    res = solve_steady_sliding(mesh, SYNTH, 1.0, 1, gap_function({"kind": "flat", "params": {"value": 0.5}}))
    assert res.report.solved
    assert np.all(res.t == 0)


def test_flat_punch_profile_shape():
    n = 256
    mesh = LineMesh.uniform(n)
    c = HalfSpaceConstants(2.0, 0.0, 0.3, 1.0)
    res = solve_steady_sliding(mesh, c, 0.0, 1, gap_function({"kind": "flat", "params": {"value": -1.0}}))
    x = mesh.midpoints
    exact = -1.0 / (c.C1 * math.pi * math.log(2) * np.sqrt(1 - x * x))
    inner = np.abs(x) < 0.8
    np.testing.assert_allclose(res.t[inner], exact[inner], rtol=2e-2)
    assert res.total_load == pytest.approx(-1 / (c.C1 * math.log(2)), rel=1e-2)


def test_flat_punch_load_scales_with_gap():
    mesh = LineMesh.uniform(64)
    r1 = solve_steady_sliding(mesh, SYNTH, 0.0, 1, gap_function({"kind": "flat", "params": {"value": -1}}))
    r3 = solve_steady_sliding(mesh, SYNTH, 0.0, 1, gap_function({"kind": "flat", "params": {"value": -3}}))
    assert r3.total_load == pytest.approx(3 * r1.total_load, rel=1e-9)


def test_parabolic_patch_interior_and_growing():
    mesh = LineMesh.uniform(128)
    patches = []
    for delta in (0.05, 0.1, 0.2):
        g = gap_function({"kind": "parabola", "params": {"curvature": 1.0, "delta": delta}})
        res = solve_steady_sliding(mesh, SYNTH, 0.0, 1, g)
        p = ConeVI(assemble_a(mesh, SYNTH, 0, 1)[0], discrete_gap(mesh, g))
        t_l, rep_l = lemke_solve(p)
        assert rep_l.solved
        np.testing.assert_allclose(res.t, t_l, atol=1e-6)
        contact = np.flatnonzero(res.t < 0)
        assert contact.size > 0
        assert res.t[0] == 0.0 and res.t[-1] == 0.0
        # a single connected patch
        assert np.all(np.diff(contact) == 1)
        patches.append(contact.size)
    assert patches[0] < patches[1] < patches[2]


@pytest.mark.parametrize("f", [0.5, 1.0, 1.5])
def test_psor_and_lemke_agree_below_threshold(f):
    mesh = LineMesh.uniform(48)
    g = gap_function({"kind": "parabola", "params": {"curvature": 1.0, "delta": 0.2}})
    M, kappa, _ = assemble_a(mesh, SYNTH, f, 1)
    assert kappa > 0
    p = ConeVI(M, discrete_gap(mesh, g))
    t1, r1 = psor_solve(p)
    t2, r2 = lemke_solve(p)
    assert r1.solved and r2.solved
    np.testing.assert_allclose(t1, t2, atol=1e-6)


def test_non_coercive_short_circuits():
    mesh = LineMesh.uniform(16)
    res = solve_steady_sliding(mesh, SYNTH, 3.0, 1, gap_function({"kind": "flat", "params": {}}))
    assert res.report.status is SolveStatus.NON_COERCIVE
    assert res.kappa == pytest.approx(-0.5)
    assert res.probe is not None and res.probe.evidence


# -- nonexistence ----------------------------------------------------------------------------


def test_bump_is_smooth_and_supported():
    x = np.linspace(-1, 1, 401)
    b = smooth_bump(x, radius=0.5)
    assert b.max() == pytest.approx(1.0)
    assert np.all(b[np.abs(x) >= 0.5] == 0)
    assert np.all(b >= 0)


def test_probe_rejects_coercive_regime():
    with pytest.raises(ValueError):
        nonexistence_probe(LineMesh.uniform(8), SYNTH, 1.0, 1)


def test_probe_reports_evidence_above_threshold():
    rep = nonexistence_probe(LineMesh.uniform(32), SYNTH, 3.0, 1)
    assert rep.kappa == pytest.approx(-0.5)
    assert rep.rigorous and rep.evidence
    assert rep.regime == "non-coercive"
    assert rep.failure_mode in ("ray-termination", "divergence")


def test_probe_at_vanishing_indicator_is_skew_degenerate():
    rep = nonexistence_probe(LineMesh.uniform(16), SYNTH, 2.0, 1)
    assert rep.kappa == 0.0
    assert rep.regime == "skew-degenerate"
    assert not rep.rigorous
    assert "skew" in rep.notes


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(2.05, 6.0))
def test_negative_indicator_form_is_negative_definite(seed, f):
    # the algebraic fact behind the nonexistence argument
    mesh = LineMesh.uniform(12)
    M, kappa, _ = assemble_a(mesh, SYNTH, f, 1)
    v = np.random.default_rng(seed).normal(size=mesh.n)
    assert kappa < 0
    assert v @ M @ v < 0


# -- diagnostics -----------------------------------------------------------------------------


def test_equilibrium_density_integrates_to_one():
    mesh = LineMesh.graded(200)
    assert float(equilibrium_density(mesh, "average") @ mesh.lengths) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        equilibrium_density(mesh, "spline")


def test_equilibrium_potential_improves_with_refinement():
    errs = [np.abs(equilibrium_potential(LineMesh.graded(n), "average") - math.log(2)).max() for n in (100, 400)]
    assert errs[1] < errs[0]


def test_decomposition_identity_converges():
    rng = np.random.default_rng(1)
    gaps = []
    for n in (32, 128, 512):
        mesh = LineMesh.uniform(n)
        t = -1.0 - 0.5 * np.cos(3 * mesh.midpoints) + 0.0 * rng.random(n)
        lhs, rhs = decomposition_identity(mesh, t)
        gaps.append(abs(lhs - rhs) / abs(lhs))
    assert gaps[2] < gaps[1] < gaps[0]
    assert gaps[2] < 1e-2


def test_fourier_multiplier_of_sgn():
    assert fourier_sgn_check() < 1e-10
