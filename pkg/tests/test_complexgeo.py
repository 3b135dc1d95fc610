import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amdkit.complexgeo import (
    Codim2Plane,
    ComplexGeometryError,
    ComplexStructure,
    holomorphic_defect,
    kahler_form,
    lagrangian_defect,
    reflect_and_unite_check,
    rotated_calibration_family,
    rotation_about_plane,
    sl_form,
    sl_phase_defect,
)
from amdkit.exterior import comass_sample, evaluate
from amdkit.geometry import ExprImmersion

CS2, CS3 = ComplexStructure.standard(2), ComplexStructure.standard(3)


def unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def random_unitary(rng, n):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_standard_structure():
    J = CS3.J
    assert np.allclose(J @ J, -np.eye(6))
    assert np.allclose(J @ unit(6, 0), unit(6, 3))
    with pytest.raises(ComplexGeometryError):
        ComplexStructure(((0, 1), (1, 2)))


def test_kahler_form_is_dx_dy():
    w = kahler_form(CS2).form
    assert evaluate(w, np.column_stack([unit(4, 0), unit(4, 2)])) == pytest.approx(1.0)
    u, v = np.random.default_rng(0).normal(size=(2, 4))
    assert evaluate(w, np.column_stack([u, v])) == pytest.approx(u @ CS2.J.T @ v)


@given(st.integers(0, 2**31), st.floats(0, 2 * math.pi))
@settings(max_examples=30, deadline=None)
def test_sl_form_is_real_part_of_complex_volume(seed, theta):
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(6, 3))
    dz = np.linalg.det(CS3.complex_coords(V))
    got = evaluate(sl_form(CS3, theta).form, V)
    assert got == pytest.approx((cmath.exp(-1j * theta) * dz).real, abs=1e-10)


def test_calibrations_have_comass_one():
    for w in (kahler_form(CS2).form, sl_form(CS3).form, sl_form(CS3, 0.7).form):
        c = comass_sample(w, 4000, rng_seed=2)
        assert 0.95 < c <= 1.0 + 1e-12


def test_realify_and_complex_determinant():
    U = random_unitary(np.random.default_rng(1), 3)
    M = CS3.realify(U)
    assert np.allclose(M @ CS3.J, CS3.J @ M)
    assert CS3.complex_determinant(M) == pytest.approx(np.linalg.det(U))


def test_rotation_about_complex_plane_is_unitary_with_phase_alpha():
    P = Codim2Plane(np.array([unit(6, 2), unit(6, 5)]))  # x3 = y3 = 0, complex
    assert P.is_complex(CS3)
    for alpha in (0.3, 2 * math.pi / 3, math.pi):
        R = rotation_about_plane(P, alpha)
        assert np.allclose(R.T @ R, np.eye(6))
        assert np.allclose(R @ CS3.J, CS3.J @ R)
        assert CS3.complex_determinant(R) == pytest.approx(cmath.exp(1j * alpha))
    # the half turn is multiplication by -1 on z3: det -1, so it reverses the SL form
    R = rotation_about_plane(P, math.pi)
    assert CS3.complex_determinant(R) == pytest.approx(-1.0)


def test_rotation_about_non_complex_plane_is_not_complex_linear():
    P = Codim2Plane(np.array([unit(4, 2), unit(4, 3)]))  # P = span(e1, e2), normal space spanned by y1, y2
    assert P.complex_defect(CS2) == pytest.approx(1.0)
    R = rotation_about_plane(P, 1.0)
    assert not np.allclose(R @ CS2.J, CS2.J @ R)


def test_plane_from_span_and_validation():
    P = Codim2Plane.from_span([unit(4, 0), unit(4, 1)])
    B = P.normal_basis
    assert np.allclose(B @ unit(4, 0), 0) and np.allclose(B @ unit(4, 1), 0)
    with pytest.raises(ComplexGeometryError):
        Codim2Plane(np.array([[1.0, 0, 0, 0], [1.0, 0, 0, 0]]))
    with pytest.raises(ComplexGeometryError):
        Codim2Plane.from_span([unit(4, 0)])


@pytest.mark.parametrize("k", range(2, 9))
def test_vanishing_sum_is_invariant_under_flipping_normal_basis(k):
    P = Codim2Plane(np.array([unit(6, 2), unit(6, 5)]))
    for plane in (P, P.flipped()):
        forms, rep = rotated_calibration_family(sl_form(CS3), plane, k, comass_trials=200)
        assert rep.passed and rep.value("sum_norm") < 1e-10
        assert len(forms) == k


def test_vanishing_sum_fails_for_other_planes():
    # rotating the SL form about a plane containing the x3 direction: sum does not cancel
    P = Codim2Plane(np.array([unit(6, 0), unit(6, 1)]))
    _, rep = rotated_calibration_family(sl_form(CS3), P, 3, comass_trials=100)
    assert rep.value("sum_norm") > 1e-3
    with pytest.raises(ComplexGeometryError):
        rotated_calibration_family(sl_form(CS3), P, 1)


def test_real_slice_is_special_lagrangian():
    R3 = ExprImmersion(["a", "b", "c"], ["a", "b", "c", "0", "0", "0"], [[0, 1]] * 3)
    assert lagrangian_defect(R3, CS3, 20) < 1e-15
    assert sl_phase_defect(R3, CS3, 1.0, 20).passed
    assert not sl_phase_defect(R3, CS3, 1j, 20).passed


def test_complex_line_is_holomorphic_and_not_lagrangian():
    L = ExprImmersion(["a", "b"], ["a", "2*a", "b", "2*b"], [[0, 1]] * 2)
    assert holomorphic_defect(L, CS2, 20) < 1e-12
    assert lagrangian_defect(L, CS2, 20) > 0.5


def test_symmetry_check_needs_complex_plane():
    R3 = ExprImmersion(["a", "b", "c"], ["a", "b", "c", "0", "0", "0"], [[0.1, 1]] * 3)
    with pytest.raises(ComplexGeometryError):
        reflect_and_unite_check(R3, Codim2Plane(np.array([unit(6, 0), unit(6, 1)])), CS3)
    rep = reflect_and_unite_check(R3, Codim2Plane(np.array([unit(6, 2), unit(6, 5)])), CS3, samples=20)
    assert rep.passed
    assert rep.value("pushforward_plus_phi_norm") < 1e-12


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_kahler_form_and_metric_compatibility(seed):
    rng = np.random.default_rng(seed)
    for cs in (CS2, CS3, ComplexStructure(((0, 1), (2, 3)))):
        J = cs.J
        X, Y = rng.normal(size=(2, cs.real_dim))
        assert np.dot(J @ X, J @ Y) == pytest.approx(np.dot(X, Y), abs=1e-12)
        om = kahler_form(cs).form
        assert evaluate(om, np.stack([X, J @ X], axis=1)) == pytest.approx(np.dot(X, X), rel=1e-12)


def test_sl_form_low_dimensions():
    assert sl_form(ComplexStructure.standard(1)).form.terms() == {(0,): 1.0}
    assert sl_form(CS2).form.terms() == {(0, 1): 1.0, (2, 3): -1.0}


def test_line_in_complex_plane_is_lagrangian():
    line = ExprImmersion(["u"], ["u", "u"], [[0, 1]])
    assert lagrangian_defect(line, ComplexStructure.standard(1), 10) < 1e-15


def test_complex_curve_z2_equals_z1_squared():
    # z1 = a + i b, z2 = z1^2; real coordinates (x1, x2, y1, y2)
    S = ExprImmersion(["a", "b"], ["a", "a^2 - b^2", "b", "2*a*b"], [[-1, 1], [-1, 1]])
    assert holomorphic_defect(S, CS2, 100) < 1e-9
    assert lagrangian_defect(S, CS2, 100) == pytest.approx(1.0, abs=1e-9)


def test_totally_real_plane_has_maximal_holomorphic_defect():
    plane = ExprImmersion(["u", "v"], ["u", "v", "0", "0"], [[0, 1], [0, 1]])
    assert holomorphic_defect(plane, CS2, 10) == pytest.approx(1.0, abs=1e-12)


def test_rotation_at_zero_and_half_turn():
    P = Codim2Plane(np.array([unit(6, 2), unit(6, 5)]))
    assert np.allclose(rotation_about_plane(P, 0.0), np.eye(6))
    R = rotation_about_plane(P, math.pi)
    assert np.allclose(R @ P.f1, -P.f1) and np.allclose(R @ P.f2, -P.f2)
    for v in P.plane_basis():
        assert np.allclose(R @ v, v)
    assert np.linalg.det(R) == pytest.approx(1.0)


@pytest.mark.parametrize("k", range(2, 9))
def test_vanishing_sum_for_random_unitary_conjugates(k):
    # SL: P^perp is the complex line of z3.  Kahler: P^perp = span(y1, y2), totally real.
    rng = np.random.default_rng(100 + k)
    for cs, w, normals in ((CS3, sl_form(CS3), (2, 5)), (CS2, kahler_form(CS2), (2, 3))):
        U = cs.realify(random_unitary(rng, cs.n))
        P = Codim2Plane(np.array([U @ unit(cs.real_dim, i) for i in normals]))
        assert P.is_complex(cs) == (w.kind == "special_lagrangian")
        _, rep = rotated_calibration_family(w, P, k, comass_trials=50)
        assert rep.value("sum_norm") < 1e-10


def test_kahler_form_is_fixed_by_rotation_about_complex_plane():
    rng = np.random.default_rng(9)
    U = CS2.realify(random_unitary(rng, 2))
    f1 = U @ unit(4, 1)
    P = Codim2Plane(np.array([f1, CS2.J @ f1]))
    R = rotation_about_plane(P, 0.7)
    assert np.linalg.norm(R @ CS2.J - CS2.J @ R) < 1e-12
    forms, rep = rotated_calibration_family(kahler_form(CS2), P, 4, comass_trials=10)
    assert all(f.allclose(forms[0]) for f in forms)
    assert rep.value("sum_norm") == pytest.approx(4 * kahler_form(CS2).form.norm())


def test_half_turn_family_is_w_and_minus_w():
    P = Codim2Plane(np.array([unit(6, 2), unit(6, 5)]))
    forms, _ = rotated_calibration_family(sl_form(CS3), P, 2, comass_trials=10)
    assert forms[1].allclose(-forms[0])


def test_sl_form_on_frames_matches_phase():
    from amdkit.geometry import orthonormal_tangent
    from amdkit.scenes import load_scene

    sc = load_scene("builtin:sphere_bundle")
    nu = sc.immersion("nu")
    rng = np.random.default_rng(0)
    lo, hi = np.asarray(nu.box, float).T
    Q = orthonormal_tangent(nu.jet(rng.uniform(lo, hi, size=(50, 3)), order=1).jacobian)
    det = np.linalg.det(sc.cs().complex_coords(Q))
    delta = lagrangian_defect(nu, sc.cs(), 50)
    for q, d in zip(Q, det):
        val = evaluate(sl_form(sc.cs()).form, q)
        assert val == pytest.approx(d.real, abs=1e-12)
        assert val == pytest.approx(math.cos(np.angle(d)), abs=10 * delta + 1e-12)
