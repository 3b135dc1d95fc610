import numpy as np
import pytest

from amdkit.complexgeo import ComplexStructure, kahler_form
from amdkit.geometry import ExprImmersion, QuadratureSpec
from amdkit.scenes import load_scene
from amdkit.sigma import (
    BumpDiffeo,
    ComplexBuildError,
    DiffeoImage,
    EdgeIncidence,
    Face,
    PlacementError,
    SingularEdge,
    bump_profile,
    build_complex,
    check_amd_hypotheses,
    complex_volume,
    induced_edge_orientation,
    perturb_volume_test,
    random_boundary_fixing_diffeo,
    stokes_certificate,
)
from amdkit import expr as E

Q8 = QuadratureSpec(gauss_order=8)


@pytest.fixture(scope="module")
def pair():
    return load_scene("builtin:halfplane_pair").complex("pair")


@pytest.fixture(scope="module")
def fan():
    return load_scene("builtin:zw2_fan").complex("fan")


def test_incidence_tables(pair, fan):
    assert pair.faces_of_edge == [[0, 1]]
    assert pair.edges_of_face == [[0], [0]]
    assert fan.faces_of_edge == [[0, 1, 2], [0, 1, 2]]
    assert pair.incidence_consistent() and fan.incidence_consistent()


def test_distance_to_singular_set(pair):
    X = np.array([[0.3, 0, 0, 0], [0.3, 0.5, 0, 0], [2.0, 0, 0, 0]])
    assert np.allclose(pair.distance_to_singular_set(X), [0.0, 0.5, 1.0], atol=1e-9)


def test_bump_profile_is_smooth_and_compact():
    s = np.array([0.0, 0.5, 0.999, 1.0, 1.5])
    p = bump_profile(s)
    assert p[0] == pytest.approx(1.0) and p[3] == 0.0 and p[4] == 0.0
    assert 0 < p[2] < 1e-100


def test_diffeo_jacobian_inverse_and_support():
    phi = BumpDiffeo([[0.1, 0.2, 0.0, 0.0]], [0.5], [[0.3, -1.0, 0.5, 0.2]], [0.2])
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.3, 0.4, size=(20, 4))
    Y, M = phi.flow(X, np.broadcast_to(np.eye(4), (20, 4, 4)))
    h = 1e-6
    for a in range(4):
        e = np.eye(4)[a] * h
        assert np.allclose(M[:, :, a], (phi(X + e) - phi(X - e)) / (2 * h), atol=1e-8)
    assert np.max(np.abs(phi.inverse_approx(Y) - X)) < 1e-8  # RK4 truncation, 16 steps
    far = np.array([[3.0, 3.0, 3.0, 3.0]])
    assert np.array_equal(phi(far), far)
    assert not phi.support_mask(far)[0]


def test_identity_diffeo_keeps_volume(pair):
    v0 = complex_volume(pair, Q8)[0]
    assert complex_volume(pair, Q8, BumpDiffeo.identity(4))[0] == v0
    far = BumpDiffeo([[9.0, 9.0, 9.0, 9.0]], [0.5], [[0, 1, 0, 0]], [0.3])
    assert abs(complex_volume(pair, Q8, far)[0] - v0) < 1e-12
    assert v0 == pytest.approx(4.0)


def test_bump_over_edge_strictly_increases_volume(pair):
    bump = BumpDiffeo([[0.0, 0.0, 0.0, 0.0]], [0.3], [[0, 1, 0, 0]], [0.05])
    d = complex_volume(pair, Q8, bump)[0] - complex_volume(pair, Q8)[0]
    assert d > 1e-4


def test_diffeo_image_refines_around_small_bumps():
    plane = ExprImmersion(["s", "t"], ["s", "t", "0"], [[0, 1], [0, 1]])
    bump = BumpDiffeo([[0.37, 0.61, 0.0]], [0.04], [[0, 0, 1]], [0.01])
    img = DiffeoImage(plane, bump)
    lo, hi = np.array([[0.0, 0.0], [0.9, 0.9]]), np.array([[1.0, 1.0], [1.0, 1.0]])
    assert img.cells_resolved(lo, hi).tolist() == [False, True]


def test_random_diffeos_fix_boundary_and_are_contractions(fan):
    for seed in range(5):
        phi = random_boundary_fixing_diffeo(fan, 2, 0.05, seed)
        assert phi.lipschitz_bound < 1.0
        B = fan.boundary_points
        assert np.max(np.abs(phi(B) - B)) == 0.0


def test_placement_error_when_boundary_everywhere(pair):
    with pytest.raises(PlacementError):
        random_boundary_fixing_diffeo(pair, 1, 0.05, 0, max_tries=0)


def test_hypotheses_and_certificate(pair, fan):
    assert check_amd_hypotheses(pair).passed
    st = stokes_certificate(pair, Q8, tol=1e-10)
    assert st.passed and st.value("total_volume") == pytest.approx(4.0)
    flipped = load_scene("builtin:zw2_fan").complex("fan_flipped")
    rep = check_amd_hypotheses(flipped)
    assert not rep.passed and rep.value("edge0.condition_i") is False


def test_induced_orientation_flips_with_face_orientation(pair):
    e = pair.edges[0]
    S = np.linspace(-0.9, 0.9, 7)[:, None]
    s0, mag = induced_edge_orientation(pair.faces[0], e, e.incidences[0], S)
    f = pair.faces[0]
    s1, _ = induced_edge_orientation(Face(f.immersion, -f.orientation, -f.calibration), e, e.incidences[0], S)
    assert np.all(mag > 0.5)
    assert np.array_equal(s0, -s1)


def test_single_face_complex_and_bad_calibration_sign():
    cs = ComplexStructure.standard(2)
    w = kahler_form(cs)
    A = ExprImmersion(["s", "t"], ["s", "0", "t", "0"], [[0, 1], [0, 1]])
    cx = build_complex([Face(A, 1, w)], [])
    assert len(cx.faces) == 1 and cx.faces_of_edge == []
    assert stokes_certificate(cx, Q8).passed
    with pytest.raises(ComplexBuildError):
        build_complex([Face(A, 1, -w)], [])
    with pytest.raises(ComplexBuildError):
        build_complex([], [])


def test_edge_must_lie_on_face_boundary():
    w = kahler_form(ComplexStructure.standard(2))
    A = ExprImmersion(["s", "t"], ["s", "0", "t", "0"], [[-1, 1], [0, 1]])
    B = ExprImmersion(["s", "t"], ["s", "0", "-t", "0"], [[-1, 1], [0, 1]])
    mid = ExprImmersion(["s"], ["s", "0", "0.5", "0"], [[-1, 1]])
    inc = lambda i, t: EdgeIncidence(i, (E.parse("s", ["s"]), E.Num(t)))
    with pytest.raises(ComplexBuildError):
        build_complex([Face(A, 1, w), Face(B, 1, -w)], [SingularEdge(mid, [inc(0, 0.5), inc(1, 0.5)])])
    with pytest.raises(ComplexBuildError):
        build_complex([Face(A, 1, w)], [SingularEdge(mid, [inc(0, 0.5)])])


def test_perturbation_report_and_reproducibility(pair):
    a = perturb_volume_test(pair, trials=3, rng_seed=4)
    b = perturb_volume_test(pair, trials=3, rng_seed=4)
    assert a.passed
    assert a.to_json() == b.to_json()
    assert a.value("boundary_displacement") < 1e-12
    assert a.value("trials_with_decrease") == 0


def test_exploratory_run_on_broken_complex_is_not_a_pass():
    flipped = load_scene("builtin:zw2_fan").complex("fan_flipped")
    rep = perturb_volume_test(flipped, trials=2, exploratory=True)
    assert rep.status == "warn"


def test_calibrated_flat_disk_never_loses_volume():
    w = kahler_form(ComplexStructure.standard(2))
    disk = ExprImmersion(["s", "t"], ["s", "0", "t", "0"], [[-1, 1], [-1, 1]], predicates=["s^2 + t^2 <= 1"])
    cx = build_complex([Face(disk, 1, w)], [])
    rep = perturb_volume_test(cx, trials=3, rng_seed=1)
    assert rep.passed
    assert rep.value("trials_with_decrease") == 0
    assert min(rep.value("margins")) >= rep.metrics["min_margin"]["tolerance"]


def catalog_complexes():
    from amdkit.scenes import CATALOG

    for name in sorted(CATALOG):
        sc = load_scene(f"builtin:{name}")
        for cname in sorted(sc.complex_specs):
            yield f"{name}.{cname}", sc, cname


@pytest.mark.parametrize("label, scene, cname", list(catalog_complexes()), ids=lambda x: x if isinstance(x, str) else "")
def test_certificate_coherence(label, scene, cname):
    from amdkit.scenes import quadrature_from

    cx = scene.complex(cname)
    assert cx.incidence_consistent()
    # certify with the quadrature the scene declares for its own Stokes check
    q = quadrature_from(scene.checks.get("stokes", {}), Q8)
    if not check_amd_hypotheses(cx).passed or not stokes_certificate(cx, q, tol=1e-4).passed:
        pytest.skip(f"{label}: certificate does not apply")
    assert perturb_volume_test(cx, trials=2, rng_seed=0).passed
