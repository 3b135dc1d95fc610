"""Acceptance criteria, each run at its stated tolerance and time budget.

The terminal summary prints one PASS/FAIL line per criterion (see conftest.py).
"""

import json
import math
import time

import numpy as np
import pytest

from amdkit import cli
from amdkit.bundles import borisenko_bundle, harmonic_defect, normal_bundle
from amdkit.complexgeo import (
    Codim2Plane,
    ComplexStructure,
    kahler_form,
    lagrangian_defect,
    rotated_calibration_family,
    sl_form,
    sl_phase_defect,
)
from amdkit.geometry import QuadratureSpec
from amdkit.scenes import load_scene
from amdkit.sigma import BumpDiffeo, check_amd_hypotheses, complex_volume, perturb_volume_test, stokes_certificate
from tests.ad_oracle import random_expression_cases

R_STAR_SQ = (math.sqrt(5.0) - 1.0) / 2.0


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


@pytest.mark.criterion(1, "rotated calibrations sum to zero for k = 2..8")
def test_vanishing_sum():
    t0 = time.perf_counter()
    cs3 = ComplexStructure.standard(3)
    P_sl = Codim2Plane(np.array([_unit(6, 2), _unit(6, 5)]))  # x3 = y3 = 0
    cs2 = ComplexStructure.standard(2)
    P_k = Codim2Plane(np.array([_unit(4, 2), _unit(4, 3)]))  # span(e1, e2)
    worst = 0.0
    for k in range(2, 9):
        for w, P in ((sl_form(cs3), P_sl), (kahler_form(cs2), P_k)):
            forms, _ = rotated_calibration_family(w, P, k, comass_trials=10)
            total = sum(f.coeffs for f in forms)
            worst = max(worst, float(np.linalg.norm(total)))
    elapsed = time.perf_counter() - t0
    print(f"max coefficient norm {worst:.3g}, {elapsed:.3f} s")
    assert worst < 1e-10
    assert elapsed < 1.0


@pytest.mark.criterion(2, "catenoid and Clifford cone normal bundles are special Lagrangian")
def test_normal_bundles_special_lagrangian():
    t0 = time.perf_counter()
    cat = load_scene("builtin:catenoid_bundle")
    nu = cat.immersion("nu")
    lag = lagrangian_defect(nu, cat.cs(), 200, 0)
    sl = sl_phase_defect(nu, cat.cs(), 1j, 200, 0, tol=1e-7)
    cone = load_scene("builtin:clifford_cone_bundle")
    cnu = cone.immersion("nu")
    assert np.all(cnu.base.box[0] > 0), "apex must be excluded"
    csl = sl_phase_defect(cnu, cone.cs(), 1j, 200, 0, tol=1e-6)
    elapsed = time.perf_counter() - t0
    print(f"catenoid lag {lag:.3g}, phase {sl.value('phase_deviation'):.3g}; "
          f"cone phase {csl.value('phase_deviation'):.3g}; {elapsed:.2f} s")
    assert lag < 1e-8
    assert sl.value("phase_deviation") < 1e-7
    assert csl.value("phase_deviation") < 1e-6
    assert elapsed < 10.0


@pytest.mark.criterion(3, "sphere normal bundle is Lagrangian but not special Lagrangian")
def test_sphere_bundle_not_special():
    t0 = time.perf_counter()
    sc = load_scene("builtin:sphere_bundle")
    nu = sc.immersion("nu")
    lag = lagrangian_defect(nu, sc.cs(), 200, 0)
    dev = sl_phase_defect(nu, sc.cs(), 1j, 200, 0).value("phase_deviation")
    elapsed = time.perf_counter() - t0
    print(f"lag {lag:.3g}, phase deviation {dev:.3g}, {elapsed:.2f} s")
    assert lag < 1e-8
    assert dev > 0.05
    assert elapsed < 5.0


@pytest.mark.criterion(4, "Borisenko bundle over the catenoid")
def test_borisenko():
    t0 = time.perf_counter()
    sc = load_scene("builtin:borisenko_catenoid")
    M = sc.immersion("M")
    h = harmonic_defect(M, "sinh(u)*cos(v)", 200, 0)
    B = sc.immersion("B")
    lag = lagrangian_defect(B, sc.cs(), 200, 0)
    dev = sl_phase_defect(B, sc.cs(), 1j, 200, 0, tol=1e-7).value("phase_deviation")

    fiber = [[-1.0, 1.0]]
    B0 = borisenko_bundle(M, "0", fiber)
    N0 = normal_bundle(M, fiber)
    axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(list(M.box) + fiber, (20, 20, 5))]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    gap = float(np.max(np.abs(B0.points(G) - N0.points(G))))
    elapsed = time.perf_counter() - t0
    print(f"harmonic {h:.3g}, lag {lag:.3g}, phase {dev:.3g}, rho=0 gap {gap:.3g}, {elapsed:.2f} s")
    assert h < 1e-7
    assert lag < 1e-8 and dev < 1e-7
    assert gap < 1e-12
    assert elapsed < 10.0


@pytest.mark.criterion(5, "z = w^2 fan with k = 3: volumes, Stokes, hypotheses")
def test_fan_certificate():
    t0 = time.perf_counter()
    sc = load_scene("builtin:zw2_fan?k=3")
    cx = sc.complex("fan")
    hyp = check_amd_hypotheses(cx)
    st = stokes_certificate(cx, QuadratureSpec(), tol=1e-4)
    expected = math.pi * (R_STAR_SQ / 2 + R_STAR_SQ**2)
    vols = [st.value(f"face{i}.volume") for i in range(3)]
    gap = abs(st.value("total_volume") - st.value("total_calibration_integral")) / st.value("total_volume")
    bad = check_amd_hypotheses(sc.complex("fan_flipped"))
    elapsed = time.perf_counter() - t0
    print(f"volumes {vols}, expected {expected}, gap {gap:.3g}, {elapsed:.2f} s")
    assert all(abs(v - expected) / expected < 1e-4 for v in vols)
    assert gap < 1e-4
    assert hyp.passed
    assert not bad.passed
    assert bad.value("edge0.condition_i") is False
    assert elapsed < 30.0


@pytest.mark.criterion(6, "volume never drops under 50 boundary-fixing perturbations")
def test_perturbation():
    t0 = time.perf_counter()
    cx = load_scene("builtin:zw2_fan").complex("fan")
    rep = perturb_volume_test(cx, trials=50, rng_seed=0)
    eps = -rep.metrics["min_margin"]["tolerance"]
    margins = rep.value("margins")
    elapsed = time.perf_counter() - t0

    q = QuadratureSpec(gauss_order=8)
    center, radius = np.array([0.4, 0.16, 0.0, 0.0]), 0.3
    assert np.min(np.linalg.norm(cx.boundary_points - center, axis=-1)) > radius
    bump = BumpDiffeo([center], [radius], [[0, 0, 1, 0]], [0.05])
    increase = complex_volume(cx, q, bump)[0] - complex_volume(cx, q)[0]
    print(f"min margin {min(margins):.3g}, eps {eps:.3g}, edge bump +{increase:.3g}, {elapsed:.1f} s")
    assert len(margins) == 50
    assert all(m >= -eps for m in margins)
    assert rep.value("boundary_displacement") < 1e-12
    assert increase > 1e-4
    assert elapsed < 60.0


@pytest.mark.criterion(7, "Björling surface from a circle reproduces a catenoid")
def test_bjorling():
    t0 = time.perf_counter()
    sc = load_scene("builtin:bjorling_circle_catenoid")
    rep = cli.run(sc, "bjorling", {"normal_scale": 2.0})
    elapsed = time.perf_counter() - t0
    print(rep.to_text())
    assert rep.value("max_abs_mean_curvature") < 1e-6
    assert rep.value("curve_containment") < 1e-8
    assert rep.value("scaled_bundle.containment_distance") < 1e-6
    assert elapsed < 15.0


@pytest.mark.criterion(8, "reflection reverses the SL form and the united surface stays SL")
def test_symmetry():
    t0 = time.perf_counter()
    sc = load_scene("builtin:catenoid_bundle")
    rep = cli.run(sc, "check-symmetry")
    elapsed = time.perf_counter() - t0
    print(rep.to_text())
    assert elapsed < 10.0
    assert rep.value("pushforward_plus_phi_norm") < 1e-12
    assert rep.value("S.phase_deviation") < 1e-7
    assert rep.value("minus_S_star.phase_deviation") < 1e-7
    assert rep.passed


DETERMINISM_RUNS = [
    ("builtin:zw2_fan", "check-vanishing-sum", []),
    ("builtin:catenoid_bundle", "check-sl", []),
    ("builtin:sphere_bundle", "check-sl", []),
    ("builtin:borisenko_catenoid", "check-sl", []),
    ("builtin:zw2_fan", "stokes", []),
    ("builtin:zw2_fan", "perturb", ["--trials", "3"]),
    ("builtin:bjorling_circle_catenoid", "bjorling", []),
    ("builtin:catenoid_bundle", "check-symmetry", []),
]


@pytest.mark.criterion(9, "same seed gives byte-identical JSON reports")
def test_determinism(tmp_path):
    for n, (scene, check, extra) in enumerate(DETERMINISM_RUNS):
        outs = []
        for i in range(2):
            path = tmp_path / f"r{n}_{i}.json"
            cli.main(["--scene", scene, "--check", check, "--seed", "7", "--out", str(path), *extra])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1], (scene, check)
        rep = json.loads(outs[0])
        assert rep["duration_ms"] is None and rep["seed"] in (7, None)


@pytest.mark.criterion(10, "jet derivatives agree with finite differences on 100 random expressions")
def test_ad_integrity():
    worst1 = worst2 = 0.0
    cases = random_expression_cases(100, seed=2024, depth=6)
    assert len(cases) == 100
    for case in cases:
        worst1 = max(worst1, case.first_order_error)
        worst2 = max(worst2, case.second_order_error)
    print(f"first order {worst1:.3g}, second order {worst2:.3g}")
    assert worst1 < 1e-6
    assert worst2 < 1e-4
