"""Command-line front end: ``amdkit --scene builtin:zw2_fan --check check-amd``."""

from __future__ import annotations

import argparse
import cmath
import json
import sys
import time

from . import closed_forms
from .bundles import BjorlingData, BjorlingSurface, BundleError, bjorling_bundle, bjorling_report, harmonic_defect, mean_curvature_defect
from .complexgeo import (
    ComplexGeometryError,
    holomorphic_defect,
    lagrangian_defect,
    reflect_and_unite_check,
    rotated_calibration_family,
    sl_phase_defect,
)
from .expr import ExprError
from .geometry import GeometryError, QuadratureSpec, integrate, is_austere, volume_element
from .report import Report
from .scenes import CATALOG, CHECKS, Scene, SceneError, load_scene, number, quadrature_from
from .sigma import (
    PERTURB_QUADRATURE,
    ComplexBuildError,
    HypothesisFailure,
    PlacementError,
    check_amd_hypotheses,
    perturb_volume_test,
    stokes_certificate,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_WARN = 0, 1, 2, 3

COMPARISONS = {
    "catenoid_bundle": closed_forms.compare_catenoid_bundle,
    "borisenko_catenoid": closed_forms.compare_borisenko_catenoid,
    "clifford_cone_normal": closed_forms.compare_clifford_cone_normal,
    "clifford_cone_hyperplanes": lambda: {
        **{f"x12.{k}": v for k, v in closed_forms.clifford_cone_hyperplane_defect(0.6, 0.8, "first").items()},
        **{f"x34.{k}": v for k, v in closed_forms.clifford_cone_hyperplane_defect(1.0, -0.3, "second").items()},
    },
    "fan_edge": closed_forms.fan_edge_relations,
}


def _int(params, key, default):
    v = params.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise SceneError(f"{key} must be a non-negative integer", key)
    return v


def _float(params, key, default):
    return number(params.get(key, default), key)


def _add_comparisons(rep: Report, params):
    for name in params.get("compare", []):
        if name not in COMPARISONS:
            raise SceneError(f"unknown comparison {name!r}; known: {', '.join(sorted(COMPARISONS))}", "compare")
        for k, v in COMPARISONS[name]().items():
            rep.info(f"closed_form.{name}.{k}", v)


# -- checks ------------------------------------------------------------------


def _check_austere(scene, p):
    return is_austere(scene.immersion(p["immersion"]), _int(p, "samples", 100), tol=_float(p, "tol", 1e-8), rng_seed=_int(p, "seed", 0))


def _check_lagrangian(scene, p):
    F = scene.immersion(p["immersion"])
    tol = _float(p, "tol", 1e-8)
    rep = Report(check="check-lagrangian", seed=_int(p, "seed", 0), samples=_int(p, "samples", 200))
    d = lagrangian_defect(F, scene.cs(), rep.samples, rep.seed)
    rep.metric("lagrangian_defect", d, tol)
    rep.status = "pass" if d < tol else "fail"
    return rep


def _check_sl(scene, p):
    F = scene.immersion(p["immersion"])
    tol = _float(p, "tol", 1e-7)
    seed, samples = _int(p, "seed", 0), _int(p, "samples", 200)
    phase = _float(p, "phase", 0.0)
    rep = Report(check="check-sl", seed=seed, samples=samples)
    lag_tol = _float(p, "lagrangian_tol", 1e-8)
    d = lagrangian_defect(F, scene.cs(), samples, seed)
    rep.metric("lagrangian_defect", d, lag_tol)
    rep.fail_unless(d < lag_tol)
    sl = sl_phase_defect(F, scene.cs(), cmath.exp(1j * phase), samples, seed, tol)
    for k, v in sl.metrics.items():
        rep.metrics[k] = v
    if not sl.passed:
        rep.status = "fail"
    rho = getattr(F, "rho", None)
    if rho is not None:
        base = F.base
        rep.info("base_mean_curvature_defect", mean_curvature_defect(base, samples, seed))
        rep.info("rho_harmonic_defect", harmonic_defect(base, rho, samples, seed))
    _add_comparisons(rep, p)
    return rep


def _check_holomorphic(scene, p):
    F = scene.immersion(p["immersion"])
    tol = _float(p, "tol", 1e-10)
    rep = Report(check="check-holomorphic", seed=_int(p, "seed", 0), samples=_int(p, "samples", 200))
    d = holomorphic_defect(F, scene.cs(), rep.samples, rep.seed)
    rep.metric("holomorphic_defect", d, tol)
    rep.status = "pass" if d < tol else "fail"
    return rep


def _check_vanishing_sum(scene, p):
    w = scene.calibration(p["calibration"])
    P = scene.plane(p["plane"])
    k = _int(p, "k", 3)
    _, rep = rotated_calibration_family(w, P, k, comass_trials=_int(p, "samples", 2000), rng_seed=_int(p, "seed", 0))
    rep.info("plane_complex_defect", P.complex_defect(scene.cs()) if scene.complex_structure else None)
    rep.samples = _int(p, "samples", 2000)
    return rep


def _check_symmetry(scene, p):
    F = scene.immersion(p["immersion"])
    P = scene.plane(p["plane"])
    phi = scene.calibration(p["calibration"]) if "calibration" in p else None
    return reflect_and_unite_check(F, P, scene.cs(), phi, _int(p, "samples", 200), _int(p, "seed", 0), _float(p, "tol", 1e-7))


def _check_volume(scene, p):
    F = scene.immersion(p["immersion"])
    q = quadrature_from(p, QuadratureSpec())
    r = integrate(F, lambda j: volume_element(j.jacobian), q)
    rep = Report(check="volume")
    rep.info("volume", r.value)
    rep.info("quadrature_error", r.error)
    rep.info("cells", r.cells)
    for n in r.notes:
        rep.note(n)
    if "expected" in p:
        exp = _float(p, "expected", 0.0)
        tol = _float(p, "tol", 1e-6)
        rel = abs(r.value - exp) / max(abs(exp), 1e-300)
        rep.info("expected", exp)
        rep.metric("relative_error", rel, tol)
        rep.status = "pass" if rel < tol else "fail"
    if r.warning and rep.status == "pass":
        rep.status = "warn"
    return rep


def _stokes(scene, p):
    cx = scene.complex(p["complex"])
    return stokes_certificate(cx, quadrature_from(p, QuadratureSpec()), _float(p, "tol", 1e-5))


def _perturb(scene, p):
    cx = scene.complex(p["complex"])
    return perturb_volume_test(
        cx,
        _int(p, "trials", 50),
        quadrature_from(p, PERTURB_QUADRATURE),
        _int(p, "seed", 0),
        bump_count=_int(p, "bump_count", 2),
        amplitude=_float(p, "amplitude", 0.05),
        exploratory=bool(p.get("exploratory", False)),
    )


def _check_amd(scene, p):
    cx = scene.complex(p["complex"])
    seed = _int(p, "seed", 0)
    rep = Report(check="check-amd", seed=seed, samples=_int(p, "samples", 64))
    hyp = check_amd_hypotheses(cx, rep.samples, seed)
    rep.merge(hyp, "hypotheses")
    if not hyp.passed:
        rep.note("hypotheses fail; certificate and perturbations skipped")
        _add_comparisons(rep, p)
        return rep
    rep.merge(stokes_certificate(cx, quadrature_from(p, QuadratureSpec()), _float(p, "tol", 1e-5)), "stokes")
    trials = _int(p, "trials", 10)
    if trials:
        pq = quadrature_from(p, PERTURB_QUADRATURE) if "quadrature" in p else PERTURB_QUADRATURE
        pr = perturb_volume_test(cx, trials, pq, seed, bump_count=_int(p, "bump_count", 2), amplitude=_float(p, "amplitude", 0.05))
        pr.metrics.pop("margins", None)
        rep.merge(pr, "perturb")
    else:
        rep.note("no perturbation trials requested")
    _add_comparisons(rep, p)
    return rep


def _bjorling(scene, p):
    S = scene.immersion(p["immersion"])
    if not isinstance(S, BjorlingSurface):
        raise SceneError("the bjorling check needs an immersion of kind 'bjorling'", "immersion")
    samples, seed = _int(p, "samples", 200), _int(p, "seed", 0)
    rep = bjorling_report(S, samples, seed, _float(p, "tol", 1e-6))
    scale = _float(p, "normal_scale", 2.0)
    d = S.data
    scaled = BjorlingData(d.gamma1, tuple(f"{scale!r}*({g})" for g in d.gamma2), d.interval, d.v_max, d.var,
                          None if d.norm is None else f"{scale!r}*({d.norm})")
    _, br = bjorling_bundle(scaled)
    rep.merge(br, "scaled_bundle")
    rep.info("normal_scale", scale)
    return rep


DISPATCH = {
    "check-austere": _check_austere,
    "check-lagrangian": _check_lagrangian,
    "check-sl": _check_sl,
    "check-holomorphic": _check_holomorphic,
    "check-vanishing-sum": _check_vanishing_sum,
    "check-symmetry": _check_symmetry,
    "check-amd": _check_amd,
    "volume": _check_volume,
    "stokes": _stokes,
    "perturb": _perturb,
    "bjorling": _bjorling,
}
assert set(DISPATCH) == set(CHECKS)


def run(scene: Scene, check: str, overrides: dict | None = None) -> Report:
    """Run one check directive of a scene; ``overrides`` replace its parameters."""
    params = {**scene.check(check), **{k: v for k, v in (overrides or {}).items() if v is not None}}
    rep = DISPATCH[check.split(":")[0]](scene, params)
    rep.check = check
    rep.scene = scene.name
    if "seed" in params and rep.seed is None:
        rep.seed = params["seed"]
    return rep


def error_payload(kind, message, scene="", check=""):
    return {"scene": scene, "check": check, "status": "error", "error": {"kind": kind, "message": message}}


# -- argument parsing ----------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="amdkit", description="Numerical checks for calibrated submanifolds and singular complexes.")
    ap.add_argument("--scene", help="PATH to a JSON scene or builtin:NAME[?k=N]")
    ap.add_argument("--check", help="check name, optionally with a :variant suffix")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--report", choices=("json", "text"), default="json")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--strict", action="store_true", help="treat numerical warnings as failures (exit 3)")
    ap.add_argument("--timing", action="store_true", help="record wall time in the report (not byte-reproducible)")
    ap.add_argument("--list", action="store_true", help="list catalog scenes, or the checks of --scene")
    return ap


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        if args.scene:
            try:
                scene = load_scene(args.scene)
            except SceneError as e:
                _emit(json.dumps(error_payload("input", str(e)), indent=2), args.out)
                return EXIT_INPUT
            _emit("\n".join(sorted(scene.checks)), args.out)
        else:
            _emit("\n".join(sorted(CATALOG)), args.out)
        return EXIT_PASS
    if not args.scene or not args.check:
        _emit(json.dumps(error_payload("input", "--scene and --check are required"), indent=2), args.out)
        return EXIT_INPUT
    overrides = {"samples": args.samples, "trials": args.trials, "tol": args.tol, "seed": args.seed}
    t0 = time.perf_counter()
    try:
        scene = load_scene(args.scene)
        rep = run(scene, args.check, overrides)
    except SceneError as e:
        _emit(json.dumps(error_payload("input", str(e), args.scene, args.check), indent=2), args.out)
        return EXIT_INPUT
    except (ComplexBuildError, HypothesisFailure, PlacementError) as e:
        rep = Report(check=args.check, scene=args.scene, status="fail")
        rep.note(f"{type(e).__name__}: {e}")
        if getattr(e, "defect", None) is not None:
            rep.metric("defect", e.defect)
    except (GeometryError, BundleError, ComplexGeometryError, ExprError, ArithmeticError) as e:
        _emit(json.dumps(error_payload(type(e).__name__, str(e), args.scene, args.check), indent=2), args.out)
        return EXIT_INPUT
    if args.timing:
        rep.duration_ms = round(1000.0 * (time.perf_counter() - t0), 3)
    _emit(rep.to_json() if args.report == "json" else rep.to_text(), args.out)
    if rep.status == "pass":
        return EXIT_PASS
    if rep.status == "warn":
        return EXIT_WARN if args.strict else EXIT_PASS
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
