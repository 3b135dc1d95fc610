"""Scene documents and the built-in catalog.

A scene is a JSON object::

    {
      "name": "...",
      "ambient_dim": 4,
      "complex_structure": {"pairs": [[0, 2], [1, 3]]} | "standard",
      "immersions": {NAME: {"kind": ..., ...}},
      "planes": {NAME: {"normal_basis": [[...], [...]]} | {"span": [[...], ...]}},
      "calibrations": {NAME: {"kind": "kahler" | "special_lagrangian" | "rotated" | "negated", ...}},
      "complexes": {NAME: {"faces": [...], "edges": [...]}},
      "checks": {CHECK[:VARIANT]: {...parameters...}},
      "notes": ["..."]
    }

Numbers may be given as constant expressions ("2*pi/3"). Immersion kinds:
``expr``, ``normal_bundle``, ``borisenko``, ``rotated``, ``linear``,
``bjorling``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import parse_qsl

import numpy as np

from . import expr as E
from .bundles import BjorlingData, BundleError, BundleImmersion, borisenko_offset, bjorling_solve, normal_bundle
from .complexgeo import (
    CalibrationForm,
    Codim2Plane,
    ComplexGeometryError,
    ComplexStructure,
    kahler_form,
    rotation_about_plane,
    sl_form,
)
from .exterior import pushforward_orthogonal
from .geometry import ExprImmersion, GeometryError, LinearImage, QuadratureSpec
from .sigma import EdgeIncidence, Face, SigmaComplex, SingularEdge, build_complex

CHECKS = (
    "check-austere",
    "check-lagrangian",
    "check-sl",
    "check-holomorphic",
    "check-vanishing-sum",
    "check-symmetry",
    "check-amd",
    "volume",
    "stokes",
    "perturb",
    "bjorling",
)

SECTIONS = ("immersions", "planes", "calibrations", "complexes", "checks")


class SceneError(ValueError):
    """Invalid scene input; ``location`` is a dotted path into the document."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def number(value, loc):
    if isinstance(value, bool):
        raise SceneError("expected a number, got a boolean", loc)
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise SceneError("number must be finite", loc)
        return float(value)
    if isinstance(value, str):
        try:
            v = float(E.evaluate(E.parse(value, []), {}))
        except E.ExprError as e:
            raise SceneError(f"in expression {value!r}: {e}", loc) from None
        if not math.isfinite(v):
            raise SceneError(f"expression {value!r} is not finite", loc)
        return v
    raise SceneError(f"expected a number or constant expression, got {type(value).__name__}", loc)


def _box(value, loc, dim=None):
    if not isinstance(value, list) or not all(isinstance(r, list) and len(r) == 2 for r in value):
        raise SceneError("box must be a list of [lo, hi] pairs", loc)
    box = [[number(a, f"{loc}[{i}][0]"), number(b, f"{loc}[{i}][1]")] for i, (a, b) in enumerate(value)]
    for i, (a, b) in enumerate(box):
        if not b >= a:
            raise SceneError(f"empty interval [{a}, {b}]", f"{loc}[{i}]")
    if dim is not None and len(box) != dim:
        raise SceneError(f"box has {len(box)} intervals, expected {dim}", loc)
    return box


def _require(d, key, loc):
    if key not in d:
        raise SceneError(f"missing field {key!r}", loc)
    return d[key]


def _strings(value, loc):
    if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
        raise SceneError("expected a list of strings", loc)
    return value


@dataclass
class Scene:
    name: str
    ambient_dim: int | None
    complex_structure: ComplexStructure | None
    immersions: dict
    planes: dict
    calibrations: dict
    complex_specs: dict
    checks: dict
    notes: list
    document: dict
    _complexes: dict = field(default_factory=dict, repr=False)

    def _lookup(self, table, kind, name, loc=""):
        if name not in table:
            raise SceneError(
                f"undefined {kind} {name!r}; defined: {', '.join(sorted(table)) or '(none)'}", loc
            )
        return table[name]

    def immersion(self, name, loc=""):
        return self._lookup(self.immersions, "immersion", name, loc)

    def plane(self, name, loc=""):
        return self._lookup(self.planes, "plane", name, loc)

    def calibration(self, name, loc=""):
        return self._lookup(self.calibrations, "calibration", name, loc)

    def complex(self, name, loc="") -> SigmaComplex:
        if name not in self._complexes:
            faces, edges = self._lookup(self.complex_specs, "complex", name, loc)
            self._complexes[name] = build_complex(faces, edges)
        return self._complexes[name]

    def cs(self, loc=""):
        if self.complex_structure is None:
            raise SceneError("this check needs a complex_structure", loc)
        return self.complex_structure

    def check(self, name):
        if name not in self.checks:
            raise SceneError(
                f"scene {self.name!r} has no directive for {name!r}; available: {', '.join(sorted(self.checks)) or '(none)'}",
                "checks",
            )
        return self.checks[name]


# -- building from a document ---------------------------------------------


def _complex_structure(value, loc, ambient):
    if value is None:
        return None
    if value == "standard":
        if ambient is None or ambient % 2:
            raise SceneError("'standard' needs an even ambient_dim", loc)
        return ComplexStructure.standard(ambient // 2)
    if isinstance(value, dict) and "pairs" in value:
        try:
            return ComplexStructure(tuple(tuple(p) for p in value["pairs"]))
        except (ComplexGeometryError, TypeError, ValueError) as e:
            raise SceneError(str(e), f"{loc}.pairs") from None
    raise SceneError("expected 'standard' or {\"pairs\": [...]}", loc)


def _plane(spec, loc):
    if not isinstance(spec, dict):
        raise SceneError("plane must be an object", loc)
    try:
        if "normal_basis" in spec:
            rows = [[number(x, f"{loc}.normal_basis") for x in r] for r in spec["normal_basis"]]
            return Codim2Plane(np.array(rows))
        if "span" in spec:
            rows = [[number(x, f"{loc}.span") for x in r] for r in spec["span"]]
            return Codim2Plane.from_span(np.array(rows))
    except (ComplexGeometryError, ValueError) as e:
        if isinstance(e, SceneError):
            raise
        raise SceneError(str(e), loc) from None
    raise SceneError("plane needs 'normal_basis' or 'span'", loc)


class _Builder:
    def __init__(self, doc):
        self.doc = doc
        self.scene = None
        self.raw_imm = doc.get("immersions", {})
        self.raw_cal = doc.get("calibrations", {})
        self._imm = {}
        self._cal = {}
        self._stack = []

    def immersion(self, name, loc):
        if name in self._imm:
            return self._imm[name]
        if name not in self.raw_imm:
            raise SceneError(
                f"undefined immersion {name!r}; defined: {', '.join(sorted(self.raw_imm)) or '(none)'}", loc
            )
        if name in self._stack:
            raise SceneError(f"immersion {name!r} refers to itself", loc)
        self._stack.append(name)
        try:
            self._imm[name] = self._make_immersion(name, self.raw_imm[name], f"immersions.{name}")
        finally:
            self._stack.pop()
        return self._imm[name]

    def _make_immersion(self, name, spec, loc):
        if not isinstance(spec, dict):
            raise SceneError("immersion must be an object", loc)
        kind = _require(spec, "kind", loc)
        try:
            if kind == "expr":
                params = _strings(_require(spec, "params", loc), f"{loc}.params")
                comps = _strings(_require(spec, "components", loc), f"{loc}.components")
                box = _box(_require(spec, "box", loc), f"{loc}.box", len(params))
                coords = spec.get("coords")
                preds = _strings(spec.get("predicates", []), f"{loc}.predicates")
                for i, c in enumerate(comps):
                    self._parse(c, params, f"{loc}.components[{i}]")
                allv = list(params) + list(coords or [f"x{i + 1}" for i in range(len(comps))])
                for i, p in enumerate(preds):
                    self._parse(p, allv, f"{loc}.predicates[{i}]", predicate=True)
                return ExprImmersion(params, comps, box, preds, coords, name)
            if kind in ("normal_bundle", "borisenko"):
                base = self.immersion(_require(spec, "base", loc), f"{loc}.base")
                codim = base.ambient_dim - base.param_dim
                fiber = _box(spec.get("fiber_box", [[-1, 1]] * codim), f"{loc}.fiber_box", codim)
                preds = _strings(spec.get("predicates", []), f"{loc}.predicates")
                probe = BundleImmersion(base, fiber, name=name)
                allv = list(probe.param_names) + list(probe.coord_names)
                for i, p in enumerate(preds):
                    self._parse(p, allv, f"{loc}.predicates[{i}]", predicate=True)
                if kind == "normal_bundle":
                    return normal_bundle(base, fiber, preds, name)
                rho = _require(spec, "rho", loc)
                self._parse(rho, base.param_names, f"{loc}.rho")
                B = BundleImmersion(base, fiber, preds, offset=borisenko_offset(base, rho), name=name)
                B.rho = rho
                return B
            if kind in ("rotated", "linear"):
                base = self.immersion(_require(spec, "base", loc), f"{loc}.base")
                if kind == "rotated":
                    P = self.plane(_require(spec, "plane", loc), f"{loc}.plane")
                    A = rotation_about_plane(P, number(_require(spec, "angle", loc), f"{loc}.angle"))
                else:
                    A = np.array([[number(x, f"{loc}.matrix") for x in r] for r in _require(spec, "matrix", loc)])
                if A.shape != (base.ambient_dim, base.ambient_dim):
                    raise SceneError(f"matrix must be {base.ambient_dim}x{base.ambient_dim}", loc)
                return LinearImage(base, A, name)
            if kind == "bjorling":
                data = BjorlingData(
                    tuple(_strings(_require(spec, "gamma1", loc), f"{loc}.gamma1")),
                    tuple(_strings(_require(spec, "gamma2", loc), f"{loc}.gamma2")),
                    tuple(number(x, f"{loc}.interval") for x in _require(spec, "interval", loc)),
                    number(spec.get("v_max", 0.5), f"{loc}.v_max"),
                    spec.get("var", "t"),
                    spec.get("norm"),
                )
                return bjorling_solve(data, name)
        except (E.ExprError, GeometryError, BundleError, ComplexGeometryError) as e:
            if isinstance(e, SceneError):
                raise
            raise SceneError(str(e), loc) from None
        raise SceneError(
            f"unknown immersion kind {kind!r}; known: bjorling, borisenko, expr, linear, normal_bundle, rotated",
            f"{loc}.kind",
        )

    def _parse(self, text, variables, loc, predicate=False):
        try:
            return (E.parse_predicate if predicate else E.parse)(text, variables)
        except E.ExprSyntaxError as e:
            raise SceneError(f"cannot parse {text!r}: {e}", loc) from None
        except E.ExprError as e:
            raise SceneError(f"in {text!r}: {e}", loc) from None

    def plane(self, name, loc):
        planes = self.doc.get("planes", {})
        if name not in planes:
            raise SceneError(f"undefined plane {name!r}; defined: {', '.join(sorted(planes)) or '(none)'}", loc)
        return _plane(planes[name], f"planes.{name}")

    def calibration(self, name, loc):
        if name in self._cal:
            return self._cal[name]
        if name not in self.raw_cal:
            raise SceneError(
                f"undefined calibration {name!r}; defined: {', '.join(sorted(self.raw_cal)) or '(none)'}", loc
            )
        if name in self._stack:
            raise SceneError(f"calibration {name!r} refers to itself", loc)
        self._stack.append(name)
        try:
            self._cal[name] = self._make_calibration(self.raw_cal[name], f"calibrations.{name}")
        finally:
            self._stack.pop()
        return self._cal[name]

    def _make_calibration(self, spec, loc):
        kind = _require(spec, "kind", loc)
        if kind in ("kahler", "special_lagrangian"):
            if self.cs is None:
                raise SceneError(f"a {kind} calibration needs a complex_structure", loc)
            if kind == "kahler":
                return kahler_form(self.cs)
            return sl_form(self.cs, number(spec.get("phase", 0.0), f"{loc}.phase"))
        if kind == "rotated":
            base = self.calibration(_require(spec, "base", loc), f"{loc}.base")
            P = self.plane(_require(spec, "plane", loc), f"{loc}.plane")
            if P.ambient_dim != base.n:
                raise SceneError("plane and calibration dimensions differ", loc)
            alpha = number(_require(spec, "angle", loc), f"{loc}.angle")
            return CalibrationForm(pushforward_orthogonal(base.form, rotation_about_plane(P, alpha)), "rotated", base.phase)
        if kind == "negated":
            return -self.calibration(_require(spec, "base", loc), f"{loc}.base")
        raise SceneError(f"unknown calibration kind {kind!r}; known: kahler, negated, rotated, special_lagrangian", f"{loc}.kind")

    def complex_spec(self, name, spec, loc):
        faces = []
        for i, f in enumerate(_require(spec, "faces", loc)):
            floc = f"{loc}.faces[{i}]"
            o = f.get("orientation", 1)
            if o not in (1, -1):
                raise SceneError("orientation must be 1 or -1", f"{floc}.orientation")
            faces.append(
                Face(
                    self.immersion(_require(f, "immersion", floc), f"{floc}.immersion"),
                    o,
                    self.calibration(_require(f, "calibration", floc), f"{floc}.calibration"),
                    f["immersion"],
                )
            )
        edges = []
        for j, e in enumerate(spec.get("edges", [])):
            eloc = f"{loc}.edges[{j}]"
            imm = self.immersion(_require(e, "immersion", eloc), f"{eloc}.immersion")
            incs = []
            for m, inc in enumerate(_require(e, "incidences", eloc)):
                iloc = f"{eloc}.incidences[{m}]"
                fid = _require(inc, "face", iloc)
                if not isinstance(fid, int) or not 0 <= fid < len(faces):
                    raise SceneError(f"face index must be in 0..{len(faces) - 1}", f"{iloc}.face")
                pm = _strings(_require(inc, "param_map", iloc), f"{iloc}.param_map")
                if len(pm) != faces[fid].immersion.param_dim:
                    raise SceneError(
                        f"param_map has {len(pm)} entries, face has {faces[fid].immersion.param_dim} parameters",
                        f"{iloc}.param_map",
                    )
                exprs = tuple(self._parse(t, imm.param_names, f"{iloc}.param_map[{q}]") for q, t in enumerate(pm))
                incs.append(EdgeIncidence(fid, exprs))
            edges.append(SingularEdge(imm, incs, e["immersion"]))
        return faces, edges

    def build(self) -> Scene:
        doc = self.doc
        if not isinstance(doc, dict):
            raise SceneError("scene must be a JSON object")
        unknown = set(doc) - set(SECTIONS) - {"name", "ambient_dim", "complex_structure", "notes"}
        if unknown:
            raise SceneError(f"unknown top-level fields: {', '.join(sorted(unknown))}")
        for sec in SECTIONS:
            if not isinstance(doc.get(sec, {}), dict):
                raise SceneError("must be an object", sec)
        ambient = doc.get("ambient_dim")
        if ambient is not None and (not isinstance(ambient, int) or ambient < 1):
            raise SceneError("must be a positive integer", "ambient_dim")
        self.cs = _complex_structure(doc.get("complex_structure"), "complex_structure", ambient)
        if self.cs is not None and ambient is not None and self.cs.real_dim != ambient:
            raise SceneError(f"complex structure acts on R^{self.cs.real_dim}, scene is R^{ambient}", "complex_structure")
        planes = {n: _plane(p, f"planes.{n}") for n, p in doc.get("planes", {}).items()}
        imms = {n: self.immersion(n, f"immersions.{n}") for n in self.raw_imm}
        cals = {n: self.calibration(n, f"calibrations.{n}") for n in self.raw_cal}
        cxs = {n: self.complex_spec(n, s, f"complexes.{n}") for n, s in doc.get("complexes", {}).items()}
        checks = {}
        for key, params in doc.get("checks", {}).items():
            if key.split(":")[0] not in CHECKS:
                raise SceneError(f"unknown check {key!r}; known: {', '.join(CHECKS)}", f"checks.{key}")
            if not isinstance(params, dict):
                raise SceneError("check parameters must be an object", f"checks.{key}")
            checks[key] = dict(params)
        scene = Scene(
            doc.get("name", "unnamed"), ambient, self.cs, imms, planes, cals, cxs, checks, list(doc.get("notes", [])), doc
        )
        for key, params in checks.items():
            _validate_refs(scene, key, params)
        return scene


_REF_FIELDS = {"immersion": "immersion", "plane": "plane", "calibration": "calibration", "complex": "complex_specs"}


def _validate_refs(scene, key, params):
    for f, table in _REF_FIELDS.items():
        if f in params:
            tab = getattr(scene, table if table == "complex_specs" else table + "s")
            if params[f] not in tab:
                kind = "complex" if f == "complex" else f
                raise SceneError(
                    f"undefined {kind} {params[f]!r}; defined: {', '.join(sorted(tab)) or '(none)'}",
                    f"checks.{key}.{f}",
                )


def scene_from_dict(doc) -> Scene:
    return _Builder(doc).build()


def load_scene(spec: str) -> Scene:
    """``builtin:NAME[?param=value&...]`` or a path to a JSON scene file."""
    if spec.startswith("builtin:"):
        return scene_from_dict(builtin_document(spec[len("builtin:") :]))
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as e:
        raise SceneError(f"cannot read scene file: {e.strerror}", str(path)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"invalid JSON: {e.msg} at line {e.lineno}, column {e.colno}", str(path)) from None
    return scene_from_dict(doc)


def quadrature_from(params, default: QuadratureSpec) -> QuadratureSpec:
    q = params.get("quadrature")
    if not q:
        return default
    allowed = {"gauss_order", "max_subdivision_depth", "rel_tol", "max_nodes", "min_depth"}
    bad = set(q) - allowed
    if bad:
        raise SceneError(f"unknown quadrature fields {sorted(bad)}", "quadrature")
    kw = {}
    for k, v in q.items():
        x = number(v, f"quadrature.{k}")
        if k != "rel_tol" and x != int(x):
            raise SceneError("must be an integer", f"quadrature.{k}")
        kw[k] = x if k == "rel_tol" else int(x)
    try:
        return QuadratureSpec(**{**default.__dict__, **kw})
    except GeometryError as e:
        raise SceneError(str(e), "quadrature") from None


# -- catalog ----------------------------------------------------------------

R_STAR_SQ = (math.sqrt(5.0) - 1.0) / 2.0
R_STAR = math.sqrt(R_STAR_SQ)
FAN_FACE_AREA = math.pi * (R_STAR_SQ / 2.0 + R_STAR_SQ**2)

_BALL6 = "x1^2+x2^2+x3^2+y1^2+y2^2+y3^2 <= 4"
_CATENOID = ["u", "cosh(u)*cos(v)", "cosh(u)*sin(v)"]
_E3_Y3 = {"normal_basis": [[0, 0, 1, 0, 0, 0], [0, 0, 0, 0, 0, 1]]}
_E2_Y2 = {"normal_basis": [[0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0]]}


def zw2_fan(k=3):
    if k < 2:
        raise SceneError("the fan needs k >= 2", "builtin:zw2_fan")
    faces = [("S0", "omega0")] + [(f"S{i}", f"w{i}") for i in range(1, k)]
    imms = {
        "S0": {
            "kind": "expr",
            "params": ["r", "t"],
            "components": ["r*cos(t)", "r^2*cos(t)^2-r^2*sin(t)^2", "r*sin(t)", "2*r^2*cos(t)*sin(t)"],
            "box": [[0, R_STAR], [0, "pi"]],
        },
        "K_plus": {"kind": "expr", "params": ["s"], "components": ["s", "s^2", "0", "0"], "box": [[0, R_STAR]]},
        "K_minus": {"kind": "expr", "params": ["s"], "components": ["-s", "s^2", "0", "0"], "box": [[0, R_STAR]]},
    }
    cals = {"omega0": {"kind": "kahler"}}
    for i in range(1, k):
        imms[f"S{i}"] = {"kind": "rotated", "base": "S0", "plane": "P", "angle": f"2*pi*{i}/{k}"}
        cals[f"w{i}"] = {"kind": "rotated", "base": "omega0", "plane": "P", "angle": f"2*pi*{i}/{k}"}
    cals["w1_negated"] = {"kind": "negated", "base": "w1"}

    def complex_(flip):
        fs = [{"immersion": s, "orientation": 1, "calibration": c} for s, c in faces]
        if flip:
            fs[1] = {"immersion": "S1", "orientation": -1, "calibration": "w1_negated"}
        return {
            "faces": fs,
            "edges": [
                {"immersion": "K_plus", "incidences": [{"face": i, "param_map": ["s", "0"]} for i in range(k)]},
                {"immersion": "K_minus", "incidences": [{"face": i, "param_map": ["s", "pi"]} for i in range(k)]},
            ],
        }

    return {
        "name": f"zw2_fan(k={k})" if k != 3 else "zw2_fan",
        "ambient_dim": 4,
        "complex_structure": "standard",
        "immersions": imms,
        "planes": {"P": {"normal_basis": [[0, 0, 1, 0], [0, 0, 0, 1]]}},
        "calibrations": cals,
        "complexes": {"fan": complex_(False), "fan_flipped": complex_(True)},
        "checks": {
            "check-holomorphic": {"immersion": "S0", "samples": 200, "tol": 1e-10},
            "check-vanishing-sum": {"calibration": "omega0", "plane": "P", "k": k},
            "volume": {"immersion": "S0", "expected": FAN_FACE_AREA, "tol": 1e-4},
            "stokes": {"complex": "fan", "tol": 1e-4},
            "check-amd": {"complex": "fan", "trials": 10, "compare": ["fan_edge"]},
            "check-amd:flipped": {"complex": "fan_flipped", "trials": 0},
            "perturb": {"complex": "fan", "trials": 50},
            "perturb:flipped": {"complex": "fan_flipped", "trials": 10, "exploratory": True},
        },
        "notes": [
            "z2 = z1^2 in polar form (r, t), t in [0, pi]; the outer radius solves r^2 + r^4 = 1",
            "the singular set {x2 = x1^2, x3 = x4 = 0} is split into the halves x1 >= 0 (t = 0) and x1 <= 0 (t = pi)",
        ],
    }


def _catenoid_piece(v_max, k, extra_planes=None, name="catenoid_bundle"):
    imms = {
        "M": {"kind": "expr", "params": ["u", "v"], "components": _CATENOID, "box": [[-1.5, 1.5], [0, v_max]]},
        "nu": {"kind": "normal_bundle", "base": "M", "fiber_box": [[-2, 2]], "predicates": [_BALL6]},
    }
    return {
        "name": name,
        "ambient_dim": 6,
        "complex_structure": "standard",
        "immersions": imms,
        "planes": {"P3": _E3_Y3, **(extra_planes or {})},
        "calibrations": {"phi": {"kind": "special_lagrangian", "phase": "pi/2"}},
        "complexes": {},
        "checks": {
            "check-austere": {"immersion": "M", "samples": 100, "tol": 1e-8},
            "check-lagrangian": {"immersion": "nu", "samples": 200, "tol": 1e-8},
            "check-sl": {"immersion": "nu", "phase": "pi/2", "samples": 200, "tol": 1e-7, "compare": ["catenoid_bundle"]},
            "check-symmetry": {"immersion": "nu", "plane": "P3", "calibration": "phi", "samples": 200},
            "check-vanishing-sum": {"calibration": "phi", "plane": "P3", "k": k},
        },
        "notes": [
            "the unit-waist catenoid meets the unit ball only at one point, so the piece is cut by the ball of radius 2",
        ],
    }


def catenoid_bundle(k=3):
    doc = _catenoid_piece("pi", k)
    imms, cals = doc["immersions"], doc["calibrations"]
    edge_pred = ["x1^2+x2^2+x3^2+x4^2+x5^2+x6^2 <= 4"]
    imms["E_plus"] = {
        "kind": "expr",
        "params": ["u", "t"],
        "components": ["u", "cosh(u)", "0", "t*tanh(u)", "-t/cosh(u)", "0"],
        "box": [[-1.5, 1.5], [-2, 2]],
        "predicates": edge_pred,
    }
    imms["E_minus"] = {
        "kind": "expr",
        "params": ["u", "t"],
        "components": ["u", "-cosh(u)", "0", "t*tanh(u)", "t/cosh(u)", "0"],
        "box": [[-1.5, 1.5], [-2, 2]],
        "predicates": edge_pred,
    }
    names = ["nu"]
    cal_names = ["phi"]
    for i in range(1, k):
        imms[f"nu{i}"] = {"kind": "rotated", "base": "nu", "plane": "P3", "angle": f"2*pi*{i}/{k}"}
        cals[f"phi{i}"] = {"kind": "rotated", "base": "phi", "plane": "P3", "angle": f"2*pi*{i}/{k}"}
        names.append(f"nu{i}")
        cal_names.append(f"phi{i}")
    doc["complexes"] = {
        "piece": {"faces": [{"immersion": "nu", "orientation": 1, "calibration": "phi"}]},
        "fan": {
            "faces": [{"immersion": n, "orientation": 1, "calibration": c} for n, c in zip(names, cal_names)],
            "edges": [
                {"immersion": "E_plus", "incidences": [{"face": i, "param_map": ["u", "0", "t"]} for i in range(k)]},
                {"immersion": "E_minus", "incidences": [{"face": i, "param_map": ["u", "pi", "t"]} for i in range(k)]},
            ],
        },
    }
    coarse = {"gauss_order": 4, "max_subdivision_depth": 4, "min_depth": 1}
    doc["checks"]["stokes"] = {"complex": "piece", "tol": 1e-5, "quadrature": coarse}
    doc["checks"]["check-amd"] = {"complex": "fan", "trials": 0, "quadrature": coarse}
    doc["name"] = "catenoid_bundle" if k == 3 else f"catenoid_bundle(k={k})"
    return doc


def catenoid_bundle_m1(k=4):
    doc = _catenoid_piece("pi/2", k, {"P2": _E2_Y2}, "catenoid_bundle_m1")
    doc["checks"]["check-symmetry:x2"] = {"immersion": "nu", "plane": "P2", "calibration": "phi", "samples": 200}
    doc["checks"]["check-vanishing-sum:x2"] = {"calibration": "phi", "plane": "P2", "k": k}
    doc["notes"].append("x3 >= 0 and x2 >= 0 restrict v to [0, pi/2]; both boundary pieces lie in complex 4-planes")
    return doc


def borisenko_catenoid():
    return {
        "name": "borisenko_catenoid",
        "ambient_dim": 6,
        "complex_structure": "standard",
        "immersions": {
            "M": {"kind": "expr", "params": ["u", "v"], "components": _CATENOID, "box": [[-1.5, 1.5], [0, "pi"]]},
            "B": {
                "kind": "borisenko",
                "base": "M",
                "rho": "sinh(u)*cos(v)",
                "fiber_box": [[-2, 2]],
                "predicates": [_BALL6],
            },
        },
        "planes": {"P3": _E3_Y3},
        "calibrations": {"phi": {"kind": "special_lagrangian", "phase": "pi/2"}},
        "checks": {
            "check-lagrangian": {"immersion": "B", "samples": 200, "tol": 1e-8},
            "check-sl": {"immersion": "B", "phase": "pi/2", "samples": 200, "tol": 1e-7, "compare": ["borisenko_catenoid"]},
            "check-austere": {"immersion": "M", "samples": 100, "tol": 1e-8},
            "check-vanishing-sum": {"calibration": "phi", "plane": "P3", "k": 3},
        },
        "notes": ["twisted normal bundle (x, tau x n + t n) with the harmonic function sinh(u) cos(v)"],
    }


def clifford_cone_bundle():
    return {
        "name": "clifford_cone_bundle",
        "ambient_dim": 8,
        "complex_structure": "standard",
        "immersions": {
            "M": {
                "kind": "expr",
                "params": ["w", "u", "v"],
                "components": ["w*cos(u)", "w*sin(u)", "w*cos(v)", "w*sin(v)"],
                "box": [[0.05, 1], [0, "2*pi"], [0, "2*pi"]],
            },
            "nu": {"kind": "normal_bundle", "base": "M", "fiber_box": [[-1, 1]]},
        },
        "checks": {
            "check-austere": {"immersion": "M", "samples": 100, "tol": 1e-8},
            "check-lagrangian": {"immersion": "nu", "samples": 200, "tol": 1e-8},
            "check-sl": {"immersion": "nu", "phase": "pi/2", "samples": 200, "tol": 1e-6, "compare": ["clifford_cone_normal", "clifford_cone_hyperplanes"]},
        },
        "notes": ["the apex w = 0 is excluded (w >= 0.05)"],
    }


def bjorling_circle_catenoid():
    return {
        "name": "bjorling_circle_catenoid",
        "ambient_dim": 3,
        "complex_structure": None,
        "immersions": {
            "S": {
                "kind": "bjorling",
                "gamma1": ["cos(t)", "sin(t)", "0"],
                "gamma2": ["-cos(t)", "-sin(t)", "0"],
                "interval": [0, "2*pi"],
                "v_max": 0.5,
            },
        },
        "checks": {
            "bjorling": {"immersion": "S", "samples": 200, "tol": 1e-6, "normal_scale": 2.0},
            "check-austere": {"immersion": "S", "samples": 100, "tol": 1e-6},
        },
        "notes": ["circle with inward unit normal; the solution is the catenoid (cos u cosh v, sin u cosh v, -v)"],
    }


def sphere_bundle():
    return {
        "name": "sphere_bundle",
        "ambient_dim": 6,
        "complex_structure": "standard",
        "immersions": {
            "M": {
                "kind": "expr",
                "params": ["a", "b"],
                "components": ["sin(a)*cos(b)", "sin(a)*sin(b)", "cos(a)"],
                "box": [[0.3, "pi/2"], [0, "2*pi"]],
            },
            "nu": {"kind": "normal_bundle", "base": "M", "fiber_box": [[-1, 1]]},
        },
        "checks": {
            "check-austere": {"immersion": "M", "samples": 100, "tol": 1e-8},
            "check-lagrangian": {"immersion": "nu", "samples": 200, "tol": 1e-8},
            "check-sl": {"immersion": "nu", "phase": "pi/2", "samples": 200, "tol": 1e-7},
        },
        "notes": ["negative control: the sphere is minimal in no direction, so its normal bundle is Lagrangian but not special"],
    }


def halfplane_pair():
    return {
        "name": "halfplane_pair",
        "ambient_dim": 4,
        "complex_structure": "standard",
        "immersions": {
            "A": {"kind": "expr", "params": ["s", "t"], "components": ["s", "0", "t", "0"], "box": [[-1, 1], [0, 1]]},
            "B": {"kind": "expr", "params": ["s", "t"], "components": ["s", "0", "-t", "0"], "box": [[-1, 1], [0, 1]]},
            "L": {"kind": "expr", "params": ["s"], "components": ["s", "0", "0", "0"], "box": [[-1, 1]]},
        },
        "planes": {"P": {"normal_basis": [[0, 0, 1, 0], [0, 0, 0, 1]]}},
        "calibrations": {"omega": {"kind": "kahler"}, "omega_negated": {"kind": "negated", "base": "omega"}},
        "complexes": {
            "pair": {
                "faces": [
                    {"immersion": "A", "orientation": 1, "calibration": "omega"},
                    {"immersion": "B", "orientation": 1, "calibration": "omega_negated"},
                ],
                "edges": [
                    {"immersion": "L", "incidences": [{"face": 0, "param_map": ["s", "0"]}, {"face": 1, "param_map": ["s", "0"]}]}
                ],
            }
        },
        "checks": {
            "check-holomorphic": {"immersion": "A", "samples": 50, "tol": 1e-12},
            "check-vanishing-sum": {"calibration": "omega", "plane": "P", "k": 2},
            "volume": {"immersion": "A", "expected": 2.0, "tol": 1e-10},
            "stokes": {"complex": "pair", "tol": 1e-10},
            "check-amd": {"complex": "pair", "trials": 10},
            "perturb": {"complex": "pair", "trials": 20},
        },
        "notes": ["k = 2 fan: a complex line split along a real line, the halves calibrated by omega and -omega"],
    }


CATALOG = {
    "zw2_fan": zw2_fan,
    "catenoid_bundle": catenoid_bundle,
    "catenoid_bundle_m1": catenoid_bundle_m1,
    "borisenko_catenoid": borisenko_catenoid,
    "clifford_cone_bundle": clifford_cone_bundle,
    "bjorling_circle_catenoid": bjorling_circle_catenoid,
    "sphere_bundle": sphere_bundle,
    "halfplane_pair": halfplane_pair,
}


def builtin_document(spec: str) -> dict:
    name, _, query = spec.partition("?")
    if name not in CATALOG:
        raise SceneError(f"unknown builtin scene {name!r}; available: {', '.join(sorted(CATALOG))}", "scene")
    kwargs = {}
    for key, value in parse_qsl(query, keep_blank_values=True):
        try:
            kwargs[key] = int(value)
        except ValueError:
            raise SceneError(f"parameter {key!r} must be an integer", f"builtin:{name}") from None
    try:
        return CATALOG[name](**kwargs)
    except TypeError:
        raise SceneError(f"scene {name!r} does not take parameters {sorted(kwargs)}", f"builtin:{name}") from None
