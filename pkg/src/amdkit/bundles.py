"""Normal bundles, Borisenko's twisted bundle and the Björling solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from . import jets as jt
from .geometry import (
    GeometryError,
    Immersion,
    Jet2,
    check_skips,
    first_fundamental,
    mean_curvature_trace,
    orthonormal_tangent,
    sample_jets,
    unit_normal_hypersurface,
)
from .jets import Jet
from .report import Report


class BundleError(GeometryError):
    pass


class PreconditionError(BundleError):
    def __init__(self, message, defect=None):
        self.defect = defect
        super().__init__(message if defect is None else f"{message} (measured defect {defect:.3g})")


class BjorlingError(BundleError):
    pass


def _column_jets(j: Jet2):
    """Tangent columns r_a as first-order jets in the base parameters."""
    return [Jet(j.jacobian[..., a], j.hessians[..., a, :]) for a in range(j.jacobian.shape[-1])]


def _rows(v: Jet, idx):
    return Jet(v.val[..., idx], v.grad[..., idx, :])


def _hodge_normal_jet(cols):
    n = cols[0].shape[-1]
    comps = []
    for i in range(n):
        rows = [r for r in range(n) if r != i]
        d = jt.det([_rows(c, rows) for c in cols])
        comps.append(d if (i + n - 1) % 2 == 0 else -d)
    return jt.stack(comps)


def _choose_seeds(J: np.ndarray, codim: int, threshold=0.3):
    """Per-sample ambient axes whose successive projections stay well conditioned."""
    P, n, _ = J.shape
    Q = orthonormal_tangent(J)
    proj = np.eye(n)[None] - Q @ np.swapaxes(Q, -1, -2)
    chosen = np.full((P, codim), -1, dtype=int)
    count = np.zeros(P, dtype=int)
    for s in range(n):
        v = proj[:, :, s]
        nv = np.linalg.norm(v, axis=-1)
        take = (count < codim) & (nv > threshold)
        if np.any(take):
            u = v[take] / nv[take, None]
            proj[take] -= u[:, :, None] * u[:, None, :]
            chosen[take, count[take]] = s
            count[take] += 1
    if np.any(count < codim):
        raise BundleError("no ambient axis seeds a normal frame at some sample (chart error)")
    return chosen


def normal_frame_jets(j: Jet2, codim: int):
    """Orthonormal normal frame as first-order jets in the base parameters.

    Hypersurfaces use the Hodge-dual normal.  Otherwise seed axes are projected
    off the tangent space and orthonormalized, with the last vector's sign
    chosen so that (tangent frame, normal frame) is positively oriented.
    """
    if j.hessians is None:
        raise BundleError("normal frames need second derivatives of the base")
    cols = _column_jets(j)
    if codim == 1:
        N = _hodge_normal_jet(cols)
        return [N / jt.norm(N).expand()]
    P, n, k = j.jacobian.shape
    seeds = _choose_seeds(j.jacobian, codim)
    basis = []
    for c in cols:
        v = c
        for q in basis:
            v = v - q * jt.dot(v, q).expand()
        basis.append(v / jt.norm(v).expand())
    normals = []
    eye = np.eye(n)
    for c in range(codim):
        e = Jet.constant(eye[seeds[:, c]], k, 1)
        v = e
        for q in basis + normals:
            v = v - q * jt.dot(v, q).expand()
        normals.append(v / jt.norm(v).expand())
    frame = np.concatenate([orthonormal_tangent(j.jacobian), np.stack([nu.val for nu in normals], axis=-1)], axis=-1)
    sign = np.sign(np.linalg.det(frame))
    normals[-1] = normals[-1] * sign[:, None]
    return normals


def _second_names(coord_names):
    out = []
    for c in coord_names:
        out.append("y" + c[1:] if c.startswith("x") else c + "_y")
    return tuple(out)


class BundleImmersion(Immersion):
    """(p, t) -> (F(p), offset(p) + sum_j t_j nu_j(p)) in R^n (+) R^n."""

    max_order = 1

    def __init__(self, base: Immersion, fiber_box=None, predicates=(), offset=None, name="", fiber_names=None):
        self.base = base
        self.codim = base.ambient_dim - base.param_dim
        if self.codim < 1:
            raise BundleError("normal bundle needs codimension >= 1")
        if fiber_box is None:
            fiber_box = [[-1.0, 1.0]] * self.codim
        fiber_box = np.array(fiber_box, dtype=float).reshape(self.codim, 2)
        if fiber_names is None:
            fiber_names = ("t",) if self.codim == 1 else tuple(f"t{i + 1}" for i in range(self.codim))
        coords = tuple(base.coord_names) + _second_names(base.coord_names)
        params = tuple(base.param_names) + tuple(fiber_names)
        preds = [
            E.parse_predicate(p, list(params) + list(coords)) if isinstance(p, str) else p for p in predicates
        ]
        box = np.concatenate([base.box, fiber_box])
        super().__init__(params, 2 * base.ambient_dim, box, preds, coords, name)
        self.offset = offset
        self.fiber_box = fiber_box

    def is_clipped(self):
        return bool(self.predicates) or self.base.is_clipped()

    def inside(self, P, points=None, tol=0.0):
        P = np.atleast_2d(P)
        ok = super().inside(P, points, tol)
        if self.base.is_clipped():
            ok &= self.base.inside(P[:, : self.base.param_dim], None, tol)
        return ok

    def frame(self, p, order=1):
        """(base jets, normal frame jets, offset jet or None) at base parameters p."""
        bj = self.base._jet(p, 2)
        normals = normal_frame_jets(bj, self.codim)
        off = self.offset(p, bj) if self.offset is not None else None
        return bj, normals, off

    def _jet(self, P, order):
        if order > 1:
            raise GeometryError("bundle immersions supply first derivatives only")
        m = self.base.param_dim
        p, t = P[:, :m], P[:, m:]
        bj, normals, off = self.frame(p)
        n = self.base.ambient_dim
        second = off if off is not None else Jet.constant(np.zeros((len(P), n)), m, 1)
        for c, nu in enumerate(normals):
            second = second + nu * t[:, c, None]
        point = np.concatenate([bj.point, second.val], axis=-1)
        Jtop = np.concatenate([bj.jacobian, np.zeros((len(P), n, self.codim))], axis=-1)
        Jbot = np.concatenate([second.grad, np.stack([nu.val for nu in normals], axis=-1)], axis=-1)
        return Jet2(point, np.concatenate([Jtop, Jbot], axis=-2), None)


def normal_bundle(M: Immersion, fiber_box=None, predicates=(), name="") -> BundleImmersion:
    return BundleImmersion(M, fiber_box, predicates, name=name or f"nu({M.name})")


# -- Borisenko -------------------------------------------------------------


def _param_jets(base: Immersion, p, order=2):
    return dict(zip(base.param_names, Jet.variables(p, order=order)))


def _scalar_jet(e, bindings, P, k, order=2):
    v = E.evaluate(e, bindings)
    if not isinstance(v, Jet):
        v = Jet.constant(np.broadcast_to(np.asarray(v, float), (P,)), k, order)
    return v


def laplace_beltrami(M: Immersion, rho, P) -> np.ndarray:
    """Laplace–Beltrami of an expression rho(params) on M at parameters P."""
    rho = E.parse(rho, M.param_names) if isinstance(rho, str) else rho
    j = M.jet(P, order=2)
    G = first_fundamental(j)
    Ginv = np.linalg.inv(G)
    r = _scalar_jet(rho, _param_jets(M, P), len(P), M.param_dim)
    # Christoffel symbols of the induced metric: Gamma^c_ab = g^cd <r_ab, r_d>
    gam = np.einsum("pcd,pidab->pcab", Ginv, np.einsum("piab,pid->pidab", j.hessians, j.jacobian))
    cov_hess = r.hess - np.einsum("pcab,pc->pab", gam, r.grad)
    return np.einsum("pab,pab->p", Ginv, cov_hess)


def harmonic_defect(M: Immersion, rho, samples=200, rng_seed=0) -> float:
    if M.param_dim != 2:
        raise BundleError("harmonic_defect expects a surface")
    rng = np.random.default_rng(rng_seed)
    P, _, skipped = sample_jets(M, samples, rng)
    check_skips(skipped, samples, "harmonic_defect")
    return float(np.max(np.abs(laplace_beltrami(M, rho, P))))


def mean_curvature_defect(M: Immersion, samples=200, rng_seed=0) -> float:
    rng = np.random.default_rng(rng_seed)
    P, j, skipped = sample_jets(M, samples, rng)
    check_skips(skipped, samples, "mean curvature")
    return float(np.max(np.abs(mean_curvature_trace(j, unit_normal_hypersurface(j)))))


def borisenko_offset(M: Immersion, rho):
    """Jet of tau x n with tau = (rho_x r_y - rho_y r_x) / |r_x x r_y|."""
    rho = E.parse(rho, M.param_names) if isinstance(rho, str) else rho

    def offset(p, bj):
        r = _scalar_jet(rho, _param_jets(M, p), len(p), M.param_dim)
        ru, rv = _column_jets(bj)
        rho_u = Jet(r.grad[:, 0], r.hess[:, 0, :])
        rho_v = Jet(r.grad[:, 1], r.hess[:, 1, :])
        N = jt.cross(ru, rv)
        nN = jt.norm(N).expand()
        n = N / nN
        tau = (rv * rho_u.expand() - ru * rho_v.expand()) / nN
        return jt.cross(tau, n)

    return offset


def borisenko_bundle(
    M: Immersion,
    rho,
    fiber_box=None,
    predicates=(),
    samples=100,
    rng_seed=0,
    tol=1e-6,
    name="",
) -> BundleImmersion:
    if M.param_dim != 2 or M.ambient_dim != 3:
        raise BundleError("Borisenko's construction needs a surface in R^3")
    rho = E.parse(rho, M.param_names) if isinstance(rho, str) else rho
    h = mean_curvature_defect(M, samples, rng_seed)
    if h > tol:
        raise PreconditionError("base surface is not minimal", h)
    d = harmonic_defect(M, rho, samples, rng_seed)
    if d > tol:
        raise PreconditionError("rho is not harmonic on the base", d)
    return BundleImmersion(M, fiber_box, predicates, offset=borisenko_offset(M, rho), name=name or f"borisenko({M.name})")


# -- Björling --------------------------------------------------------------


@dataclass
class BjorlingData:
    gamma1: tuple  # three expressions in `var`
    gamma2: tuple
    interval: tuple[float, float]
    v_max: float = 0.5
    var: str = "t"
    norm: object = None  # analytic |gamma2| when it is not constant
    check_samples: int = 401
    tol: float = 1e-8
    _g1: tuple = field(init=False, repr=False)
    _g2: tuple = field(init=False, repr=False)
    _norm: object = field(init=False, repr=False)

    def __post_init__(self):
        self._g1 = tuple(E.parse(e, [self.var]) if isinstance(e, str) else e for e in self.gamma1)
        self._g2 = tuple(E.parse(e, [self.var]) if isinstance(e, str) else e for e in self.gamma2)
        if len(self._g1) != 3 or len(self._g2) != 3:
            raise BjorlingError("Björling curves must have three components")
        if self.norm is not None:
            self._norm = E.parse(self.norm, [self.var]) if isinstance(self.norm, str) else self.norm
        else:
            self._norm = None
        self.validate()

    def eval_curves(self, z, order=2):
        """Jets (in the curve parameter) of gamma1 and the unit field at points z."""
        z = np.asarray(z)
        cplx = np.iscomplexobj(z)
        (tj,) = Jet.variables(z[..., None].astype(complex if cplx else float), order=order)
        b = {self.var: tj}
        shape = z.shape

        def ev(e):
            v = E.evaluate(e, b)
            if not isinstance(v, Jet):
                v = Jet.constant(np.broadcast_to(np.asarray(v, dtype=tj.val.dtype), shape), 1, order)
            return v

        g1 = jt.stack([ev(e) for e in self._g1])
        g2 = jt.stack([ev(e) for e in self._g2])
        nrm = ev(self._norm_expr)
        return g1, g2 / nrm.expand()

    def validate(self):
        a, b = self.interval
        if not b > a:
            raise BjorlingError("empty parameter interval")
        ts = np.linspace(a, b, self.check_samples)
        (tj,) = Jet.variables(ts[:, None], order=1)
        bind = {self.var: tj}
        d1 = np.stack([_val_grad(E.evaluate(e, bind), len(ts))[1] for e in self._g1], axis=-1)
        g2 = np.stack([_val_grad(E.evaluate(e, bind), len(ts))[0] for e in self._g2], axis=-1)
        ortho = float(np.max(np.abs(np.sum(d1 * g2, axis=-1))))
        if ortho > self.tol:
            raise PreconditionError("gamma1' . gamma2 must vanish", ortho)
        mag = np.linalg.norm(g2, axis=-1)
        if float(np.min(mag)) <= self.tol:
            raise PreconditionError("gamma2 must not vanish", float(np.min(mag)))
        if np.min(np.linalg.norm(d1, axis=-1)) <= self.tol:
            raise PreconditionError("gamma1 must be regular", float(np.min(np.linalg.norm(d1, axis=-1))))
        if self._norm is not None:
            nv = np.broadcast_to(np.asarray(E.evaluate(self._norm, {self.var: ts}), float), ts.shape)
            if np.any(nv <= 0):
                raise BjorlingError("the supplied norm expression must be positive on the interval")
            err = float(np.max(np.abs(nv - mag) / mag))
            if err > 1e-10:
                raise BjorlingError(f"the supplied norm expression does not match |gamma2| (relative error {err:.3g})")
            self._norm_expr = self._norm
        else:
            sq = mag**2
            if np.max(np.abs(sq - sq[0])) > 1e-12 * max(1.0, sq[0]):
                raise BjorlingError(
                    "|gamma2| is not constant; supply an analytic expression for it (`norm`) "
                    "or give gamma2 as a unit field, since an automatic square root has no "
                    "canonical analytic branch"
                )
            self._norm_expr = E.Num(float(np.sqrt(sq[0])))
        self.gamma2_norm_range = (float(np.min(mag)), float(np.max(mag)))


def _val_grad(v, n):
    if isinstance(v, Jet):
        return v.val, v.grad[..., 0]
    return np.broadcast_to(np.asarray(v, float), (n,)), np.zeros(n)


_GL64 = np.polynomial.legendre.leggauss(64)


def _gl_segment(f, a, b, nodes=_GL64):
    """Gauss–Legendre on straight segments a -> b (arrays of complex endpoints)."""
    x, w = nodes
    s = 0.5 * (x + 1.0)
    pts = a[:, None] + (b - a)[:, None] * s[None, :]
    vals = f(pts)  # (P, nodes, 3)
    return 0.5 * (b - a)[:, None] * np.einsum("pqi,q->pi", vals, w)


class BjorlingSurface(Immersion):
    """X(u, v) = Re gamma1(z) + Im int_u^z n(w) x gamma1'(w) dw, z = u + i v.

    The unit normal of X along v = 0 is +gamma2/|gamma2|.
    """

    max_order = 2

    def __init__(self, data: BjorlingData, name=""):
        a, b = data.interval
        super().__init__(("u", "v"), 3, [[a, b], [-data.v_max, data.v_max]], name=name or "bjorling")
        self.data = data
        self.integral_tol = 1e-9

    def _integrand(self, w):
        g1, n = self.data.eval_curves(w, order=1)
        return np.cross(n.val, g1.grad[..., 0])

    def _integral(self, u, z):
        coarse = _gl_segment(self._integrand, u.astype(complex), z)
        mid = 0.5 * (u + z)
        fine = _gl_segment(self._integrand, u.astype(complex), mid) + _gl_segment(self._integrand, mid, z)
        err = np.abs(fine - coarse)
        scale = np.maximum(1.0, np.abs(fine))
        if np.any(err > self.integral_tol * scale):
            raise BjorlingError(
                f"path integral did not converge (max disagreement {float(np.max(err / scale)):.3g}); "
                "reduce v_max"
            )
        return fine

    def _jet(self, P, order):
        u, v = P[:, 0], P[:, 1]
        z = u + 1j * v
        g1, n = self.data.eval_curves(z, order=2)
        c, dc, ddc = g1.val, g1.grad[..., 0], g1.hess[..., 0, 0]
        nn, dn = n.val, n.grad[..., 0]
        X = c.real + self._integral(u, z).imag
        dphi = dc - 1j * np.cross(nn, dc)
        J = np.stack([dphi.real, -dphi.imag], axis=-1)
        H = None
        if order >= 2:
            ddphi = ddc - 1j * (np.cross(dn, dc) + np.cross(nn, ddc))
            H = np.empty((len(P), 3, 2, 2))
            H[..., 0, 0] = ddphi.real
            H[..., 0, 1] = H[..., 1, 0] = -ddphi.imag
            H[..., 1, 1] = -ddphi.real
        return Jet2(X, J, H)


def bjorling_solve(data: BjorlingData, name="") -> BjorlingSurface:
    return BjorlingSurface(data, name)


def bjorling_report(S: BjorlingSurface, samples=200, rng_seed=0, tol_h=1e-6) -> Report:
    """Minimality on the strip, containment of gamma1 and the normal along v = 0."""
    data = S.data
    rep = Report(check="bjorling", seed=rng_seed, samples=samples)
    h = mean_curvature_defect(S, samples, rng_seed)
    rep.metric("max_abs_mean_curvature", h, tol_h)
    ts = np.linspace(*data.interval, 201)
    P = np.stack([ts, np.zeros_like(ts)], axis=-1)
    j = S.jet(P, order=1)
    g1, n = data.eval_curves(ts.astype(float), order=1)
    dist = float(np.max(np.linalg.norm(j.point - g1.val, axis=-1)))
    rep.metric("curve_containment", dist, 1e-8)
    nrm = unit_normal_hypersurface(j)
    ang = float(np.max(np.arctan2(np.linalg.norm(np.cross(nrm, n.val), axis=-1), np.sum(nrm * n.val, axis=-1))))
    rep.metric("normal_angle_rad", ang, 1e-6)
    rep.status = "pass" if (h < tol_h and dist < 1e-8 and ang < 1e-6) else "fail"
    return rep


def bjorling_bundle(data: BjorlingData, fiber_box=None, samples=201, name=""):
    """Normal bundle of the Björling surface and its containment of gamma1 + i gamma2."""
    S = bjorling_solve(data, name=f"{name or 'bjorling'}_base")
    lo, hi = data.gamma2_norm_range
    if fiber_box is None:
        fiber_box = [[min(-1.0, -hi * (1 + 1e-6)), max(1.0, hi * (1 + 1e-6))]]
    nu = normal_bundle(S, fiber_box, name=name or "bjorling_bundle")
    ts = np.linspace(*data.interval, samples)
    P = np.stack([ts, np.zeros_like(ts)], axis=-1)
    j = S.jet(P, order=1)
    nrm = unit_normal_hypersurface(j)
    (tj,) = Jet.variables(ts[:, None], order=1)
    g1 = np.stack([_val_grad(E.evaluate(e, {data.var: tj}), samples)[0] for e in data._g1], axis=-1)
    g2 = np.stack([_val_grad(E.evaluate(e, {data.var: tj}), samples)[0] for e in data._g2], axis=-1)
    fiber = np.sum(g2 * nrm, axis=-1)
    line_dist = np.linalg.norm(g2 - fiber[:, None] * nrm, axis=-1)
    base_dist = np.linalg.norm(j.point - g1, axis=-1)
    # point of the bundle at (t, 0, fiber) against (gamma1, gamma2)
    bp = nu.points(np.stack([ts, np.zeros_like(ts), fiber], axis=-1))
    total = np.linalg.norm(bp - np.concatenate([g1, g2], axis=-1), axis=-1)
    rep = Report(check="bjorling-bundle", samples=samples)
    worst = float(max(np.max(line_dist), np.max(base_dist), np.max(total)))
    rep.metric("containment_distance", worst, 1e-6)
    rep.info("fiber_coordinate_range", [float(fiber.min()), float(fiber.max())])
    in_box = bool(np.all((fiber >= nu.fiber_box[0, 0]) & (fiber <= nu.fiber_box[0, 1])))
    rep.info("fiber_in_box", in_box)
    rep.status = "pass" if worst < 1e-6 and in_box else "fail"
    return nu, rep
