"""Parametrized immersions, their fundamental forms and volume quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from . import expr as E
from .jets import Jet, stack
from .report import Report


class GeometryError(ValueError):
    pass


class DegeneracyError(GeometryError):
    """Jacobian (or frame) is rank deficient where full rank is required."""


class InconclusiveError(GeometryError):
    pass


@dataclass
class Jet2:
    """Value, Jacobian and Hessian stack of an immersion at one or many parameters.

    Batched jets carry a leading sample axis on every field.  ``hessians`` is
    ``None`` for immersions that only provide first derivatives.
    """

    point: np.ndarray  # (..., n)
    jacobian: np.ndarray  # (..., n, k)
    hessians: np.ndarray | None = None  # (..., n, k, k)

    def __getitem__(self, i):
        return Jet2(
            self.point[i],
            self.jacobian[i],
            None if self.hessians is None else self.hessians[i],
        )


@dataclass(frozen=True)
class QuadratureSpec:
    gauss_order: int = 16
    max_subdivision_depth: int = 8
    rel_tol: float = 1e-6
    max_nodes: int = 4_000_000
    min_depth: int = 2  # no cell is accepted above this depth

    def __post_init__(self):
        if self.gauss_order < 2 or self.max_subdivision_depth < 0 or self.min_depth < 0:
            raise GeometryError("gauss_order must be >= 2 and depth >= 0")


def default_coords(n):
    return tuple(f"x{i + 1}" for i in range(n))


class Immersion:
    """A map from a box (optionally cut by predicates) into R^n.

    Subclasses implement :meth:`_jet`; ``max_order`` says how many derivatives
    they can supply.
    """

    max_order = 2

    def __init__(self, param_names, ambient_dim, box, predicates=(), coord_names=None, name=""):
        self.param_names = tuple(param_names)
        self.ambient_dim = int(ambient_dim)
        self.box = np.array(box, dtype=float).reshape(len(self.param_names), 2)
        if np.any(self.box[:, 1] < self.box[:, 0]) or not np.all(np.isfinite(self.box)):
            raise GeometryError(f"domain box must be bounded with lo <= hi: {self.box.tolist()}")
        self.coord_names = tuple(coord_names) if coord_names else default_coords(self.ambient_dim)
        self.predicates = tuple(predicates)
        self.name = name

    @property
    def param_dim(self):
        return len(self.param_names)

    def jet(self, params, order=2) -> Jet2:
        """Jets at ``params`` of shape (k,) or (P, k)."""
        p = np.asarray(params, dtype=float)
        single = p.ndim == 1
        P = p.reshape(-1, self.param_dim)
        if order > self.max_order:
            raise GeometryError(f"{type(self).__name__} supplies derivatives up to order {self.max_order}")
        j = self._jet(P, order)
        return j[0] if single else j

    def points(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=float)
        single = p.ndim == 1
        out = self._points(p.reshape(-1, self.param_dim))
        return out[0] if single else out

    def _points(self, P):
        return self._jet(P, 1).point

    def _jet(self, P, order) -> Jet2:
        raise NotImplementedError

    def bindings(self, P, points):
        b = {name: P[:, i] for i, name in enumerate(self.param_names)}
        b.update({name: points[:, i] for i, name in enumerate(self.coord_names)})
        return b

    def inside(self, P, points=None, tol=0.0) -> np.ndarray:
        P = np.atleast_2d(P)
        ok = np.all((P >= self.box[:, 0] - tol) & (P <= self.box[:, 1] + tol), axis=1)
        if self.predicates:
            pts = self._points(P) if points is None else points
            b = self.bindings(P, pts)
            for pred in self.predicates:
                ok &= np.broadcast_to(pred.holds(b, tol), ok.shape)
        return ok

    def is_clipped(self):
        return bool(self.predicates)

    def cells_resolved(self, lo, hi) -> np.ndarray:
        """Whether quadrature cells are fine enough to be trusted; subclasses with
        localized features override this."""
        return np.ones(len(lo), dtype=bool)

    def predicate_residuals(self, P, points):
        b = self.bindings(P, points)
        return [np.broadcast_to(np.asarray(pr.residual(b), float), (len(P),)) for pr in self.predicates]

    def predicate_gradients(self, P):
        """Parameter-space gradients of each predicate residual, shape (P, k) each."""
        j = self._jet(P, 1)
        k = self.param_dim
        b = {}
        for i, name in enumerate(self.param_names):
            g = np.zeros((len(P), k))
            g[:, i] = 1.0
            b[name] = Jet(P[:, i], g)
        for i, name in enumerate(self.coord_names):
            b[name] = Jet(j.point[:, i], j.jacobian[:, i, :])
        out = []
        for pred in self.predicates:
            r = pred.residual(b)
            out.append(r.grad if isinstance(r, Jet) else np.zeros((len(P), k)))
        return out

    def sample_interior(self, count, rng, max_tries=50):
        """Uniform samples of the clipped domain (rejection on predicates)."""
        lo, hi = self.box[:, 0], self.box[:, 1]
        got = []
        n = 0
        for _ in range(max_tries):
            P = lo + (hi - lo) * rng.random((max(count, 16) * 2, self.param_dim))
            P = P[self.inside(P)]
            got.append(P)
            n += len(P)
            if n >= count:
                break
        P = np.concatenate(got)[:count]
        if len(P) < count:
            raise GeometryError(f"could only place {len(P)} of {count} samples in the domain of {self.name}")
        return P


def _seed_params(P, order):
    return Jet.variables(P, order=order)


class ExprImmersion(Immersion):
    """Immersion whose components are expressions in the parameters."""

    def __init__(self, param_names, components, box, predicates=(), coord_names=None, name=""):
        comps = [E.parse(c, param_names) if isinstance(c, str) else c for c in components]
        preds = [
            E.parse_predicate(p, list(param_names) + list(coord_names or default_coords(len(comps))))
            if isinstance(p, str)
            else p
            for p in predicates
        ]
        super().__init__(param_names, len(comps), box, preds, coord_names, name)
        self.components = tuple(comps)

    def _points(self, P):
        b = {name: P[:, i] for i, name in enumerate(self.param_names)}
        cols = [np.broadcast_to(np.asarray(E.evaluate(c, b), float), (len(P),)) for c in self.components]
        return np.stack(cols, axis=-1)

    def _jet(self, P, order):
        vars_ = _seed_params(P, max(order, 1))
        b = dict(zip(self.param_names, vars_))
        k = self.param_dim
        comps = []
        for c in self.components:
            v = E.evaluate(c, b)
            if not isinstance(v, Jet):
                v = Jet.constant(np.broadcast_to(np.asarray(v, float), (len(P),)), k, max(order, 1))
            comps.append(v)
        j = stack(comps)
        return Jet2(j.val, j.grad, j.hess if order >= 2 else None)


class LinearImage(Immersion):
    """x -> A x applied to another immersion."""

    def __init__(self, base: Immersion, A, name="", predicates=()):
        super().__init__(base.param_names, base.ambient_dim, base.box, predicates, base.coord_names, name)
        self.base = base
        self.A = np.asarray(A, dtype=float)
        self.max_order = base.max_order

    def is_clipped(self):
        return bool(self.predicates) or self.base.is_clipped()

    def inside(self, P, points=None, tol=0.0):
        P = np.atleast_2d(P)
        # base predicates are stated in the base's own coordinates
        ok = self.base.inside(P, None, tol)
        return ok & super().inside(P, points, tol)

    def predicate_residuals(self, P, points):
        return self.base.predicate_residuals(P, self.base._points(P)) + super().predicate_residuals(P, points)

    def predicate_gradients(self, P):
        return self.base.predicate_gradients(P) + super().predicate_gradients(P)

    def _points(self, P):
        return self.base._points(P) @ self.A.T

    def _jet(self, P, order):
        j = self.base._jet(P, order)
        H = None if j.hessians is None else np.einsum("ij,pjab->piab", self.A, j.hessians)
        return Jet2(j.point @ self.A.T, np.einsum("ij,pja->pia", self.A, j.jacobian), H)


# -- pointwise geometry ---------------------------------------------------


def jet2_eval(F: Immersion, p) -> Jet2:
    p = np.asarray(p, dtype=float)
    if p.shape != (F.param_dim,):
        raise GeometryError(f"expected a parameter point of dimension {F.param_dim}")
    if not F.inside(p[None, :], tol=1e-12)[0]:
        raise GeometryError(f"parameter {p.tolist()} is outside the domain of {F.name or 'immersion'}")
    return F.jet(p, order=min(2, F.max_order))


def first_fundamental(j: Jet2, rank_tol=1e-8) -> np.ndarray:
    J = np.asarray(j.jacobian)
    s = np.linalg.svd(J, compute_uv=False)
    if np.any(s[..., -1] <= rank_tol):
        raise DegeneracyError("Jacobian is rank deficient")
    return np.swapaxes(J, -1, -2) @ J


def volume_element(J: np.ndarray) -> np.ndarray:
    G = np.swapaxes(J, -1, -2) @ J
    return np.sqrt(np.clip(np.linalg.det(G), 0.0, None))


def unit_normal_hypersurface(j: Jet2) -> np.ndarray:
    """Unit normal N with det[J | N] > 0 (the cross product r_u x r_v in R^3)."""
    J = np.asarray(j.jacobian)
    n, k = J.shape[-2:]
    if k != n - 1:
        raise GeometryError("hypersurface normal needs k == n - 1")
    N = hodge_normal(J)
    nn = np.linalg.norm(N, axis=-1, keepdims=True)
    if np.any(nn <= 1e-12):
        raise DegeneracyError("degenerate tangent frame")
    return N / nn


def hodge_normal(J: np.ndarray) -> np.ndarray:
    """Unnormalized normal with components det[J | e_i]."""
    n = J.shape[-2]
    cols = []
    for i in range(n):
        rows = [r for r in range(n) if r != i]
        sign = (-1) ** (i + n - 1)
        cols.append(sign * np.linalg.det(J[..., rows, :]))
    return np.stack(cols, axis=-1)


def orthonormal_tangent(J: np.ndarray) -> np.ndarray:
    """Orientation-preserving orthonormal basis of the column span (Gram–Schmidt)."""
    Q, R = np.linalg.qr(J)
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    d = np.where(d == 0, 1.0, d)
    return Q * d[..., None, :]


def normal_projector(J: np.ndarray) -> np.ndarray:
    Q = orthonormal_tangent(J)
    n = J.shape[-2]
    return np.eye(n) - Q @ np.swapaxes(Q, -1, -2)


def second_fundamental(j: Jet2, normal) -> np.ndarray:
    if j.hessians is None:
        raise GeometryError("second derivatives unavailable for this immersion")
    return np.einsum("...iab,...i->...ab", j.hessians, normal)


def shape_operator(j: Jet2, normal, tol=1e-8) -> np.ndarray:
    """G^{-1} II with II_ab = <r_ab, normal>; sign fixed so the unit sphere with
    outward normal has shape operator -I."""
    normal = np.asarray(normal, dtype=float)
    G = first_fundamental(j)
    if np.any(np.abs(np.linalg.norm(normal, axis=-1) - 1.0) > tol):
        raise GeometryError("normal must be a unit vector")
    tang = np.einsum("...ia,...i->...a", j.jacobian, normal)
    if np.any(np.abs(tang) > tol * np.maximum(1.0, np.linalg.norm(j.jacobian, axis=-2))):
        raise GeometryError("vector is not normal to the tangent space")
    return np.linalg.solve(G, second_fundamental(j, normal))


def _principal(G, II):
    return scipy.linalg.eigh(II, G, eigvals_only=True)


def principal_curvatures(F: Immersion, p, normal) -> list[float]:
    j = jet2_eval(F, p)
    shape_operator(j, normal)  # validation
    G = first_fundamental(j)
    return sorted(float(x) for x in _principal(G, second_fundamental(j, np.asarray(normal, float))))


def mean_curvature_trace(j: Jet2, normal) -> np.ndarray:
    """Trace of the shape operator (sum of principal curvatures)."""
    S = shape_operator(j, normal)
    return np.trace(S, axis1=-2, axis2=-1)


def random_unit_normals(J: np.ndarray, count: int, rng) -> np.ndarray:
    """Random unit vectors in the normal space at each sample, shape (P, count, n)."""
    Pn = normal_projector(J)
    G = rng.standard_normal((J.shape[0], count, J.shape[-2]))
    V = np.einsum("pij,pcj->pci", Pn, G)
    return V / np.linalg.norm(V, axis=-1, keepdims=True)


def austere_defect(G, II) -> float:
    """max |kappa_sorted + reverse(kappa_sorted)|: zero iff the multiset is symmetric."""
    kap = _principal(G, II)
    return float(np.max(np.abs(kap + kap[::-1])))


def sample_jets(F: Immersion, samples: int, rng, order=2, rank_tol=1e-8):
    """Jets at random interior samples, dropping rank-deficient ones.

    Returns (params, jets, skipped).
    """
    P = F.sample_interior(samples, rng)
    j = F.jet(P, order=order)
    s = np.linalg.svd(j.jacobian, compute_uv=False)[:, -1]
    ok = s > rank_tol
    return P[ok], j[ok], int(np.count_nonzero(~ok))


def check_skips(skipped, samples, what):
    if skipped > 0.2 * samples:
        raise InconclusiveError(f"{what}: {skipped} of {samples} samples were degenerate")


def is_austere(F: Immersion, samples=100, normal_trials=8, tol=1e-8, rng_seed=0) -> Report:
    if F.ambient_dim <= F.param_dim:
        raise GeometryError("austerity needs codimension >= 1")
    rng = np.random.default_rng(rng_seed)
    P, j, skipped = sample_jets(F, samples, rng)
    check_skips(skipped, samples, "is_austere")
    normals = random_unit_normals(j.jacobian, normal_trials, rng)
    G = first_fundamental(j)
    worst = 0.0
    sym = 0.0
    for s in range(len(P)):
        for nu in normals[s]:
            II = second_fundamental(j[s], nu)
            worst = max(worst, austere_defect(G[s], II))
            kp = np.sort(_principal(G[s], II))
            km = np.sort(_principal(G[s], -II))
            sym = max(sym, float(np.max(np.abs(kp + km[::-1]))))
    rep = Report(check="check-austere", seed=rng_seed, samples=len(P))
    rep.metric("austere_defect", worst, tol)
    rep.metric("negated_normal_defect", sym, tol)
    rep.info("skipped_samples", skipped)
    rep.info("normal_trials", normal_trials)
    rep.status = "pass" if worst < tol else "fail"
    return rep


# -- quadrature -----------------------------------------------------------


@dataclass
class QuadResult:
    value: float
    error: float
    warning: bool = False
    cells: int = 0
    notes: list = field(default_factory=list)


def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _cell_nodes(lo, hi, order):
    """Tensor Gauss nodes for a stack of cells: (C, order^k, k) and weights (C, order^k)."""
    x, w = _gauss(order)
    k = lo.shape[1]
    grids = np.meshgrid(*([x] * k), indexing="ij")
    unit = np.stack([g.reshape(-1) for g in grids], axis=-1)
    wgrid = np.meshgrid(*([w] * k), indexing="ij")
    wu = np.prod(np.stack([g.reshape(-1) for g in wgrid], axis=-1), axis=-1)
    span = hi - lo
    nodes = lo[:, None, :] + unit[None, :, :] * span[:, None, :]
    weights = wu[None, :] * np.prod(span, axis=-1)[:, None]
    return nodes, weights


def _children(lo, hi):
    k = lo.shape[1]
    mid = 0.5 * (lo + hi)
    out_lo, out_hi = [], []
    for corner in range(2**k):
        bits = np.array([(corner >> d) & 1 for d in range(k)], dtype=bool)
        out_lo.append(np.where(bits, mid, lo))
        out_hi.append(np.where(bits, hi, mid))
    # (C*2^k, k), children of cell c are rows c*2^k ... c*2^k + 2^k - 1
    return np.stack(out_lo, axis=1).reshape(-1, k), np.stack(out_hi, axis=1).reshape(-1, k)


def integrate(F: Immersion, integrand: Callable[[Jet2], np.ndarray], q: QuadratureSpec = QuadratureSpec(), chunk=200_000) -> QuadResult:
    """Integrate ``integrand(jets)`` over the clipped parameter domain of F.

    Interior cells are refined until the parent Gauss value agrees with the sum
    over its 2^k children (never before ``min_depth``, which guards against a
    narrow feature hiding between the nodes of a coarse cell).  Cells whose nodes straddle a predicate are split up
    to ``max_subdivision_depth``; at that depth they are integrated with the
    predicate as a node mask, and the last parent/children disagreement is
    booked as their error.
    """
    k = F.param_dim
    g = q.gauss_order
    has_pred = F.is_clipped()
    npc = g**k

    def eval_cells(lo, hi):
        vals = np.empty(len(lo))
        absv = np.empty(len(lo))
        frac = np.empty(len(lo))
        step = max(1, chunk // npc)
        for s in range(0, len(lo), step):
            nodes, w = _cell_nodes(lo[s : s + step], hi[s : s + step], g)
            flat = nodes.reshape(-1, k)
            j = F.jet(flat, order=1)
            f = np.asarray(integrand(j), dtype=float).reshape(w.shape)
            if has_pred:
                m = F.inside(flat, j.point).reshape(w.shape)
            else:
                m = np.ones(w.shape, dtype=bool)
            vals[s : s + step] = np.sum(np.where(m, f * w, 0.0), axis=1)
            absv[s : s + step] = np.sum(np.abs(f) * w, axis=1)
            frac[s : s + step] = m.mean(axis=1)
        return vals, absv, frac

    lo = F.box[None, :, 0].copy()
    hi = F.box[None, :, 1].copy()
    vals, absv, frac = eval_cells(lo, hi)
    total_vol = float(np.prod(F.box[:, 1] - F.box[:, 0]))
    scale = max(abs(vals[0]), absv[0], 1e-300)
    near = frac < 1.0  # cell touches (or descends from a cell touching) a predicate boundary
    inherited = 0.5 * absv  # error share inherited from the parent comparison
    value = 0.0
    error = 0.0
    warning = False
    cells = 1
    nodes_used = npc
    depth = 0
    notes = []
    nchild = 2**k
    while len(lo):
        keep = frac > 0
        lo, hi, vals, absv, frac = lo[keep], hi[keep], vals[keep], absv[keep], frac[keep]
        near, inherited = near[keep], inherited[keep]
        if not len(lo):
            break
        budget_left = nodes_used + len(lo) * nchild * npc <= q.max_nodes
        if depth >= q.max_subdivision_depth or not budget_left:
            value += float(np.sum(vals))
            error += float(np.sum(inherited))
            lost = ~near
            if np.any(lost):
                warning = True
                notes.append(f"{int(np.sum(lost))} interior cells unresolved at depth {depth}")
            if np.any(frac < 1.0):
                notes.append(f"{int(np.sum(frac < 1.0))} boundary cells integrated with predicate node masks at depth {depth}")
            if not budget_left:
                warning = True
                notes.append("node budget exhausted")
            break
        clo, chi = _children(lo, hi)
        cv, ca, cf = eval_cells(clo, chi)
        cells += len(clo)
        nodes_used += len(clo) * npc
        csum = cv.reshape(-1, nchild).sum(axis=1)
        cfrac = cf.reshape(-1, nchild)
        diff = np.abs(csum - vals)
        cell_vol = np.prod(hi - lo, axis=1)
        tol_cell = q.rel_tol * scale * cell_vol / total_vol
        cut = (frac < 1.0) | np.any(cfrac < 1.0, axis=1)
        settled = (~cut) & (diff <= tol_cell) & (depth + 1 >= q.min_depth)
        if np.any(settled):
            settled[settled] = F.cells_resolved(lo[settled], hi[settled])
        value += float(np.sum(csum[settled]))
        error += float(np.sum(diff[settled]))
        refine = np.repeat(~settled, nchild)
        child_near = np.repeat(near | cut, nchild)
        child_err = np.repeat(diff / nchild, nchild)
        lo, hi, vals, absv, frac = clo[refine], chi[refine], cv[refine], ca[refine], cf[refine]
        near, inherited = child_near[refine], child_err[refine]
        depth += 1
    if error > q.rel_tol * max(abs(value), 1e-300) and not warning:
        warning = True
        notes.append("estimated error above target tolerance")
    return QuadResult(value, error, warning, cells, notes)


def volume(F: Immersion, q: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    return integrate(F, lambda j: volume_element(j.jacobian), q)


def sample_boundary(F: Immersion, per_side=64, rng=None):
    """Parameter samples on the boundary of the clipped domain.

    Box sides are sampled on a grid; predicate boundaries are located by
    bisection between grid neighbours that straddle the predicate.
    """
    k = F.param_dim
    lo, hi = F.box[:, 0], F.box[:, 1]
    pts = []
    m = max(2, int(round(per_side ** (1.0 / max(k - 1, 1)))) if k > 1 else 1)
    axes = [np.linspace(lo[i], hi[i], m) for i in range(k)]
    for d in range(k):
        for side in (lo[d], hi[d]):
            others = [axes[i] for i in range(k) if i != d]
            if others:
                mesh = np.meshgrid(*others, indexing="ij")
                cols = [g.reshape(-1) for g in mesh]
            else:
                cols = []
            n_pts = len(cols[0]) if cols else 1
            P = np.empty((n_pts, k))
            c = 0
            for i in range(k):
                if i == d:
                    P[:, i] = side
                else:
                    P[:, i] = cols[c]
                    c += 1
            pts.append(P)
    P = np.unique(np.concatenate(pts), axis=0)
    if F.is_clipped():
        P = P[F.inside(P, tol=1e-9)]
        # predicate crossings on a grid
        mg = max(8, m)
        grid_axes = [np.linspace(lo[i], hi[i], mg) for i in range(k)]
        mesh = np.stack(np.meshgrid(*grid_axes, indexing="ij"), axis=-1)
        flat = mesh.reshape(-1, k)
        ins = F.inside(flat).reshape(mesh.shape[:-1])
        found = []
        for d in range(k):
            a = np.take(ins, range(mg - 1), axis=d)
            b = np.take(ins, range(1, mg), axis=d)
            cross = np.argwhere(a != b)
            for idx in cross:
                ia = tuple(idx)
                ib = list(idx)
                ib[d] += 1
                pa = mesh[ia]
                pb = mesh[tuple(ib)]
                ina = ins[ia]
                for _ in range(50):
                    mid = 0.5 * (pa + pb)
                    if F.inside(mid[None, :])[0] == ina:
                        pa = mid
                    else:
                        pb = mid
                found.append(pa if ina else pb)
        if found:
            P = np.concatenate([P, np.array(found)])
    return P
