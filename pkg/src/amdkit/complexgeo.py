"""Complex structure on R^{2n}, Kähler and special Lagrangian calibrations,
rotations about real-codimension-2 planes."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .exterior import KForm, comass_sample, permutation_sign, pushforward_orthogonal
from .geometry import (
    Immersion,
    LinearImage,
    check_skips,
    orthonormal_tangent,
    sample_jets,
)
from .report import Report


class ComplexGeometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """J on R^{2n} from index pairs (a_j, b_j): z_j = x_{a_j} + i x_{b_j}, J e_a = e_b."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        flat = [i for p in pairs for i in p]
        if sorted(flat) != list(range(2 * len(pairs))):
            raise ComplexGeometryError(f"pairs must partition range({2 * len(pairs)}): {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def standard(cls, n):
        """z_j = x_j + i y_j on R^n (+) R^n."""
        return cls(tuple((j, n + j) for j in range(n)))

    @property
    def n(self):
        return len(self.pairs)

    @property
    def real_dim(self):
        return 2 * self.n

    @property
    def J(self) -> np.ndarray:
        M = np.zeros((self.real_dim, self.real_dim))
        for a, b in self.pairs:
            M[b, a] = 1.0
            M[a, b] = -1.0
        return M

    @property
    def re_index(self):
        return np.array([a for a, _ in self.pairs])

    @property
    def im_index(self):
        return np.array([b for _, b in self.pairs])

    def complex_coords(self, V) -> np.ndarray:
        """Complex coordinates of real vectors stacked on axis -2: (..., 2n, c) -> (..., n, c)."""
        V = np.asarray(V)
        return V[..., self.re_index, :] + 1j * V[..., self.im_index, :]

    def realify(self, U) -> np.ndarray:
        """Real 2n x 2n matrix of the complex-linear map with matrix U."""
        U = np.asarray(U, dtype=complex)
        M = np.zeros((self.real_dim, self.real_dim))
        a, b = self.re_index, self.im_index
        M[np.ix_(a, a)] = U.real
        M[np.ix_(a, b)] = -U.imag
        M[np.ix_(b, a)] = U.imag
        M[np.ix_(b, b)] = U.real
        return M

    def complex_determinant(self, M) -> complex:
        """det over C of a real matrix commuting with J."""
        M = np.asarray(M, dtype=float)
        a, b = self.re_index, self.im_index
        C = M[np.ix_(a, a)] + 1j * M[np.ix_(b, a)]
        return complex(np.linalg.det(C))


@dataclass(frozen=True, eq=False)
class CalibrationForm:
    form: KForm
    kind: str  # kahler | special_lagrangian | rotated
    phase: float = 0.0

    @property
    def n(self):
        return self.form.n

    @property
    def k(self):
        return self.form.k

    def __neg__(self):
        return CalibrationForm(-self.form, self.kind, self.phase + math.pi)


def kahler_form(cs: ComplexStructure) -> CalibrationForm:
    """omega(X, Y) = <JX, Y>."""
    J = cs.J
    N = cs.real_dim
    terms = {(i, j): J[j, i] for i in range(N) for j in range(i + 1, N) if J[j, i] != 0.0}
    return CalibrationForm(KForm.from_dict(N, 2, terms), "kahler")


def sl_form(cs: ComplexStructure, phase: float = 0.0) -> CalibrationForm:
    """Re(e^{-i phase} dz_1 ^ ... ^ dz_n) expanded over real basis forms."""
    n, N = cs.n, cs.real_dim
    terms: dict[tuple[int, ...], complex] = {}
    for choice in product((0, 1), repeat=n):
        idx = tuple(cs.pairs[j][c] for j, c in enumerate(choice))
        coeff = (1j) ** sum(choice)
        sign = permutation_sign(idx)
        key = tuple(sorted(idx))
        terms[key] = terms.get(key, 0.0) + sign * coeff
    rot = cmath.exp(-1j * phase)
    real_terms = {idx: (rot * c).real for idx, c in terms.items()}
    return CalibrationForm(KForm.from_dict(N, n, real_terms), "special_lagrangian", phase)


# -- defect measurements --------------------------------------------------


def _frames(F: Immersion, cs: ComplexStructure, samples, rng_seed, need_dim=None):
    if F.ambient_dim != cs.real_dim:
        raise ComplexGeometryError(
            f"immersion lives in R^{F.ambient_dim}, complex structure in R^{cs.real_dim}"
        )
    if need_dim is not None and F.param_dim != need_dim:
        raise ComplexGeometryError(f"expected a {need_dim}-dimensional immersion, got {F.param_dim}")
    rng = np.random.default_rng(rng_seed)
    P, j, skipped = sample_jets(F, samples, rng, order=1)
    check_skips(skipped, samples, F.name or "immersion")
    return P, orthonormal_tangent(j.jacobian), skipped


def lagrangian_defect(F: Immersion, cs: ComplexStructure, samples=200, rng_seed=0) -> float:
    """max |omega(t_i, t_j)| over orthonormal tangent frames at random samples."""
    _, Q, _ = _frames(F, cs, samples, rng_seed, need_dim=cs.n)
    Om = np.swapaxes(Q, -1, -2) @ cs.J.T @ Q
    return float(np.max(np.abs(Om)))


def frame_phases(Q, cs: ComplexStructure, orientation=1) -> np.ndarray:
    """Complex determinants of orthonormal frames in complex coordinates."""
    d = np.linalg.det(cs.complex_coords(Q))
    return d if orientation > 0 else -d


def circular_distance(z, w) -> np.ndarray:
    return np.abs(np.angle(np.asarray(z) / np.asarray(w)))


def sl_phase_defect(
    F: Immersion,
    cs: ComplexStructure,
    expected_phase: complex = 1.0,
    samples=200,
    rng_seed=0,
    tol=1e-7,
    orientation=1,
) -> Report:
    _, Q, skipped = _frames(F, cs, samples, rng_seed, need_dim=cs.n)
    det = frame_phases(Q, cs, orientation)
    target = complex(expected_phase) / abs(complex(expected_phase))
    dev = circular_distance(det, target)
    mod = np.abs(np.abs(det) - 1.0)
    rep = Report(check="check-sl", seed=rng_seed, samples=len(Q))
    rep.metric("phase_deviation", float(np.max(dev)), tol)
    rep.metric("modulus_deviation", float(np.max(mod)), tol)
    rep.info("expected_phase", [target.real, target.imag])
    mean = np.mean(det)
    rep.info("mean_phase_angle", float(np.angle(mean)) if abs(mean) > 0 else 0.0)
    rep.info("skipped_samples", skipped)
    rep.status = "pass" if (np.max(dev) < tol and np.max(mod) < tol) else "fail"
    return rep


def holomorphic_defect(F: Immersion, cs: ComplexStructure, samples=200, rng_seed=0) -> float:
    """max sine of the principal angles between J(T) and T."""
    if F.param_dim % 2:
        raise ComplexGeometryError("holomorphic check needs an even-dimensional immersion")
    _, Q, _ = _frames(F, cs, samples, rng_seed)
    JQ = cs.J @ Q
    resid = JQ - Q @ (np.swapaxes(Q, -1, -2) @ JQ)
    return float(np.max(np.linalg.norm(resid, ord=2, axis=(-2, -1))))


# -- planes and rotations -------------------------------------------------


@dataclass(frozen=True, eq=False)
class Codim2Plane:
    """A plane P of real codimension two, stored by an orthonormal basis (f1, f2) of P^perp."""

    normal_basis: np.ndarray

    def __post_init__(self):
        f = np.array(self.normal_basis, dtype=float)
        if f.ndim != 2 or f.shape[0] != 2:
            raise ComplexGeometryError("normal basis must be two vectors")
        if not np.allclose(f @ f.T, np.eye(2), atol=1e-12, rtol=0):
            raise ComplexGeometryError("normal basis (f1, f2) is not orthonormal")
        f.setflags(write=False)
        object.__setattr__(self, "normal_basis", f)

    @classmethod
    def from_span(cls, vectors):
        """The plane spanned by ``vectors`` (2n-2 of them)."""
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        _, s, Vt = np.linalg.svd(V)
        rank = int(np.sum(s > 1e-12))
        if rank != V.shape[1] - 2:
            raise ComplexGeometryError(f"span has dimension {rank}, need {V.shape[1] - 2}")
        return cls(Vt[rank:])

    @property
    def ambient_dim(self):
        return self.normal_basis.shape[1]

    @property
    def f1(self):
        return self.normal_basis[0]

    @property
    def f2(self):
        return self.normal_basis[1]

    def plane_basis(self):
        _, _, Vt = np.linalg.svd(self.normal_basis)
        return Vt[2:]

    def complex_defect(self, cs: ComplexStructure) -> float:
        """Distance of J f1 from span(f1, f2); zero iff P is complex."""
        v = cs.J @ self.f1
        resid = v - self.normal_basis.T @ (self.normal_basis @ v)
        return float(np.linalg.norm(resid))

    def is_complex(self, cs: ComplexStructure, tol=1e-10) -> bool:
        return self.complex_defect(cs) < tol

    def flipped(self):
        return Codim2Plane(self.normal_basis[::-1])


def rotation_about_plane(P: Codim2Plane, alpha: float) -> np.ndarray:
    """Identity on P; f1 -> cos a f1 + sin a f2, f2 -> -sin a f1 + cos a f2."""
    f1, f2 = P.f1, P.f2
    N = P.ambient_dim
    c, s = math.cos(alpha), math.sin(alpha)
    return (
        np.eye(N)
        + (c - 1.0) * (np.outer(f1, f1) + np.outer(f2, f2))
        + s * (np.outer(f2, f1) - np.outer(f1, f2))
    )


def rotated_calibration_family(w: CalibrationForm, P: Codim2Plane, k: int, comass_trials=2000, rng_seed=0):
    """w_i = pushforward of w under the rotation by 2 pi i / k about P, i = 0..k-1."""
    if k < 2:
        raise ComplexGeometryError("need k >= 2 (k = 1 is vacuous)")
    if P.ambient_dim != w.n:
        raise ComplexGeometryError("plane and form live in different dimensions")
    alpha = 2.0 * math.pi / k
    forms = [pushforward_orthogonal(w.form, rotation_about_plane(P, i * alpha)) for i in range(k)]
    total = forms[0]
    for f in forms[1:]:
        total = total + f
    rep = Report(check="check-vanishing-sum", seed=rng_seed)
    rep.info("k", k)
    rep.metric("sum_norm", total.norm(), 1e-10)
    comasses = [comass_sample(f, comass_trials, rng_seed + i) for i, f in enumerate(forms)]
    rep.metric("max_sampled_comass", max(comasses), 1.0 + 1e-9)
    rep.status = "pass" if total.norm() < 1e-10 and max(comasses) <= 1.0 + 1e-9 else "fail"
    return forms, rep


def reflect_and_unite_check(
    S: Immersion,
    P: Codim2Plane,
    cs: ComplexStructure,
    phi: CalibrationForm | None = None,
    samples=200,
    rng_seed=0,
    tol=1e-7,
) -> Report:
    """Reflect an SL immersion across a complex codimension-2 plane and check that
    the orientation-reversed reflection is calibrated by the same SL form."""
    if not P.is_complex(cs):
        raise ComplexGeometryError(
            f"plane is not complex (defect {P.complex_defect(cs):.3g}); the symmetry argument needs J P = P"
        )
    phi = phi or sl_form(cs, 0.0)
    target = cmath.exp(1j * phi.phase)
    rep = Report(check="check-symmetry", seed=rng_seed, samples=samples)
    base = sl_phase_defect(S, cs, target, samples, rng_seed, tol)
    rep.merge(base, "S")
    f = rotation_about_plane(P, math.pi)
    pushed = pushforward_orthogonal(phi.form, f)
    rep.metric("pushforward_plus_phi_norm", (pushed + phi.form).norm(), 1e-12)
    rep.fail_unless((pushed + phi.form).norm() < 1e-12)
    rep.info("complex_determinant_of_reflection", [cs.complex_determinant(f).real, cs.complex_determinant(f).imag])
    S_star = LinearImage(S, f, name=f"{S.name}*")
    reversed_ = sl_phase_defect(S_star, cs, target, samples, rng_seed + 1, tol, orientation=-1)
    rep.merge(reversed_, "minus_S_star")
    natural = sl_phase_defect(S_star, cs, -target, samples, rng_seed + 1, tol)
    rep.info("S_star_natural_phase_deviation_from_minus_phase", natural.value("phase_deviation"))
    # fixed-plane case: S* coincides with S as a set
    pts = S.points(S.sample_interior(min(samples, 64), np.random.default_rng(rng_seed)))
    moved = float(np.max(np.linalg.norm(pts @ f.T - pts, axis=-1)))
    rep.info("max_displacement_under_reflection", moved)
    if moved < 1e-12:
        rep.note("reflection fixes the sampled piece pointwise; the union adds nothing new")
    return rep
