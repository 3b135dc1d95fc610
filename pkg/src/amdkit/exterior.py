"""Constant-coefficient alternating forms on R^n."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


class FormError(ValueError):
    """Invalid input to an exterior-algebra operation."""


class DegreeError(FormError):
    pass


@lru_cache(maxsize=None)
def index_sets(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing k-tuples of range(n), lexicographic."""
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _position(n: int, k: int) -> dict:
    return {idx: i for i, idx in enumerate(index_sets(n, k))}


def permutation_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (0 if an entry repeats)."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class KForm:
    n: int
    k: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.k <= self.n:
            raise DegreeError(f"need 0 <= k <= n and n >= 1, got n={self.n}, k={self.k}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape[0] != comb(self.n, self.k):
            raise FormError(f"expected {comb(self.n, self.k)} coefficients, got {c.shape[0]}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n, k):
        return cls(n, k, np.zeros(comb(n, k)))

    @classmethod
    def basis(cls, n, idx, coeff=1.0):
        """``coeff * e*_{i1} ^ ... ^ e*_{ik}`` for 0-based, not necessarily sorted ``idx``."""
        idx = tuple(idx)
        form = cls.zero(n, len(idx))
        sign = permutation_sign(idx)
        if sign == 0:
            return form
        c = np.zeros(comb(n, len(idx)))
        c[_position(n, len(idx))[tuple(sorted(idx))]] = sign * coeff
        return cls(n, len(idx), c)

    @classmethod
    def from_dict(cls, n, k, terms):
        """Build from ``{index_tuple: coeff}`` (0-based, any order, signs applied)."""
        out = cls.zero(n, k)
        for idx, c in terms.items():
            out = out + cls.basis(n, idx, c)
        return out

    def terms(self, tol=0.0):
        return {idx: c for idx, c in zip(index_sets(self.n, self.k), self.coeffs) if abs(c) > tol}

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def _same_space(self, other):
        if not isinstance(other, KForm) or (self.n, self.k) != (other.n, other.k):
            raise FormError("forms live in different spaces")

    def __add__(self, other):
        self._same_space(other)
        return KForm(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same_space(other)
        return KForm(self.n, self.k, self.coeffs - other.coeffs)

    def __neg__(self):
        return KForm(self.n, self.k, -self.coeffs)

    def __mul__(self, s):
        return KForm(self.n, self.k, self.coeffs * float(s))

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12):
        self._same_space(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def __call__(self, *vectors):
        return evaluate(self, np.column_stack(vectors) if vectors else np.zeros((self.n, 0)))

    def __repr__(self):
        body = " + ".join(
            f"{c:+.6g}*" + "^".join(f"e{i + 1}" for i in idx) for idx, c in self.terms(1e-15).items()
        )
        return f"KForm(n={self.n}, k={self.k}, {body or '0'})"


def wedge(a: KForm, b: KForm) -> KForm:
    if a.n != b.n:
        raise FormError(f"dimension mismatch: {a.n} vs {b.n}")
    n, k = a.n, a.k + b.k
    if k > n:
        raise DegreeError(f"degree {a.k}+{b.k} exceeds ambient dimension {n}")
    out = np.zeros(comb(n, k))
    pos = _position(n, k)
    for I, ca in zip(index_sets(n, a.k), a.coeffs):
        if ca == 0.0:
            continue
        for J, cb in zip(index_sets(n, b.k), b.coeffs):
            if cb == 0.0:
                continue
            sign = permutation_sign(I + J)
            if sign:
                out[pos[tuple(sorted(I + J))]] += sign * ca * cb
    return KForm(n, k, out)


def _minors(M: np.ndarray, k: int) -> np.ndarray:
    """All k x k row-minors of the (..., n, k) frame stack, shape (..., C(n,k))."""
    n = M.shape[-2]
    if k == 0:
        return np.ones(M.shape[:-2] + (1,))
    rows = np.array(index_sets(n, k))
    sub = M[..., rows, :]  # (..., C, k, k)
    return np.linalg.det(sub)


def evaluate(w: KForm, frame) -> np.ndarray | float:
    """w(v_1, ..., v_k) for a frame given as columns of an ``(..., n, k)`` array."""
    F = np.asarray(frame, dtype=float)
    if F.ndim < 2 or F.shape[-2] != w.n or F.shape[-1] != w.k:
        raise FormError(f"frame must have shape (..., {w.n}, {w.k}), got {F.shape}")
    val = _minors(F, w.k) @ w.coeffs
    return float(val) if np.ndim(val) == 0 else val


def compound(A: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix: entry (I, J) is det A[I, J]."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    sets = np.array(index_sets(n, k))
    if k == 0:
        return np.ones((1, 1))
    sub = A[sets[:, None, :, None], sets[None, :, None, :]]
    return np.linalg.det(sub)


def pullback_linear(w: KForm, A) -> KForm:
    """The form v -> w(A v) on each argument."""
    A = np.asarray(A, dtype=float)
    if A.shape != (w.n, w.n):
        raise FormError(f"linear map must be {w.n}x{w.n}, got {A.shape}")
    return KForm(w.n, w.k, compound(A, w.k).T @ w.coeffs)


def pushforward_orthogonal(w: KForm, R) -> KForm:
    """Pushforward under an orthogonal map, realized as pullback under R^T."""
    return pullback_linear(w, np.asarray(R, dtype=float).T)


def random_orthonormal_frames(n, k, count, rng):
    G = rng.standard_normal((count, n, k))
    Q, _ = np.linalg.qr(G)
    return Q


def comass_sample(w: KForm, trials: int, rng_seed=0, batch: int = 4096) -> float:
    """Lower bound on the comass: max |w| over random orthonormal k-frames."""
    if trials < 1:
        raise FormError("trials must be >= 1")
    if w.k == 0:
        return abs(float(w.coeffs[0]))
    rng = np.random.default_rng(rng_seed)
    best = 0.0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        vals = evaluate(w, random_orthonormal_frames(w.n, w.k, m, rng))
        best = max(best, float(np.max(np.abs(vals))))
        done += m
    return best
