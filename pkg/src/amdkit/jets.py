"""Truncated Taylor jets for forward-mode differentiation.

A :class:`Jet` carries a value array of shape ``S`` together with its
gradient (``S + (m,)``) and, for second-order jets, its Hessian
(``S + (m, m)``) with respect to ``m`` seed variables.  Values may be real
or complex, so the same class serves as the real and the complex jet ring.
"""

from __future__ import annotations

import numpy as np


class DomainError(ArithmeticError):
    """Raised when a primitive is evaluated outside its real domain."""


class Jet:
    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 100

    def __init__(self, val, grad, hess=None):
        self.val = np.asarray(val)
        self.grad = np.asarray(grad)
        self.hess = None if hess is None else np.asarray(hess)

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape}, nvars={self.nvars})"

    # construction helpers

    @classmethod
    def variables(cls, points, order=2):
        """Seed jets for the columns of ``points`` (shape ``(..., m)``)."""
        points = np.asarray(points)
        m = points.shape[-1]
        eye = np.eye(m, dtype=points.dtype if np.iscomplexobj(points) else float)
        out = []
        for i in range(m):
            val = points[..., i]
            grad = np.broadcast_to(eye[i], val.shape + (m,)).copy()
            hess = np.zeros(val.shape + (m, m), dtype=grad.dtype) if order >= 2 else None
            out.append(cls(val, grad, hess))
        return out

    @classmethod
    def constant(cls, c, nvars, order=2):
        c = np.asarray(c)
        grad = np.zeros(c.shape + (nvars,), dtype=np.result_type(c, float))
        hess = np.zeros(c.shape + (nvars, nvars), dtype=grad.dtype) if order >= 2 else None
        return cls(c, grad, hess)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.nvars, self.order)

    # elementwise arithmetic

    def __neg__(self):
        return Jet(-self.val, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._lift(other)
        hess = None if self.hess is None or o.hess is None else self.hess + o.hess
        return Jet(self.val + o.val, self.grad + o.grad, hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            return Jet(
                self.val * c,
                self.grad * c[..., None],
                None if self.hess is None else self.hess * c[..., None, None],
            )
        a, b = self, other
        val = a.val * b.val
        grad = a.val[..., None] * b.grad + b.val[..., None] * a.grad
        hess = None
        if a.hess is not None and b.hess is not None:
            outer = a.grad[..., :, None] * b.grad[..., None, :]
            hess = (
                a.val[..., None, None] * b.hess
                + b.val[..., None, None] * a.hess
                + outer
                + np.swapaxes(outer, -1, -2)
            )
        return Jet(val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self):
        if np.any(self.val == 0):
            raise DomainError("division by zero")
        inv = 1.0 / self.val
        return self.apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            if np.any(c == 0):
                raise DomainError("division by zero")
            return self * (1.0 / c)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jets only support integer powers")
        n = int(n)
        x = self.val
        if n == 0:
            return Jet.constant(np.ones_like(x), self.nvars, self.order)
        if n < 0 and np.any(x == 0):
            raise DomainError("negative power of zero")
        f = x**n
        f1 = n * x ** (n - 1) if n != 1 else np.ones_like(x)
        if n in (1,):
            f2 = np.zeros_like(x)
        elif n == 2:
            f2 = 2.0 * np.ones_like(x)
        else:
            f2 = n * (n - 1) * x ** (n - 2)
        return self.apply(f, f1, f2)

    def apply(self, f, f1, f2):
        """Chain rule for an elementwise function with derivatives ``f1, f2``."""
        grad = f1[..., None] * self.grad
        hess = None
        if self.hess is not None:
            hess = f1[..., None, None] * self.hess + f2[..., None, None] * (
                self.grad[..., :, None] * self.grad[..., None, :]
            )
        return Jet(f, grad, hess)

    # shape helpers over the value axes

    def component(self, i):
        return Jet(
            self.val[..., i],
            self.grad[..., i, :],
            None if self.hess is None else self.hess[..., i, :, :],
        )

    def expand(self):
        """Append a length-1 value axis (for broadcasting against vectors)."""
        return Jet(
            self.val[..., None],
            self.grad[..., None, :],
            None if self.hess is None else self.hess[..., None, :, :],
        )

    def sum(self):
        """Sum over the last value axis."""
        return Jet(
            self.val.sum(-1),
            self.grad.sum(-2),
            None if self.hess is None else self.hess.sum(-3),
        )

    def real(self):
        return Jet(self.val.real, self.grad.real, None if self.hess is None else self.hess.real)

    def imag(self):
        return Jet(self.val.imag, self.grad.imag, None if self.hess is None else self.hess.imag)

    def truncate(self, order):
        if order >= 2:
            return self
        return Jet(self.val, self.grad)


def stack(jets):
    """Stack jets of equal shape along a new last value axis."""
    val = np.stack([j.val for j in jets], axis=-1)
    grad = np.stack([j.grad for j in jets], axis=-2)
    hess = None
    if all(j.hess is not None for j in jets):
        hess = np.stack([j.hess for j in jets], axis=-3)
    return Jet(val, grad, hess)


def dot(a: Jet, b) -> Jet:
    return (a * b).sum()


def cross(a: Jet, b: Jet) -> Jet:
    a0, a1, a2 = (a.component(i) for i in range(3))
    b0, b1, b2 = (b.component(i) for i in range(3))
    return stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def norm(a: Jet) -> Jet:
    return sqrt(dot(a, a))


def det(columns) -> Jet:
    """Determinant of the square matrix whose columns are the vector jets given."""
    n = len(columns)
    entries = [[columns[c].component(r) for c in range(n)] for r in range(n)]
    return _det_entries(entries)


def _det_entries(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for c in range(n):
        minor = [r[:c] + r[c + 1 :] for r in rows[1:]]
        term = rows[0][c] * _det_entries(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    return total


# elementwise primitives; plain arrays dispatch to numpy


def _is_real(x):
    return not np.iscomplexobj(x)


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.apply(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.apply(c, -s, -c)
    return np.cos(x)


def sinh(x):
    if isinstance(x, Jet):
        s, c = np.sinh(x.val), np.cosh(x.val)
        return x.apply(s, c, s)
    return np.sinh(x)


def cosh(x):
    if isinstance(x, Jet):
        s, c = np.sinh(x.val), np.cosh(x.val)
        return x.apply(c, s, c)
    return np.cosh(x)


def tanh(x):
    if isinstance(x, Jet):
        t = np.tanh(x.val)
        d = 1.0 - t * t
        return x.apply(t, d, -2.0 * t * d)
    return np.tanh(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return x.apply(e, e, e)
    return np.exp(x)


def sqrt(x):
    v = x.val if isinstance(x, Jet) else np.asarray(x)
    if _is_real(v):
        bad = v <= 0 if isinstance(x, Jet) else v < 0
        if np.any(bad):
            raise DomainError("sqrt outside its real domain")
    elif isinstance(x, Jet) and np.any(v == 0):
        raise DomainError("sqrt is not differentiable at 0")
    if isinstance(x, Jet):
        s = np.sqrt(v)
        d1 = 0.5 / s
        return x.apply(s, d1, -0.25 / (s * s * s))
    return np.sqrt(v)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "exp": exp,
    "sqrt": sqrt,
}
