"""Closed-form formulas for the catalog examples, compared with values derived
from the definitions.

Some commonly quoted versions of these formulas contain errors. Those
variants are kept under ``*_as_printed`` names so the reports can show how far
they are from the derived values. Nothing here is used to build geometry.
"""

from __future__ import annotations

import math

import numpy as np

from .bundles import BundleImmersion, borisenko_offset, normal_bundle
from .geometry import ExprImmersion, hodge_normal

CATENOID = ("u", "cosh(u)*cos(v)", "cosh(u)*sin(v)")


def catenoid(box=((-1.0, 1.0), (0.0, 2 * math.pi)), name="catenoid"):
    return ExprImmersion(["u", "v"], CATENOID, box, name=name)


def _grid(box, n):
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(box))


# -- catenoid normal bundle ---------------------------------------------------


def catenoid_normal_unnormalized(u, v):
    """r_u x r_v; its length is cosh(u)^2."""
    c = np.cosh(u)
    return np.stack([c * np.sinh(u), -c * np.cos(v), -c * np.sin(v)], axis=-1)


def catenoid_bundle_closed_form(u, v, w):
    x = np.stack([u, np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v)], axis=-1)
    return np.concatenate([x, w[..., None] * catenoid_normal_unnormalized(u, v)], axis=-1)


def compare_catenoid_bundle(n=9):
    """The unnormalized closed form at fiber coordinate w equals the unit-normal
    bundle at t = w cosh(u)^2."""
    nu = normal_bundle(catenoid(), [[-10.0, 10.0]])
    P = _grid([(-1, 1), (0, 2 * math.pi), (-1, 1)], n)
    u, v, w = P.T
    ours = nu.points(np.stack([u, v, w * np.cosh(u) ** 2], axis=-1))
    direct = nu.points(P)
    closed = catenoid_bundle_closed_form(u, v, w)
    return {
        "max_diff_with_rescaled_fiber": float(np.max(np.abs(ours - closed))),
        "max_diff_same_fiber_coordinate": float(np.max(np.abs(direct - closed))),
    }


# -- Borisenko twist on the catenoid ---------------------------------------


def tau_cross_n_corrected(u, v):
    return np.stack([np.cos(v), np.sinh(u), np.zeros_like(u)], axis=-1) / np.cosh(u)[..., None]


def tau_cross_n_as_printed(u, v):
    return np.stack([np.cos(v), np.sin(u), np.zeros_like(u)], axis=-1) / np.cosh(u)[..., None]


def borisenko_catenoid_closed_form(u, v, w):
    c = np.cosh(u)
    x = np.stack([u, c * np.cos(v), c * np.sin(v)], axis=-1)
    y = np.stack(
        [np.cos(v) / c + w * np.tanh(u), np.tanh(u) - w * np.cos(v) / c, -w * np.sin(v) / c], axis=-1
    )
    return np.concatenate([x, y], axis=-1)


def compare_borisenko_catenoid(rho="sinh(u)*cos(v)", n=21):
    M = catenoid()
    P = _grid([(-1, 1), (0, 2 * math.pi)], n)
    off = borisenko_offset(M, rho)(P, M._jet(P, 2)).val
    u, v = P.T
    out = {
        "tau_cross_n_vs_corrected": float(np.max(np.abs(off - tau_cross_n_corrected(u, v)))),
        "tau_cross_n_vs_as_printed": float(np.max(np.abs(off - tau_cross_n_as_printed(u, v)))),
    }
    B = BundleImmersion(M, [[-1.0, 1.0]], offset=borisenko_offset(M, rho))
    Q = _grid([(-1, 1), (0, 2 * math.pi), (-1, 1)], 9)
    out["bundle_vs_closed_form"] = float(
        np.max(np.abs(B.points(Q) - borisenko_catenoid_closed_form(*Q.T)))
    )
    return out


# -- cone over the Clifford torus -------------------------------------------


CLIFFORD_CONE = ("w*cos(u)", "w*sin(u)", "w*cos(v)", "w*sin(v)")


def clifford_cone_normal(u, v):
    return np.stack([np.cos(u), np.sin(u), -np.cos(v), -np.sin(v)], axis=-1) / math.sqrt(2.0)


def clifford_cone_normal_as_printed(w, u, v):
    w2 = w * w
    return np.stack(
        [
            -w2 * np.cos(u) * np.sin(v) ** 2,
            -w2 * np.sin(u) * np.sin(v) ** 2,
            -w2 * np.cos(v) * np.cos(u) ** 2,
            -w2 * np.sin(v) * np.cos(v) ** 2,
        ],
        axis=-1,
    )


def compare_clifford_cone_normal(n=9):
    F = ExprImmersion(["w", "u", "v"], CLIFFORD_CONE, [[0.1, 1.0], [0, 2 * math.pi], [0, 2 * math.pi]])
    P = _grid(F.box, n)
    J = F.jet(P, order=1).jacobian
    N = hodge_normal(J)
    N /= np.linalg.norm(N, axis=-1, keepdims=True)
    w, u, v = P.T
    closed = clifford_cone_normal(u, v)
    printed = clifford_cone_normal_as_printed(w, u, v)
    pn = np.linalg.norm(printed, axis=-1)
    ok = pn > 1e-12
    tang = np.abs(np.einsum("pia,pi->pa", J[ok], printed[ok] / pn[ok, None]))
    return {
        "derived_vs_closed_form_up_to_sign": float(
            np.max(np.minimum(np.linalg.norm(N - closed, axis=-1), np.linalg.norm(N + closed, axis=-1)))
        ),
        "as_printed_max_tangential_component": float(np.max(tang)),
    }


def clifford_cone_hyperplane_defect(a, b, which="first", n=33):
    """Largest component of the unit normal of {a x1 + b x2 = 0} (or of
    {a x3 + b x4 = 0}) that is normal to the cone along the intersection;
    zero means the hyperplane meets the cone orthogonally."""
    F = ExprImmersion(["w", "u", "v"], CLIFFORD_CONE, [[0.1, 1.0], [0, 2 * math.pi], [0, 2 * math.pi]])
    s = np.linspace(0.0, 2 * math.pi, n)
    ws = np.linspace(0.1, 1.0, 5)
    W, S = np.meshgrid(ws, s, indexing="ij")
    W, S = W.ravel(), S.ravel()
    ang = math.atan2(-a, b)
    fixed = np.full_like(S, ang)
    P = np.stack([W, fixed, S] if which == "first" else [W, S, fixed], axis=-1)
    h = np.array([a, b, 0, 0] if which == "first" else [0, 0, a, b], float)
    h /= np.linalg.norm(h)
    on = np.abs(F.points(P) @ h)
    N = hodge_normal(F.jet(P, order=1).jacobian)
    N /= np.linalg.norm(N, axis=-1, keepdims=True)
    return {
        "max_distance_to_hyperplane": float(np.max(on)),
        "max_normal_component": float(np.max(np.abs(N @ h))),
    }


# -- the z = w^2 fan ------------------------------------------------------


def fan_edge_relations(r_max=None, n=101):
    """Residuals of x2 = x1^2 (derived) and x1 = x2^2 (as printed) on the face
    boundary t = 0 of the polar chart (r cos t, r^2 cos 2t, r sin t, r^2 sin 2t)."""
    r_max = r_max or math.sqrt((math.sqrt(5) - 1) / 2)
    r = np.linspace(0.0, r_max, n)
    x1, x2 = r, r * r
    return {
        "derived_relation_residual": float(np.max(np.abs(x2 - x1**2))),
        "as_printed_relation_residual": float(np.max(np.abs(x1 - x2**2))),
    }
