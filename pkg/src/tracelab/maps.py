"""Exact map evaluations: trace map, Fricke-Vogt invariant, cat map, standard map.

All functions are pure and vectorized over a trailing coordinate axis:
points in R^3 are arrays of shape (..., 3), torus points arrays of shape
(..., 2).  Dtype is preserved, so passing ``np.longdouble`` arrays gives the
extended-precision mode used by tangency refinement.
"""

from __future__ import annotations

import numpy as np

# Golden ratio: unstable eigenvalue of the torus automorphism [[1,1],[1,0]].
GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

# Torus automorphism whose factor on the Cayley cubic is the trace map.
CAT_MATRIX = np.array([[1, 1], [1, 0]])

#: Model differential at the fixed singularity in rectifying coordinates,
#: diag(-1, 1/lambda, lambda).  The raw trace-map differential at (1,1,1)
#: has eigenvalues {-1, lambda^2, lambda^-2} instead (the factor map is a
#: double branched cover at that corner); see tests for the computed values.
P1_MODEL_DIFFERENTIAL = np.diag([-1.0, 1.0 / GOLDEN, GOLDEN])


def as_points(p) -> np.ndarray:
    """Validate and return p as a float array of shape (..., 3).

    Rejects NaN and infinity: every phase-space point must be finite.
    """
    p = np.asarray(p)
    if p.shape[-1] != 3:
        raise ValueError(f"expected trailing axis of length 3, got shape {p.shape}")
    if not np.issubdtype(p.dtype, np.floating):
        p = p.astype(float)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite coordinates")
    return p


def reduce_torus(t) -> np.ndarray:
    """Floor-based reduction of torus coordinates into [0, 1).

    Values within 1e-15 of 1 are snapped to 0 so equality tests against
    exact rationals stay stable.
    """
    t = np.asarray(t)
    if not np.issubdtype(t.dtype, np.floating):
        t = t.astype(float)
    r = t - np.floor(t)
    r = np.where(r > 1.0 - 1e-15, 0.0, r)
    return r


def trace_map(p) -> np.ndarray:
    """T(x, y, z) = (2xy - z, x, y)."""
    p = as_points(p)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([2.0 * x * y - z, x, y], axis=-1)


def trace_map_inverse(p) -> np.ndarray:
    """T^-1 = sigma o T o sigma with sigma(x,y,z) = (z,y,x); equals (y, z, 2yz - x)."""
    p = as_points(p)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([y, z, 2.0 * y * z - x], axis=-1)


def sigma(p) -> np.ndarray:
    """Time-reversal involution sigma(x, y, z) = (z, y, x)."""
    p = as_points(p)
    return p[..., ::-1]


def invariant(p) -> np.ndarray:
    """Fricke-Vogt invariant I = x^2 + y^2 + z^2 - 2xyz - 1; I o T = I."""
    p = as_points(p)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return x * x + y * y + z * z - 2.0 * x * y * z - 1.0


def invariant_gradient(p) -> np.ndarray:
    """grad I = (2x - 2yz, 2y - 2xz, 2z - 2xy)."""
    p = as_points(p)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack(
        [2.0 * (x - y * z), 2.0 * (y - x * z), 2.0 * (z - x * y)], axis=-1
    )


def jacobian(p) -> np.ndarray:
    """DT(p): rows [(2y, 2x, -1), (1, 0, 0), (0, 1, 0)]; det = -1 identically."""
    p = as_points(p)
    x, y = p[..., 0], p[..., 1]
    J = np.zeros(p.shape[:-1] + (3, 3), dtype=p.dtype)
    J[..., 0, 0] = 2.0 * y
    J[..., 0, 1] = 2.0 * x
    J[..., 0, 2] = -1.0
    J[..., 1, 0] = 1.0
    J[..., 2, 1] = 1.0
    return J


def apply_jacobian(p, v) -> np.ndarray:
    """DT(p) @ v without forming the matrix: (2(y vx + x vy) - vz, vx, vy)."""
    p = as_points(p)
    v = np.asarray(v)
    x, y = p[..., 0], p[..., 1]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    return np.stack([2.0 * (y * vx + x * vy) - vz, vx, vy], axis=-1)


def anosov_step(t) -> np.ndarray:
    """One step of the torus automorphism: (theta, phi) -> (theta + phi, theta) mod 1."""
    t = reduce_torus(t)
    th, ph = t[..., 0], t[..., 1]
    return reduce_torus(np.stack([th + ph, th], axis=-1))


def factor_map(t) -> np.ndarray:
    """Semiconjugacy onto the Cayley cubic:

    F(theta, phi) = (cos 2pi(theta+phi), cos 2pi theta, cos 2pi phi),
    satisfying F o A = T o F and I(F(t)) = 0.
    """
    t = reduce_torus(t)
    th, ph = t[..., 0], t[..., 1]
    two_pi = 2.0 * np.pi
    return np.stack(
        [np.cos(two_pi * (th + ph)), np.cos(two_pi * th), np.cos(two_pi * ph)],
        axis=-1,
    )


def standard_map(q, k: float) -> np.ndarray:
    """Area-preserving twist map (x, y) -> (x + y + k sin 2pi x, y + k sin 2pi x) mod 1."""
    q = reduce_torus(q)
    if not np.isfinite(k):
        raise ValueError("k must be finite")
    x, y = q[..., 0], q[..., 1]
    kick = y + k * np.sin(2.0 * np.pi * x)
    return reduce_torus(np.stack([x + kick, kick], axis=-1))


def standard_map_jacobian(q, k: float) -> np.ndarray:
    """Analytic Jacobian [[1 + c, 1], [c, 1]] with c = 2 pi k cos(2 pi x); det = 1."""
    q = reduce_torus(q)
    x = q[..., 0]
    c = 2.0 * np.pi * k * np.cos(2.0 * np.pi * x)
    J = np.empty(q.shape[:-1] + (2, 2), dtype=q.dtype)
    J[..., 0, 0] = 1.0 + c
    J[..., 0, 1] = 1.0
    J[..., 1, 0] = c
    J[..., 1, 1] = 1.0
    return J


def iterate_map(f, p0, n: int) -> np.ndarray:
    """Stack [p0, f(p0), ..., f^n(p0)] along a new leading axis."""
    p = np.asarray(p0)
    out = np.empty((n + 1,) + p.shape, dtype=p.dtype)
    out[0] = p
    for i in range(n):
        p = f(p)
        out[i + 1] = p
    return out
