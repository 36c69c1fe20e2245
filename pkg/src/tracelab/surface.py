"""Geometry of the invariant cubic level surfaces S_V.

The compact component of S_V for V in [-1, 0) is the sphere-like piece inside
[-1, 1]^3.  This module classifies levels, samples the compact component,
projects nearby points back onto a level along the gradient line, and builds
deterministic orthonormal tangent frames.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .errors import EmptyComponent, NoConvergence, SingularGradient
from .maps import as_points, invariant, invariant_gradient


class SurfaceTopology(enum.Enum):
    FOUR_PUNCTURED_SPHERE = "FourPuncturedSphere"   # V > 0
    CAYLEY_CUBIC = "CayleyCubic"                    # V = 0
    SPHERE_AND_FOUR_DISCS = "SphereAndFourDiscs"    # -1 < V < 0
    POINT_AND_FOUR_DISCS = "PointAndFourDiscs"      # V = -1
    FOUR_DISCS_ONLY = "FourDiscsOnly"               # V < -1


def classify_level(V: float) -> SurfaceTopology:
    """Topology of S_V by the sign/thresholds of V; V = 0 and V = -1 are exact."""
    if not np.isfinite(V):
        raise ValueError("V must be finite")
    if V > 0:
        return SurfaceTopology.FOUR_PUNCTURED_SPHERE
    if V == 0:
        return SurfaceTopology.CAYLEY_CUBIC
    if V > -1:
        return SurfaceTopology.SPHERE_AND_FOUR_DISCS
    if V == -1:
        return SurfaceTopology.POINT_AND_FOUR_DISCS
    return SurfaceTopology.FOUR_DISCS_ONLY


def singular_points() -> np.ndarray:
    """The four conic singularities of the Cayley cubic S_0."""
    return np.array(
        [
            [1.0, 1.0, 1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
        ]
    )


def solve_z(x, y, V: float):
    """Roots in z of I(x, y, z) = V: z = xy +/- sqrt((x^2-1)(y^2-1) + V).

    Scalar inputs return a tuple of 0, 1, or 2 roots (double root reported
    once).  Array inputs return (z_minus, z_plus, mask) where mask flags
    columns with a real root.
    """
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    disc = (x_arr * x_arr - 1.0) * (y_arr * y_arr - 1.0) + V
    if x_arr.ndim == 0:
        if disc < 0:
            return ()
        if disc == 0:
            return (float(x_arr * y_arr),)
        s = np.sqrt(disc)
        return (float(x_arr * y_arr - s), float(x_arr * y_arr + s))
    mask = disc >= 0
    s = np.sqrt(np.where(mask, disc, 0.0))
    return x_arr * y_arr - s, x_arr * y_arr + s, mask


def project_to_level(p, V: float, *, tol: float = None, max_iter: int = None):
    """Move p along the straight line through grad I(p) until I = V.

    One-dimensional Newton on s -> I(p + s g) - V with g = grad I(p) held
    fixed.  Valid in the tube |I(p) - V| small used throughout; raises
    SingularGradient near a conic singularity and NoConvergence after the
    iteration budget.
    """
    tol = DEFAULTS["projection_tol"] if tol is None else tol
    max_iter = DEFAULTS["projection_max_iter"] if max_iter is None else max_iter
    p = as_points(p)
    if np.all(np.abs(invariant(p) - V) < tol):
        return p
    g = invariant_gradient(p)
    gnorm = np.linalg.norm(g, axis=-1)
    if np.any(gnorm <= DEFAULTS["gradient_floor"]):
        raise SingularGradient(f"||grad I|| = {np.min(gnorm):.3e} at projection point")
    s = np.zeros(p.shape[:-1], dtype=p.dtype)
    for _ in range(max_iter):
        q = p + s[..., None] * g
        f = invariant(q) - V
        if np.all(np.abs(f) < tol):
            return q
        fp = np.sum(invariant_gradient(q) * g, axis=-1)
        if np.any(np.abs(fp) < 1e-300):
            raise SingularGradient("directional derivative vanished during projection")
        s = s - f / fp
    raise NoConvergence(f"projection residual {np.max(np.abs(f)):.3e} after {max_iter} iterations")


def project_to_level_safe(p, V: float, *, tol: float = None, max_iter: int = None):
    """Batch projection that never raises: returns (points, ok_mask).

    Rows with a near-singular gradient or a stalled Newton keep their input
    value and are flagged False.
    """
    tol = DEFAULTS["projection_tol"] if tol is None else tol
    max_iter = DEFAULTS["projection_max_iter"] if max_iter is None else max_iter
    p = as_points(p)
    single = p.ndim == 1
    q = np.atleast_2d(p).astype(float).copy()
    g = invariant_gradient(q)
    gnorm = np.linalg.norm(g, axis=-1)
    already = np.abs(invariant(q) - V) < tol
    ok = already | (gnorm > DEFAULTS["gradient_floor"])
    s = np.zeros(len(q))
    active = ok & ~already
    for _ in range(max_iter):
        if not np.any(active):
            break
        cand = q[active] + s[active, None] * g[active]
        f = invariant(cand) - V
        done = np.abs(f) < tol
        idx = np.nonzero(active)[0]
        q[idx[done]] = cand[done]
        active[idx[done]] = False
        still = idx[~done]
        if len(still) == 0:
            break
        fp = np.sum(invariant_gradient(q[still] + s[still, None] * g[still]) * g[still], axis=-1)
        stalled = np.abs(fp) < 1e-300
        ok[still[stalled]] = False
        active[still[stalled]] = False
        live = still[~stalled]
        s[live] = s[live] - (invariant(q[live] + s[live, None] * g[live]) - V) / fp[~stalled]
    ok[active] = False  # never converged
    if single:
        return q[0], ok[0]
    return q, ok


@dataclass
class TangentFrame:
    """Orthonormal frame at a surface point: tangents u1, u2 and unit normal."""

    origin: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    normal: np.ndarray


def tangent_frame(p) -> TangentFrame:
    """Deterministic Gram-Schmidt frame with normal = grad I / ||grad I||.

    Seed axis is the coordinate axis least aligned with the normal, ties
    broken in x < y < z order, so the frame is reproducible bit for bit.
    """
    p = as_points(np.asarray(p, dtype=float))
    if p.ndim != 1:
        raise ValueError("tangent_frame expects a single point")
    g = invariant_gradient(p)
    gnorm = np.linalg.norm(g)
    if gnorm <= DEFAULTS["gradient_floor"]:
        raise SingularGradient(f"||grad I|| = {gnorm:.3e}")
    n = g / gnorm
    axis = int(np.argmin(np.abs(n)))  # argmin takes the first of tied entries
    e = np.zeros(3)
    e[axis] = 1.0
    u1 = e - np.dot(e, n) * n
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(n, u1)
    return TangentFrame(origin=p, u1=u1, u2=u2, normal=n)


def chart_coords(frame: TangentFrame, points) -> np.ndarray:
    """In-surface chart coordinates of points relative to a frame (u1, u2)."""
    d = as_points(points) - frame.origin
    return np.stack([d @ frame.u1, d @ frame.u2], axis=-1)


def chart_point(frame: TangentFrame, uv) -> np.ndarray:
    """Inverse of chart_coords up to the normal component."""
    uv = np.asarray(uv, dtype=float)
    return frame.origin + uv[..., :1] * frame.u1 + uv[..., 1:2] * frame.u2


def area_density(p) -> np.ndarray:
    """Density 1/||grad I|| of the invariant leafwise area form on S_V.

    Relative to the Euclidean area element; induced by dx^dy^dz and dI.
    Diverges at the conic singularities.
    """
    p = as_points(p)
    gnorm = np.linalg.norm(invariant_gradient(p), axis=-1)
    if np.any(gnorm <= DEFAULTS["gradient_floor"]):
        raise SingularGradient("area density undefined at a singular point")
    return 1.0 / gnorm


def sample_compact_component(
    V: float, n: int, *, area_uniform: bool = False, rng=None
) -> np.ndarray:
    """At least n points on the compact component of S_V, V in [-1, 0).

    Stratified (x, y) grid with both z-sheets; every returned point lies in
    [-1, 1]^3 with |I - V| below 1e-12.  With area_uniform=True the grid
    sample is resampled with weights 1/||grad I|| to approximate the
    invariant area measure.
    """
    if V < -1.0:
        raise EmptyComponent(f"no compact component for V = {V}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if V == -1.0:
        return np.zeros((1, 3))

    res = max(4, int(np.ceil(np.sqrt(n))))
    for _ in range(12):
        axis = np.linspace(-1.0, 1.0, res)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        z_lo, z_hi, mask = solve_z(X.ravel(), Y.ravel(), V)
        xs, ys = X.ravel()[mask], Y.ravel()[mask]
        pts = np.concatenate(
            [
                np.stack([xs, ys, z_lo[mask]], axis=-1),
                np.stack([xs, ys, z_hi[mask]], axis=-1),
            ]
        )
        inside = np.all(np.abs(pts) <= 1.0 + 1e-12, axis=-1)
        pts = pts[inside]
        good = np.abs(invariant(pts) - V) < 1e-12
        pts = pts[good]
        if len(pts) >= n:
            break
        res *= 2
    else:
        raise NoConvergence(f"could not place {n} samples on the compact component")

    if area_uniform:
        rng = np.random.default_rng(rng)
        g = np.linalg.norm(invariant_gradient(pts), axis=-1)
        ok = g > DEFAULTS["gradient_floor"]
        pts, g = pts[ok], g[ok]
        w = 1.0 / g
        idx = rng.choice(len(pts), size=max(n, len(pts)), p=w / w.sum())
        pts = pts[idx]
    return pts
