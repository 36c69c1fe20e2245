"""Numba kernels for the long iteration loops.

Everything here is float64 and allocation-free inside the loops; the public
modules wrap these in friendlier signatures.  Tangent vectors for the trace
map are re-orthogonalized into the surface tangent plane every step so the
neutral gradient direction cannot pollute the exponent estimate, and points
are re-projected onto S_V along the local gradient line every
``reproject_every`` steps (skipped where the gradient is near-singular).
"""

from __future__ import annotations

import numpy as np
from numba import njit

GRADIENT_FLOOR = 1e-8


@njit(cache=True, inline="always")
def _invariant(x, y, z):
    return x * x + y * y + z * z - 2.0 * x * y * z - 1.0


@njit(cache=True, inline="always")
def _step(x, y, z):
    return 2.0 * x * y - z, x, y


@njit(cache=True)
def _project(x, y, z, V, tol, max_iter):
    """Newton along the fixed gradient line; returns (x, y, z, ok)."""
    if abs(_invariant(x, y, z) - V) < tol:
        return x, y, z, True
    gx = 2.0 * (x - y * z)
    gy = 2.0 * (y - x * z)
    gz = 2.0 * (z - x * y)
    gn = np.sqrt(gx * gx + gy * gy + gz * gz)
    if gn <= GRADIENT_FLOOR:
        return x, y, z, False
    s = 0.0
    for _ in range(max_iter):
        qx = x + s * gx
        qy = y + s * gy
        qz = z + s * gz
        f = _invariant(qx, qy, qz) - V
        if abs(f) < tol:
            return qx, qy, qz, True
        dx = 2.0 * (qx - qy * qz)
        dy = 2.0 * (qy - qx * qz)
        dz = 2.0 * (qz - qx * qy)
        fp = dx * gx + dy * gy + dz * gz
        if abs(fp) < 1e-300:
            return x, y, z, False
        s -= f / fp
    return x, y, z, False


@njit(cache=True)
def trace_orbit(seed, V, n, reproject_every, guard):
    """Iterate one seed, storing every point.

    Returns (points (n+1,3), max_drift, escaped, status) with status 0 ok,
    1 left the guard box, 2 projection hit a singular gradient.
    """
    pts = np.empty((n + 1, 3))
    x, y, z = seed[0], seed[1], seed[2]
    pts[0, 0], pts[0, 1], pts[0, 2] = x, y, z
    max_drift = abs(_invariant(x, y, z) - V)
    escaped = False
    status = 0
    for i in range(1, n + 1):
        x, y, z = _step(x, y, z)
        if abs(x) > guard or abs(y) > guard or abs(z) > guard:
            pts[i, 0], pts[i, 1], pts[i, 2] = x, y, z
            return pts[: i + 1], max_drift, True, 1
        if abs(x) > 2.0 or abs(y) > 2.0 or abs(z) > 2.0:
            escaped = True
        if reproject_every > 0 and i % reproject_every == 0:
            drift = abs(_invariant(x, y, z) - V)
            if drift > max_drift:
                max_drift = drift
            x, y, z, ok = _project(x, y, z, V, 1e-14, 50)
            if not ok:
                status = 2
        pts[i, 0], pts[i, 1], pts[i, 2] = x, y, z
    drift = abs(_invariant(x, y, z) - V)
    if drift > max_drift:
        max_drift = drift
    return pts, max_drift, escaped, status


@njit(cache=True)
def trace_lyapunov_batch(seeds, V, n, reproject_every, guard):
    """Largest surface Lyapunov exponent for a batch of seeds.

    Returns (lyap (m,), status (m,)) with status 0 ok, 1 escaped the guard
    box, 2 saw a singular projection (estimate still returned).
    """
    m = seeds.shape[0]
    lyap = np.zeros(m)
    status = np.zeros(m, dtype=np.int64)
    for j in range(m):
        x, y, z = seeds[j, 0], seeds[j, 1], seeds[j, 2]
        # deterministic start vector inside the tangent plane
        gx = 2.0 * (x - y * z)
        gy = 2.0 * (y - x * z)
        gz = 2.0 * (z - x * y)
        gn2 = gx * gx + gy * gy + gz * gz
        vx, vy, vz = 1.0, 0.12345, -0.54321
        if gn2 > GRADIENT_FLOOR * GRADIENT_FLOOR:
            d = (vx * gx + vy * gy + vz * gz) / gn2
            vx -= d * gx
            vy -= d * gy
            vz -= d * gz
        nv = np.sqrt(vx * vx + vy * vy + vz * vz)
        vx, vy, vz = vx / nv, vy / nv, vz / nv
        acc = 0.0
        for i in range(1, n + 1):
            wx = 2.0 * (y * vx + x * vy) - vz
            vz = vy
            vy = vx
            vx = wx
            x, y, z = _step(x, y, z)
            if abs(x) > guard or abs(y) > guard or abs(z) > guard:
                status[j] = 1
                break
            gx = 2.0 * (x - y * z)
            gy = 2.0 * (y - x * z)
            gz = 2.0 * (z - x * y)
            gn2 = gx * gx + gy * gy + gz * gz
            if gn2 > GRADIENT_FLOOR * GRADIENT_FLOOR:
                d = (vx * gx + vy * gy + vz * gz) / gn2
                vx -= d * gx
                vy -= d * gy
                vz -= d * gz
            nv = np.sqrt(vx * vx + vy * vy + vz * vz)
            if nv > 0.0:
                acc += np.log(nv)
                vx, vy, vz = vx / nv, vy / nv, vz / nv
            if reproject_every > 0 and i % reproject_every == 0:
                x, y, z, ok = _project(x, y, z, V, 1e-14, 50)
                if not ok and status[j] == 0:
                    status[j] = 2
            lyap[j] = acc / i
    return lyap, status


@njit(cache=True)
def standard_lyapunov_batch(seeds, k, n):
    """Largest Lyapunov exponent of the standard map for a batch of torus seeds."""
    m = seeds.shape[0]
    lyap = np.zeros(m)
    two_pi = 2.0 * np.pi
    for j in range(m):
        x, y = seeds[j, 0], seeds[j, 1]
        vx, vy = 1.0, 0.6180339887498949
        nv = np.sqrt(vx * vx + vy * vy)
        vx, vy = vx / nv, vy / nv
        acc = 0.0
        for i in range(1, n + 1):
            c = two_pi * k * np.cos(two_pi * x)
            wx = (1.0 + c) * vx + vy
            wy = c * vx + vy
            vx, vy = wx, wy
            kick = y + k * np.sin(two_pi * x)
            x = (x + kick) % 1.0
            y = kick % 1.0
            nv = np.sqrt(vx * vx + vy * vy)
            if nv > 0.0:
                acc += np.log(nv)
                vx, vy = vx / nv, vy / nv
        lyap[j] = acc / n
    return lyap


@njit(cache=True)
def trace_orbit_batch(seeds, V, n, reproject_every, guard):
    """Iterate a batch of seeds storing all points: returns (m, n+1, 3) plus flags."""
    m = seeds.shape[0]
    pts = np.empty((m, n + 1, 3))
    max_drift = np.zeros(m)
    escaped = np.zeros(m, dtype=np.bool_)
    status = np.zeros(m, dtype=np.int64)
    for j in range(m):
        p, d, e, s = trace_orbit(seeds[j], V, n, reproject_every, guard)
        kept = p.shape[0]
        pts[j, :kept] = p
        for i in range(kept, n + 1):
            pts[j, i, 0] = np.nan
            pts[j, i, 1] = np.nan
            pts[j, i, 2] = np.nan
        max_drift[j] = d
        escaped[j] = e
        status[j] = s
    return pts, max_drift, escaped, status
