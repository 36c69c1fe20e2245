"""Orbit iteration on the compact surface, Lyapunov exponents, chaos grids,
and Poincare-section point clouds for the trace map and the standard map.

Grid sweeps are deterministic given (V or k, res, n, threshold, sheet): cells
are classified independently and merged by index, so the worker count never
changes the output.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .defaults import DEFAULTS
from .errors import EscapedDomain, SingularGradient
from .maps import invariant
from .surface import solve_z

CLASS_CHAOTIC = 0
CLASS_REGULAR = 1
CLASS_ESCAPED = 2
CLASS_OFF_SURFACE = 3


class CellClass(enum.IntEnum):
    Chaotic = CLASS_CHAOTIC
    Regular = CLASS_REGULAR
    Escaped = CLASS_ESCAPED
    OffSurface = CLASS_OFF_SURFACE


@dataclass
class Orbit:
    """A finite trajectory on S_V with drift diagnostics."""

    V: float
    seed: np.ndarray
    points: np.ndarray              # (n+1, 3)
    reprojection_interval: int
    max_drift: float
    escaped: bool

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class ChaosMap:
    """Per-cell Lyapunov estimates and classes over an (x, y) or torus grid."""

    parameter: float                # V for the trace map, k for the standard map
    system: str                     # "trace" | "standard"
    resolution: int
    n: int
    threshold: float
    sheet: str
    x_axis: np.ndarray
    y_axis: np.ndarray
    lyapunov: np.ndarray            # (res, res)
    classes: np.ndarray             # (res, res) of CellClass codes
    metadata: dict = field(default_factory=dict)

    @property
    def chaotic_fraction(self) -> float:
        on = self.classes != CLASS_OFF_SURFACE
        if not np.any(on):
            return 0.0
        return float(np.sum(self.classes == CLASS_CHAOTIC) / np.sum(on))

    def cell_centers(self, cls: int = CLASS_CHAOTIC) -> np.ndarray:
        """(x, y) centers of the cells with the given class, row-major order."""
        ii, jj = np.nonzero(self.classes == cls)
        return np.stack([self.x_axis[ii], self.y_axis[jj]], axis=-1)

    def sidecar(self) -> dict:
        key = "V" if self.system == "trace" else "k"
        return {
            key: self.parameter,
            "system": self.system,
            "res": self.resolution,
            "n": self.n,
            "threshold": self.threshold,
            "sheet": self.sheet,
            "chaotic_fraction": self.chaotic_fraction,
            **self.metadata,
        }


def iterate(seed, V: float, n: int, reprojection_interval: int = None) -> Orbit:
    """n trace-map iterates of seed with periodic reprojection onto S_V.

    Requires |I(seed) - V| < 1e-6.  Raises EscapedDomain if an iterate
    leaves [-10, 10]^3 and SingularGradient if a due reprojection lands on a
    near-singular gradient.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    interval = (
        DEFAULTS["reprojection_interval"]
        if reprojection_interval is None
        else reprojection_interval
    )
    seed = np.asarray(seed, dtype=float)
    drift0 = abs(float(invariant(seed)) - V)
    if drift0 >= 1e-6:
        raise ValueError(f"seed is off-surface: |I - V| = {drift0:.3e}")
    pts, max_drift, escaped, status = _kernels.trace_orbit(
        seed, V, n, interval, DEFAULTS["guard_box"]
    )
    if status == 1:
        raise EscapedDomain(f"orbit left the guard box after {len(pts) - 1} steps")
    if status == 2:
        raise SingularGradient("reprojection hit a near-singular gradient")
    return Orbit(
        V=V,
        seed=seed,
        points=pts,
        reprojection_interval=interval,
        max_drift=float(max_drift),
        escaped=bool(escaped),
    )


def lyapunov_exponent(seed, V: float, n: int, reprojection_interval: int = None) -> float:
    """Largest surface Lyapunov exponent: (1/n) sum of log ||DT v||.

    The tangent vector is renormalized each step and re-orthogonalized into
    the surface tangent plane (the monodromy's neutral gradient direction
    would otherwise pollute the estimate).
    """
    interval = (
        DEFAULTS["reprojection_interval"]
        if reprojection_interval is None
        else reprojection_interval
    )
    seeds = np.asarray(seed, dtype=float).reshape(1, 3)
    lyap, status = _kernels.trace_lyapunov_batch(
        seeds, V, n, interval, DEFAULTS["guard_box"]
    )
    if status[0] == 1:
        raise EscapedDomain("orbit left the guard box during exponent estimate")
    return float(lyap[0])


def lyapunov_batch(seeds, V: float, n: int, reprojection_interval: int = None):
    """Vector of exponents for many seeds; escaped seeds come back as NaN."""
    interval = (
        DEFAULTS["reprojection_interval"]
        if reprojection_interval is None
        else reprojection_interval
    )
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 3)
    lyap, status = _kernels.trace_lyapunov_batch(
        seeds, V, n, interval, DEFAULTS["guard_box"]
    )
    lyap = lyap.copy()
    lyap[status == 1] = np.nan
    return lyap, status


def chaos_grid(
    V: float,
    res: int = None,
    n: int = None,
    threshold: float = None,
    sheet: str = "upper",
    workers: int = 1,
) -> ChaosMap:
    """Classify every on-surface (x, y) cell of a res x res grid over [-1, 1]^2.

    Cells without a real z-root are OffSurface; others get the upper-sheet
    (or lower-sheet) point and are Chaotic when the Lyapunov estimate exceeds
    the threshold.
    """
    if not -1.0 < V < 0.0:
        raise ValueError("chaos_grid needs -1 < V < 0")
    res = DEFAULTS["chaos_resolution"] if res is None else res
    n = DEFAULTS["chaos_iterations"] if n is None else n
    threshold = DEFAULTS["chaos_threshold"] if threshold is None else threshold

    axis = (np.arange(res) + 0.5) / res * 2.0 - 1.0
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    z_lo, z_hi, mask = solve_z(X.ravel(), Y.ravel(), V)
    z = z_hi if sheet == "upper" else z_lo
    inside = mask & (np.abs(z) <= 1.0 + 1e-12)

    classes = np.full(res * res, CLASS_OFF_SURFACE, dtype=np.int64)
    lyap_flat = np.full(res * res, np.nan)
    idx = np.nonzero(inside)[0]
    if len(idx):
        seeds = np.stack([X.ravel()[idx], Y.ravel()[idx], z[idx]], axis=-1)
        lyap, status = _run_batches(
            lambda chunk: _kernels.trace_lyapunov_batch(
                chunk, V, n, DEFAULTS["reprojection_interval"], DEFAULTS["guard_box"]
            ),
            seeds,
            workers,
        )
        lyap_flat[idx] = lyap
        cell = np.where(lyap > threshold, CLASS_CHAOTIC, CLASS_REGULAR)
        cell[status == 1] = CLASS_ESCAPED
        classes[idx] = cell

    return ChaosMap(
        parameter=V,
        system="trace",
        resolution=res,
        n=n,
        threshold=threshold,
        sheet=sheet,
        x_axis=axis,
        y_axis=axis,
        lyapunov=lyap_flat.reshape(res, res),
        classes=classes.reshape(res, res),
    )


def stdmap_chaos_grid(
    k: float,
    res: int = None,
    n: int = None,
    threshold: float = None,
    workers: int = 1,
) -> ChaosMap:
    """Same classification over the unit torus using the analytic Jacobian."""
    if k < 0:
        raise ValueError("k must be >= 0")
    res = DEFAULTS["chaos_resolution"] if res is None else res
    n = DEFAULTS["chaos_iterations"] if n is None else n
    threshold = DEFAULTS["chaos_threshold"] if threshold is None else threshold

    axis = (np.arange(res) + 0.5) / res
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    seeds = np.stack([X.ravel(), Y.ravel()], axis=-1)
    lyap = _run_batches(
        lambda chunk: _kernels.standard_lyapunov_batch(chunk, k, n), seeds, workers
    )
    classes = np.where(lyap > threshold, CLASS_CHAOTIC, CLASS_REGULAR)
    return ChaosMap(
        parameter=k,
        system="standard",
        resolution=res,
        n=n,
        threshold=threshold,
        sheet="torus",
        x_axis=axis,
        y_axis=axis,
        lyapunov=lyap.reshape(res, res),
        classes=classes.reshape(res, res),
    )


def _run_batches(fn, seeds, workers: int):
    """Split seeds into worker batches and merge by index (canonical order)."""
    workers = max(1, int(workers))
    if workers == 1 or len(seeds) < 2 * workers:
        return fn(seeds)
    chunks = np.array_split(np.arange(len(seeds)), workers)
    parts = [fn(seeds[c]) for c in chunks]
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(len(parts[0])))
    return np.concatenate(parts)


@dataclass
class PoincareCloud:
    """Concatenated labeled orbits plus the default (x, y) projection."""

    V: float
    seed_ids: np.ndarray            # (total,)
    steps: np.ndarray               # (total,)
    points: np.ndarray              # (total, 3)
    sheets: np.ndarray              # (total,) +1 above z = xy, -1 below
    failures: list
    metadata: dict = field(default_factory=dict)

    @property
    def projection(self) -> np.ndarray:
        return self.points[:, :2]

    def to_csv(self, path) -> None:
        header = "seed_id,step,x,y,z"
        data = np.column_stack(
            [self.seed_ids, self.steps, self.points[:, 0], self.points[:, 1], self.points[:, 2]]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt=["%d", "%d", "%.17g", "%.17g", "%.17g"])

    def coverage(self, res: int = 100) -> float:
        """Fraction of on-surface (x, y) cells visited by the projected cloud."""
        axis = (np.arange(res) + 0.5) / res * 2.0 - 1.0
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        _, _, mask = solve_z(X.ravel(), Y.ravel(), self.V)
        on_cells = int(np.sum(mask))
        if on_cells == 0:
            return 0.0
        ix = np.clip(((self.points[:, 0] + 1.0) / 2.0 * res).astype(int), 0, res - 1)
        iy = np.clip(((self.points[:, 1] + 1.0) / 2.0 * res).astype(int), 0, res - 1)
        visited = np.zeros((res, res), dtype=bool)
        visited[ix, iy] = True
        return float(np.sum(visited & mask.reshape(res, res)) / on_cells)


def poincare_cloud(V: float, seeds, n: int = None, reprojection_interval: int = None) -> PoincareCloud:
    """Iterate every seed, labeling points by seed index and z-sheet.

    Per-seed failures are recorded and the run continues.
    """
    n = DEFAULTS["poincare_iterations"] if n is None else n
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 3)
    ids, steps, points, failures = [], [], [], []
    for j, s in enumerate(seeds):
        try:
            orb = iterate(s, V, n, reprojection_interval)
        except Exception as exc:  # per-seed failure: record and continue
            failures.append({"seed_id": j, "error": type(exc).__name__, "detail": str(exc)})
            continue
        m = len(orb.points)
        ids.append(np.full(m, j))
        steps.append(np.arange(m))
        points.append(orb.points)
    if points:
        points_arr = np.concatenate(points)
        ids_arr = np.concatenate(ids)
        steps_arr = np.concatenate(steps)
    else:
        points_arr = np.empty((0, 3))
        ids_arr = np.empty(0, dtype=int)
        steps_arr = np.empty(0, dtype=int)
    sheets = np.where(
        points_arr[:, 2] >= points_arr[:, 0] * points_arr[:, 1], 1, -1
    ) if len(points_arr) else np.empty(0, dtype=int)
    return PoincareCloud(
        V=V,
        seed_ids=ids_arr,
        steps=steps_arr,
        points=points_arr,
        sheets=sheets,
        failures=failures,
        metadata={"n": n, "projection": "orthographic (x, y), sheet tagged"},
    )


def chaos_map_to_files(cm: ChaosMap, csv_path, json_path) -> None:
    """CSV grid of Lyapunov values plus a JSON sidecar with the full config."""
    np.savetxt(csv_path, cm.lyapunov, delimiter=",", fmt="%.10g")
    with open(json_path, "w") as fh:
        json.dump(cm.sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")
