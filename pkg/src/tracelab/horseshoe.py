"""Avoidance horseshoes of the torus automorphism: survivor sets along
eigenlines, their Cantor presentations and thickness growth, and projection
onto the Cayley cubic through the factor map.

The automorphism is linear, so the image of a segment of an eigenline is
again a segment and box-avoidance per iterate is an exact interval
computation: a parameter t on the line through a periodic anchor is excluded
at iterate n exactly when both torus coordinates of orbit(n) + t mu^n e fall
within eps of a box center (mod 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cantor import CantorPresentation, thickness
from .defaults import DEFAULTS
from .errors import EverythingDies
from .maps import GOLDEN, anosov_step, factor_map, invariant, reduce_torus

#: eigenvalues of [[1, 1], [1, 0]]
UNSTABLE_MULTIPLIER = GOLDEN
STABLE_MULTIPLIER = -1.0 / GOLDEN

#: Default section anchor: the period-6 orbit of (1/4, 1/4) keeps sup-norm
#: distance exactly 1/4 from every box center, the best possible margin.  A
#: half-integer anchor cannot work: it sits inside its own avoidance box, so
#: its stable line dies under forward iteration.
DEFAULT_ANCHOR = (0.25, 0.25)


def singular_preimages() -> np.ndarray:
    """Torus preimages of the four conic corners under the factor map.

    Each corner has exactly one preimage: the four half-integer points are
    fixed by the minus-identity involution the factor map quotients by.
    """
    return np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]])


@dataclass
class AvoidanceSpec:
    epsilon: float
    centers: np.ndarray = None      # defaults to the singular preimages
    depth: int = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.25:
            raise ValueError("epsilon must lie in (0, 1/4)")
        self.centers = (
            singular_preimages() if self.centers is None
            else reduce_torus(np.asarray(self.centers, dtype=float))
        )
        self.depth = DEFAULTS["avoidance_depth"] if self.depth is None else self.depth
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


@dataclass
class SurvivorSection:
    anchor: np.ndarray
    direction: str                  # "Stable" | "Unstable"
    presentation: CantorPresentation
    spec: AvoidanceSpec
    segment: tuple                  # parameter range of the scanned segment
    eigvec: np.ndarray
    survivors: list                 # surviving parameter intervals
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "anchor": self.anchor.tolist(),
            "direction": self.direction,
            "epsilon": self.spec.epsilon,
            "depth": self.spec.depth,
            "segment": list(self.segment),
            "presentation": self.presentation.to_json_dict(),
            **self.metadata,
        }


def _anchor_orbit(anchor: np.ndarray, depth: int) -> dict:
    """A^n(anchor) for n in [-depth, depth]; anchor must be A-periodic."""
    fw = [reduce_torus(anchor)]
    for _ in range(depth):
        fw.append(anosov_step(fw[-1]))
    bw = [fw[0]]
    # inverse of [[1,1],[1,0]] is [[0,1],[1,-1]]
    for _ in range(depth):
        th, ph = bw[-1]
        bw.append(reduce_torus(np.array([ph, th - ph])))
    period_guard = np.linalg.norm(fw[-1] - fw[0])
    return {n: fw[n] if n >= 0 else bw[-n] for n in range(-depth, depth + 1)}


def _band_intervals(a: float, w: float, c: float, eps: float,
                    t_lo: float, t_hi: float):
    """Sorted intervals of {t in [t_lo, t_hi]: a + w t in [c-eps, c+eps] mod 1}."""
    if w == 0.0:
        d = (a - c) % 1.0
        if min(d, 1.0 - d) <= eps:
            return np.array([[t_lo, t_hi]])
        return np.empty((0, 2))
    lo_k = (c - eps - a)
    hi_k = (c + eps - a)
    # k values for which the band intersects [t_lo, t_hi]
    k_bounds = np.array([w * t_lo - hi_k, w * t_hi - hi_k,
                         w * t_lo - lo_k, w * t_hi - lo_k])
    k_min = int(np.floor(k_bounds.min()))
    k_max = int(np.ceil(k_bounds.max()))
    ks = np.arange(k_min, k_max + 1, dtype=float)
    t1 = (lo_k + ks) / w
    t2 = (hi_k + ks) / w
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    keep = (hi >= t_lo) & (lo <= t_hi)
    lo = np.clip(lo[keep], t_lo, t_hi)
    hi = np.clip(hi[keep], t_lo, t_hi)
    out = np.stack([lo, hi], axis=-1)
    return out[np.argsort(out[:, 0])]


def _intersect_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise intersection of two sorted disjoint interval families."""
    if len(a) == 0 or len(b) == 0:
        return np.empty((0, 2))
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i, 0], b[j, 0])
        hi = min(a[i, 1], b[j, 1])
        if hi > lo:
            out.append((lo, hi))
        if a[i, 1] < b[j, 1]:
            i += 1
        else:
            j += 1
    return np.array(out) if out else np.empty((0, 2))


def _merge(intervals: np.ndarray) -> np.ndarray:
    if len(intervals) == 0:
        return intervals
    intervals = intervals[np.argsort(intervals[:, 0])]
    out = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return np.array(out)


def excluded_intervals(anchor, direction: str, spec: AvoidanceSpec,
                       t_lo: float, t_hi: float) -> np.ndarray:
    """Merged parameter intervals whose orbit enters an eps box within depth."""
    anchor = reduce_torus(np.asarray(anchor, dtype=float))
    mu = STABLE_MULTIPLIER if direction == "Stable" else UNSTABLE_MULTIPLIER
    e = np.array([mu, 1.0])
    e = e / np.linalg.norm(e)
    orbit = _anchor_orbit(anchor, spec.depth)
    chunks = []
    for n in range(-spec.depth, spec.depth + 1):
        a_n = orbit[n]
        w = mu ** n * e
        for c in spec.centers:
            b0 = _band_intervals(a_n[0], w[0], c[0], spec.epsilon, t_lo, t_hi)
            b1 = _band_intervals(a_n[1], w[1], c[1], spec.epsilon, t_lo, t_hi)
            both = _intersect_sorted(b0, b1)
            if len(both):
                chunks.append(both)
    if not chunks:
        return np.empty((0, 2))
    return _merge(np.concatenate(chunks))


def survivor_section(anchor, direction: str, spec: AvoidanceSpec,
                     segment_length: float = 1.0) -> SurvivorSection:
    """Cantor presentation of the avoidance survivors along an eigenline.

    The scanned segment is centered on the anchor (so a symmetric center set
    gives survivors symmetric under the midpoint reflection).  Raises
    EverythingDies when no parameter survives; flags depth_too_shallow when
    the gap mass still moved by more than 1% at the last depth increment.
    """
    if direction not in ("Stable", "Unstable"):
        raise ValueError("direction must be 'Stable' or 'Unstable'")
    t_lo, t_hi = -segment_length / 2.0, segment_length / 2.0
    excl = excluded_intervals(anchor, direction, spec, t_lo, t_hi)

    survivors = []
    cur = t_lo
    for lo, hi in excl:
        if lo > cur:
            survivors.append((cur, lo))
        cur = max(cur, hi)
    if cur < t_hi:
        survivors.append((cur, t_hi))
    raw_survivors = list(survivors)
    # segment-boundary survivors may be fragments of cut bridges: drop them
    # from the presentation (nesting checks use the raw family)
    if survivors and survivors[0][0] == t_lo:
        survivors = survivors[1:]
    if survivors and survivors[-1][1] == t_hi:
        survivors = survivors[:-1]
    if not survivors:
        raise EverythingDies(
            f"eps = {spec.epsilon} excludes the whole segment at depth {spec.depth}"
        )

    hull = (survivors[0][0], survivors[-1][1])
    gaps = [
        (float(survivors[i][1]), float(survivors[i + 1][0]))
        for i in range(len(survivors) - 1)
    ]
    gaps.sort(key=lambda g: g[1] - g[0], reverse=True)

    # depth sufficiency: gap mass added by the last depth increment
    shallow = None
    if spec.depth > 1:
        prev = excluded_intervals(
            anchor, direction,
            AvoidanceSpec(spec.epsilon, spec.centers, spec.depth - 1),
            t_lo, t_hi,
        )
        mass = float(np.sum(excl[:, 1] - excl[:, 0])) if len(excl) else 0.0
        mass_prev = float(np.sum(prev[:, 1] - prev[:, 0])) if len(prev) else 0.0
        shallow = bool(
            mass_prev == 0.0
            or (mass - mass_prev) / max(mass, 1e-300) > DEFAULTS["gap_mass_stabilization"]
        )

    mu = STABLE_MULTIPLIER if direction == "Stable" else UNSTABLE_MULTIPLIER
    e = np.array([mu, 1.0])
    e = e / np.linalg.norm(e)
    presentation = CantorPresentation(
        hull=hull,
        gaps=gaps,
        depth=spec.depth,
        metadata={
            "epsilon": spec.epsilon,
            "construction": "per-iterate box avoidance (not a Markov partition)",
            "ordering": "decreasing gap length",
        },
    )
    return SurvivorSection(
        anchor=reduce_torus(np.asarray(anchor, dtype=float)),
        direction=direction,
        presentation=presentation,
        spec=spec,
        segment=(t_lo, t_hi),
        eigvec=e,
        survivors=[(float(a), float(b)) for a, b in survivors],
        metadata={"depth_too_shallow": shallow,
                  "raw_survivors": [(float(a), float(b)) for a, b in raw_survivors]},
    )


def thickness_vs_epsilon(eps_list, anchor=DEFAULT_ANCHOR, direction: str = "Stable",
                         depth: int = None) -> dict:
    """Table of (eps, tau) rows for a decreasing eps list, plus monotonicity
    and exact-nesting reports."""
    eps_arr = list(eps_list)
    if any(b >= a for a, b in zip(eps_arr[:-1], eps_arr[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    rows = []
    sections = []
    for eps in eps_arr:
        spec = AvoidanceSpec(epsilon=eps, depth=depth)
        try:
            sec = survivor_section(anchor, direction, spec)
            tau = thickness(sec.presentation)
            rows.append({"epsilon": eps, "tau": tau,
                         "gaps": len(sec.presentation.gaps),
                         "status": "ok"})
            sections.append(sec)
        except EverythingDies:
            rows.append({"epsilon": eps, "tau": None, "gaps": None,
                         "status": "EverythingDies"})
            sections.append(None)
    taus = [r["tau"] for r in rows if r["tau"] is not None]
    nested = all(
        _nested(sections[i], sections[i + 1])
        for i in range(len(sections) - 1)
        if sections[i] is not None and sections[i + 1] is not None
    )
    return {
        "rows": rows,
        "tau_nondecreasing": all(b >= a for a, b in zip(taus[:-1], taus[1:])),
        "exactly_nested": nested,
        "anchor": list(np.asarray(anchor, dtype=float)),
        "direction": direction,
        "depth": DEFAULTS["avoidance_depth"] if depth is None else depth,
    }


def _nested(coarse: SurvivorSection, fine: SurvivorSection) -> bool:
    """Every surviving interval at the larger eps sits inside one at the smaller."""
    fine_iv = fine.metadata["raw_survivors"]
    starts = np.array([a for a, _ in fine_iv])
    for a, b in coarse.metadata["raw_survivors"]:
        k = np.searchsorted(starts, a, side="right") - 1
        if k < 0 or not (fine_iv[k][0] <= a and b <= fine_iv[k][1]):
            return False
    return True


def project_survivors(section: SurvivorSection, samples: int = 1000) -> dict:
    """Sample the surviving intervals and push them onto the Cayley cubic.

    Returns the 3-D points (all with |I| below 1e-12), the torus samples,
    and the pushforward radius of the avoided boxes (how far the excluded
    neighborhoods reach on the surface).
    """
    lengths = np.array([b - a for a, b in section.survivors])
    total = float(np.sum(lengths))
    counts = np.maximum(1, np.round(samples * lengths / total).astype(int))
    ts = np.concatenate([
        np.linspace(a, b, c + 2)[1:-1] if c > 0 else np.array([(a + b) / 2.0])
        for (a, b), c in zip(section.survivors, counts)
    ])
    torus_pts = reduce_torus(section.anchor + ts[:, None] * section.eigvec)
    pts = factor_map(torus_pts)

    # pushforward radius: image size of the avoided boxes under the factor map
    eps = section.spec.epsilon
    grid = np.linspace(-eps, eps, 9)
    gx, gy = np.meshgrid(grid, grid, indexing="ij")
    offsets = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    radius = 0.0
    for c in section.spec.centers:
        box = factor_map(reduce_torus(c + offsets))
        center = factor_map(reduce_torus(c))
        radius = max(radius, float(np.max(np.linalg.norm(box - center, axis=-1))))
    return {
        "points": pts,
        "torus_points": torus_pts,
        "params": ts,
        "pushforward_radius": radius,
        "max_invariant_error": float(np.max(np.abs(invariant(pts)))),
    }


def survivors_to_csv(result: dict, path) -> None:
    np.savetxt(path, result["points"], delimiter=",", header="x,y,z", comments="")
