"""Cantor presentations, Newhouse thickness, the thickness-to-dimension
bound, the gap lemma predicate, and box-counting dimension.

A presentation is an ordering of the gaps; thickness for a given ordering is
the infimum over gap endpoints of bridge/gap length ratios, where the bridge
at an endpoint is the component of the hull minus all earlier gaps (and the
gap itself) containing that endpoint.  Ordering by decreasing gap length
realizes the supremum over presentations for finite gap families, which is
how sampled sets are presented here.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHull, InsufficientScales, NoGaps


@dataclass
class CantorPresentation:
    hull: tuple                     # (lo, hi)
    gaps: list                      # ordered list of (lo, hi), the presentation
    depth: int = 0                  # construction depth, metadata only
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.hull
        if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
            raise DegenerateHull(f"bad hull {self.hull}")
        for a, b in self.gaps:
            if not (lo <= a < b <= hi):
                raise ValueError(f"gap ({a}, {b}) not inside hull {self.hull}")
        s = sorted(self.gaps)
        for (a1, b1), (a2, b2) in zip(s[:-1], s[1:]):
            if b1 > a2:
                raise ValueError(f"overlapping gaps ({a1},{b1}) and ({a2},{b2})")

    @property
    def hull_length(self) -> float:
        return self.hull[1] - self.hull[0]

    def remaining_intervals(self) -> list:
        """Closed intervals left after removing every gap from the hull."""
        lo, hi = self.hull
        out = []
        cur = lo
        for a, b in sorted(self.gaps):
            if a > cur:
                out.append((cur, a))
            elif a == cur:
                pass
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return out

    def to_json_dict(self) -> dict:
        return {
            "hull": list(self.hull),
            "gaps": [list(g) for g in self.gaps],
            "depth": self.depth,
            **({"metadata": self.metadata} if self.metadata else {}),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def middle_alpha_cantor(alpha: float, depth: int, lo: float = 0.0, hi: float = 1.0) -> CantorPresentation:
    """Standard middle-alpha construction to the given depth.

    Gaps are presented in construction order (largest first), which is also
    the decreasing-length order.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    gaps = []
    intervals = [(lo, hi)]
    for _ in range(depth):
        nxt = []
        for a, b in intervals:
            L = b - a
            side = (1.0 - alpha) / 2.0 * L
            gaps.append((a + side, b - side))
            nxt.append((a, a + side))
            nxt.append((b - side, b))
        intervals = nxt
    return CantorPresentation(hull=(lo, hi), gaps=gaps, depth=depth,
                              metadata={"alpha": alpha})


def thickness(c: CantorPresentation) -> float:
    """Thickness of the presentation: inf over gap endpoints of |bridge|/|gap|.

    Processes the gaps in presentation order; the bridge at an endpoint of
    gap U_n is the component of hull minus U_1..U_n containing it, which is
    bounded by the nearest endpoint of an earlier gap (or the hull).
    """
    if not c.gaps:
        raise NoGaps("thickness of a gap-free presentation is infinite")
    lo, hi = c.hull
    starts: list = []     # sorted gap start points of earlier gaps
    ends: list = []       # sorted gap end points of earlier gaps
    tau = np.inf
    for a, b in c.gaps:
        # bridge to the left of a: from a back to the nearest earlier gap end
        i = bisect.bisect_right(ends, a)
        left_bound = ends[i - 1] if i > 0 else lo
        # bridge to the right of b: up to the nearest earlier gap start
        j = bisect.bisect_left(starts, b)
        right_bound = starts[j] if j < len(starts) else hi
        gap_len = b - a
        tau = min(tau, (a - left_bound) / gap_len, (right_bound - b) / gap_len)
        bisect.insort(starts, a)
        bisect.insort(ends, b)
    return float(tau)


def dim_lower_bound(tau: float) -> float:
    """Hausdorff-dimension lower bound log 2 / log(2 + 1/tau) from thickness."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return float(np.log(2.0) / np.log(2.0 + 1.0 / tau))


def gap_lemma_predict(c1: CantorPresentation, c2: CantorPresentation,
                      boundary_tol: float = 1e-9) -> dict:
    """Gap-lemma prediction for two presentations.

    linked: neither hull lies inside a gap of the other nor outside the
    other's hull.  predicted_intersect: linked and tau1*tau2 > 1.  The
    boundary case tau1*tau2 == 1 (within boundary_tol) is flagged and the
    prediction suppressed.
    """
    t1, t2 = thickness(c1), thickness(c2)
    product = t1 * t2
    linked = _linked(c1, c2) and _linked(c2, c1)
    boundary = abs(product - 1.0) <= boundary_tol
    return {
        "linked": linked,
        "tau1": t1,
        "tau2": t2,
        "tau_product": product,
        "boundary": boundary,
        "predicted_intersect": bool(linked and not boundary and product > 1.0),
    }


def _linked(a: CantorPresentation, b: CantorPresentation) -> bool:
    """Hull of a intersects hull of b and does not sit inside a gap of b."""
    alo, ahi = a.hull
    blo, bhi = b.hull
    if ahi <= blo or alo >= bhi:
        return False
    for g0, g1 in b.gaps:
        if g0 <= alo and ahi <= g1:
            return False
    return True


def brute_intersect(c1: CantorPresentation, c2: CantorPresentation,
                    resolution: float = 1e-9) -> bool:
    """Whether the depth-limited remaining intervals share a point up to
    the resolution (oracle for the gap-lemma prediction)."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    r1 = c1.remaining_intervals()
    r2 = c2.remaining_intervals()
    i = j = 0
    while i < len(r1) and j < len(r2):
        a1, b1 = r1[i]
        a2, b2 = r2[j]
        if min(b1, b2) - max(a1, a2) >= -resolution:
            return True
        if b1 < b2:
            i += 1
        else:
            j += 1
    return False


def presentation_from_samples(points, min_gap: float) -> CantorPresentation:
    """Hull and decreasing-length gap presentation from sorted 1-D samples.

    Gaps are the maximal inter-sample intervals longer than min_gap.  A
    two-point sample whose single spacing exceeds min_gap is flagged
    degenerate-interior (hull equals the one gap's closure).
    """
    pts = np.sort(np.asarray(points, dtype=float))
    if len(pts) < 2:
        raise ValueError("need at least 2 sample points")
    lo, hi = float(pts[0]), float(pts[-1])
    if hi - lo < 1e-14:
        raise DegenerateHull(f"sample span {hi - lo:.3e}")
    diffs = np.diff(pts)
    idx = np.nonzero(diffs > min_gap)[0]
    gaps = [(float(pts[i]), float(pts[i + 1])) for i in idx]
    gaps.sort(key=lambda g: g[1] - g[0], reverse=True)
    meta = {"min_gap": min_gap, "n_samples": int(len(pts)),
            "ordering": "decreasing gap length"}
    if len(gaps) == len(pts) - 1 and len(gaps) > 0:
        meta["degenerate_interior"] = True
    return CantorPresentation(hull=(lo, hi), gaps=gaps, depth=0, metadata=meta)


@dataclass
class BoxCountReport:
    scales: np.ndarray
    counts: np.ndarray
    slope: float                    # clamped to [0, 2]
    r2: float
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "scales": self.scales.tolist(),
            "counts": self.counts.tolist(),
            "slope": self.slope,
            "r2": self.r2,
            **self.metadata,
        }


def box_dimension(points, scales) -> BoxCountReport:
    """Box-counting dimension of a planar point set.

    Least-squares slope of log N(eps) against log(1/eps); the slope is
    clamped to [0, 2] with the raw value kept in metadata.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (n, 2)")
    if len(pts) < 100:
        raise ValueError("need at least 100 points")
    scales = np.sort(np.asarray(scales, dtype=float))[::-1]
    if len(scales) < 4:
        raise InsufficientScales("need at least 4 scales")
    counts = np.empty(len(scales), dtype=np.int64)
    for k, eps in enumerate(scales):
        cells = np.floor(pts / eps).astype(np.int64)
        counts[k] = len(np.unique(cells, axis=0))
    x = np.log(1.0 / scales)
    y = np.log(counts.astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return BoxCountReport(
        scales=scales,
        counts=counts,
        slope=float(np.clip(slope, 0.0, 2.0)),
        r2=r2,
        metadata={"raw_slope": float(slope), "n_points": int(len(pts))},
    )
