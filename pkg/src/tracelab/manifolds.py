"""One-dimensional invariant manifolds of hyperbolic periodic orbits on S_V:
adaptive growth, intersection detection, quadratic-tangency validation, and
unfolding-speed estimation in V.

A point of the unstable manifold is addressed by a signed parameter tau:
with seed distance d and unstable multiplier mu (signed), the point is
T^(k*period) of the surface projection of p0 + t*e where tau = mu^k * t and
|t| lies in the fundamental window [d, |mu| d).  Refinement inserts midpoints
of tau (preimage bisection), so the invariant-curve property is preserved
under expansion.  The stable side is grown by the same code on the
time-reversed orbit and mapped back through sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .defaults import DEFAULTS
from .errors import BranchLost, NotHyperbolic, SingularityApproach, SingularGradient
from .maps import invariant, trace_map, trace_map_inverse, sigma as sigma_map
from .periodic import PeriodicOrbit, Stability, monodromy_at, orbit_points
from .surface import (
    chart_coords,
    chart_point,
    project_to_level_safe,
    singular_points,
    tangent_frame,
)


@dataclass
class ManifoldArc:
    owner: PeriodicOrbit
    side: str                      # "Stable" | "Unstable"
    vertices: np.ndarray           # (m, 3), ordered by the signed parameter
    params: np.ndarray             # (m,) signed tau values
    arclength: float               # total polyline length
    refinement_tol: float
    multiplier: float              # signed expansion factor per period
    direction: np.ndarray          # unit eigenvector at the seed point
    truncated: bool = False        # hit a singularity guard ball
    metadata: dict = field(default_factory=dict)
    _evaluator: object = field(default=None, repr=False, compare=False)

    @property
    def seed_index(self) -> int:
        return int(np.searchsorted(self.params, 0.0))

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=-1)

    def evaluate(self, taus) -> np.ndarray:
        """Fresh manifold points at arbitrary signed parameters (for local
        window refinement around tangency candidates)."""
        if self._evaluator is None:
            raise ValueError("arc carries no evaluator")
        return self._evaluator(np.asarray(taus, dtype=float))


def _unstable_data(po: PeriodicOrbit):
    """Signed real unstable multiplier and unit eigenvector of the monodromy."""
    evals, evecs = np.linalg.eig(po.monodromy)
    idx = int(np.argmax(np.abs(evals)))
    mu = evals[idx]
    if abs(np.imag(mu)) > 1e-9 or abs(mu) <= 1.0 + 1e-9:
        raise NotHyperbolic(f"dominant multiplier {mu} is not real expanding")
    vec = np.real(evecs[:, idx])
    vec = vec / np.linalg.norm(vec)
    return float(np.real(mu)), vec


def reversed_orbit(po: PeriodicOrbit) -> PeriodicOrbit:
    """The sigma-image orbit: a periodic orbit of T through sigma(points[0]).

    T(sigma p_i) = sigma(p_{i-1}), so the point sequence is sigma of the
    reversed cycle.
    """
    pts = sigma_map(po.points[::-1])
    pts = np.roll(pts, 1, axis=0)           # start at sigma(points[0])
    M = monodromy_at(pts)
    return PeriodicOrbit(
        V=po.V,
        period=po.period,
        points=pts,
        monodromy=M,
        residual_trace=po.residual_trace,
        stability=po.stability,
        newton_residual=po.newton_residual,
        raw_pair=po.raw_pair,
        doubled=po.doubled,
        lower_period=po.lower_period,
        singular=po.singular,
    )


class _Grower:
    """Evaluates unstable-manifold points by their signed parameter."""

    def __init__(self, po: PeriodicOrbit, seed_distance: float, forward: bool = True):
        self.po = po
        self.V = po.V
        self.d = seed_distance
        self.forward = forward
        self.mu, self.e = _unstable_data(po)
        self.p0 = po.points[0]
        self._own_corners = [
            s for s in singular_points()
            if min(np.linalg.norm(po.points - s, axis=-1)) < 1e-9
        ]
        self._step = trace_map if forward else trace_map_inverse

    def _apply_period(self, pts: np.ndarray) -> np.ndarray:
        for _ in range(self.po.period):
            pts = self._step(pts)
        drift = np.abs(invariant(pts) - self.V)
        if np.max(drift) > DEFAULTS["projection_tol"]:
            # near-corner rows that cannot be projected get truncated later
            pts, _ = project_to_level_safe(pts, self.V)
        return pts

    def evaluate(self, taus: np.ndarray) -> np.ndarray:
        """Vectorized point(tau) for an array of signed parameters."""
        taus = np.asarray(taus, dtype=float)
        out = np.empty(taus.shape + (3,))
        amu = abs(self.mu)
        k = np.floor(np.log(np.abs(taus) / self.d) / np.log(amu) + 1e-12).astype(int)
        k = np.maximum(k, 0)
        t0 = taus / np.power(self.mu, k)
        base = self.p0 + t0[..., None] * self.e
        base, _ = project_to_level_safe(base, self.V)
        kmax = int(np.max(k))
        pts = base
        for kk in range(kmax):
            sel = k > kk
            if not np.any(sel):
                break
            pts[sel] = self._apply_period(pts[sel])
        out[...] = pts
        return out


def grow_manifold(
    po: PeriodicOrbit,
    side: str,
    target_arclength: float,
    tol: float = None,
    *,
    seed_distance: float = None,
    max_segment: float = None,
    max_vertices: int = 200_000,
    on_singularity: str = "raise",
) -> ManifoldArc:
    """Adaptively refined polyline along W^u or W^s of a hyperbolic orbit.

    Both half-branches are grown until each reaches target_arclength (or is
    truncated at a singularity guard ball).  Consecutive segments turn by at
    most tol radians and are no longer than max_segment after refinement.
    """
    if po.stability not in (Stability.HYPERBOLIC, Stability.REFLECTION_HYPERBOLIC):
        raise NotHyperbolic(f"orbit is {po.stability.value}")
    tol = DEFAULTS["manifold_turning_tol"] if tol is None else tol
    seed_distance = (
        DEFAULTS["manifold_seed_distance"] if seed_distance is None else seed_distance
    )
    if max_segment is None:
        max_segment = max(target_arclength / 100.0, 1e-4)

    if side == "Stable":
        twin = grow_manifold(
            reversed_orbit(po), "Unstable", target_arclength, tol,
            seed_distance=seed_distance, max_segment=max_segment,
            max_vertices=max_vertices, on_singularity=on_singularity,
        )
        return ManifoldArc(
            owner=po,
            side="Stable",
            vertices=sigma_map(twin.vertices),
            params=twin.params,
            arclength=twin.arclength,
            refinement_tol=tol,
            multiplier=twin.multiplier,
            direction=sigma_map(twin.direction),
            truncated=twin.truncated,
            metadata=twin.metadata,
            _evaluator=(lambda taus: sigma_map(twin.evaluate(taus))),
        )
    if side != "Unstable":
        raise ValueError("side must be 'Stable' or 'Unstable'")

    g = _Grower(po, seed_distance)
    amu = abs(g.mu)
    n0 = max(12, int(np.ceil(np.log(amu) / 0.15)))   # per fundamental window
    guard = DEFAULTS["singularity_guard"]
    corners = np.array([
        s for s in singular_points()
        if not any(np.allclose(s, o) for o in g._own_corners)
    ])

    def corner_hit(pts):
        if len(corners) == 0:
            return np.zeros(len(pts), dtype=bool)
        d = np.min(np.linalg.norm(pts[:, None, :] - corners[None], axis=-1), axis=1)
        return d < guard

    signs = (-1.0, 1.0)
    if po.singular:
        # at a conic corner only one ruling direction enters the compact
        # component; the other leaves the cube and escapes
        keep = []
        for sign in signs:
            probe = g.evaluate(np.array([sign * seed_distance * amu ** 3]))
            if np.all(np.abs(probe) <= 1.0 + 1e-9):
                keep.append(sign)
        if not keep:
            raise NotHyperbolic("no ruling direction stays in the compact component")
        signs = tuple(keep)

    branches = []
    truncated = False
    for sign in signs:
        taus = [sign * seed_distance * amu ** (i / n0) for i in range(n0 + 1)]
        pts = g.evaluate(np.array(taus))
        while True:
            hit = corner_hit(pts)
            if np.any(hit):
                if on_singularity == "raise":
                    raise SingularityApproach(
                        "arc entered the guard ball of a conic corner"
                    )
                truncated = True
                first = int(np.argmax(hit))
                taus, pts = taus[:first], pts[:first]
                break
            arclen = np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1))
            if arclen >= target_arclength or len(pts) > max_vertices:
                break
            nxt = np.array(
                [taus[-1] * amu ** ((i + 1) / n0) for i in range(n0)]
            )
            taus = taus + list(nxt)
            pts = np.concatenate([pts, g.evaluate(nxt)])
        branches.append((np.asarray(taus, dtype=float), pts))

    neg = [(t[::-1], p[::-1]) for (t, p) in branches if len(t) and t[0] < 0]
    pos = [(t, p) for (t, p) in branches if len(t) and t[0] > 0]
    tau_parts = [t for (t, _) in neg] + [np.array([0.0])] + [t for (t, _) in pos]
    pt_parts = [p for (_, p) in neg] + [g.p0[None]] + [p for (_, p) in pos]
    taus = np.concatenate(tau_parts)
    pts = np.concatenate(pt_parts)

    # refinement: split long or sharply turning segments (preimage bisection)
    for _ in range(24):
        if len(taus) > max_vertices:
            break
        seg = np.diff(pts, axis=0)
        seg_len = np.linalg.norm(seg, axis=-1)
        ok = seg_len > 1e-12
        cosang = np.full(len(seg) - 1, 1.0)
        both = ok[:-1] & ok[1:]
        dots = np.sum(seg[:-1] * seg[1:], axis=-1)
        cosang[both] = dots[both] / (seg_len[:-1] * seg_len[1:])[both]
        bad_vertex = np.nonzero(np.cos(tol) - cosang > 0)[0] + 1
        split = set(np.nonzero(seg_len > max_segment)[0].tolist())
        for i in bad_vertex:
            for j in (i - 1, i):
                if seg_len[j] > 1e-10:
                    split.add(j)
        if not split:
            break
        new_taus = []
        for j in sorted(split):
            a, b = taus[j], taus[j + 1]
            if a == 0.0 or b == 0.0 or np.sign(a) != np.sign(b):
                t = (a + b) / 2.0
                if t == 0.0:
                    continue
            else:
                t = np.sign(a) * np.sqrt(abs(a) * abs(b))
            new_taus.append(t)
        if not new_taus:
            break
        new_pts = g.evaluate(np.array(new_taus))
        taus = np.concatenate([taus, new_taus])
        order = np.argsort(taus)
        taus = taus[order]
        pts = np.concatenate([pts, new_pts])[order]

    # refinement may have pushed new vertices into a guard ball: keep the
    # connected run through tau = 0
    hit = corner_hit(pts)
    if np.any(hit):
        truncated = True
        zero_idx = int(np.searchsorted(taus, 0.0))
        lo = zero_idx
        while lo > 0 and not hit[lo - 1]:
            lo -= 1
        hi = zero_idx
        while hi < len(pts) - 1 and not hit[hi + 1]:
            hi += 1
        taus, pts = taus[lo : hi + 1], pts[lo : hi + 1]

    # trim each branch to the target arclength so arcs are comparable across V
    seg_len = np.linalg.norm(np.diff(pts, axis=0), axis=-1)
    zero_idx = int(np.searchsorted(taus, 0.0))
    cum_pos = np.cumsum(seg_len[zero_idx:])
    hi = zero_idx + int(np.searchsorted(cum_pos, target_arclength)) + 1
    cum_neg = np.cumsum(seg_len[:zero_idx][::-1])
    lo = zero_idx - int(np.searchsorted(cum_neg, target_arclength)) - 1
    lo = max(lo, 0)
    hi = min(hi, len(pts) - 1)
    taus, pts = taus[lo : hi + 1], pts[lo : hi + 1]

    arclength = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1)))
    return ManifoldArc(
        owner=po,
        side="Unstable",
        vertices=pts,
        params=taus,
        arclength=arclength,
        refinement_tol=tol,
        multiplier=g.mu,
        direction=g.e,
        truncated=truncated,
        metadata={"seed_distance": seed_distance, "window_points": n0},
        _evaluator=g.evaluate,
    )


def _segment_candidates(a: ManifoldArc, b: ManifoldArc, radius_pad: float):
    """Index pairs (i, j) of segments whose midpoints are near each other."""
    from scipy.spatial import cKDTree

    pa = 0.5 * (a.vertices[:-1] + a.vertices[1:])
    pb = 0.5 * (b.vertices[:-1] + b.vertices[1:])
    la = np.linalg.norm(np.diff(a.vertices, axis=0), axis=-1)
    lb = np.linalg.norm(np.diff(b.vertices, axis=0), axis=-1)
    r = 0.5 * (np.max(la) if len(la) else 0.0) + 0.5 * (np.max(lb) if len(lb) else 0.0)
    r += radius_pad
    ta, tb = cKDTree(pa), cKDTree(pb)
    pairs = ta.query_ball_tree(tb, r)
    ii = np.array([i for i, js in enumerate(pairs) for _ in js], dtype=int)
    jj = np.array([j for js in pairs for j in js], dtype=int)
    return ii, jj


def _seg_closest_batch(p0, p1, q0, q1):
    """Vectorized closest-approach (s, t, distance) of segment batches."""
    u = p1 - p0
    v = q1 - q0
    w = p0 - q0
    a = np.sum(u * u, axis=-1)
    b = np.sum(u * v, axis=-1)
    c = np.sum(v * v, axis=-1)
    d = np.sum(u * w, axis=-1)
    e = np.sum(v * w, axis=-1)
    den = a * c - b * b
    s = np.where(den > 1e-30, np.clip((b * e - c * d) / np.where(den > 1e-30, den, 1.0), 0.0, 1.0), 0.0)
    t = np.where(c > 1e-30, np.clip((b * s + e) / np.where(c > 1e-30, c, 1.0), 0.0, 1.0), 0.0)
    s = np.where(a > 1e-30, np.clip((b * t - d) / np.where(a > 1e-30, a, 1.0), 0.0, 1.0), 0.0)
    dist = np.linalg.norm((p0 + s[..., None] * u) - (q0 + t[..., None] * v), axis=-1)
    return s, t, dist


def find_intersections(a: ManifoldArc, b: ManifoldArc, *, near: float = 0.0) -> list:
    """All transversal crossings of two arcs in local tangent-frame charts.

    Each candidate segment pair is projected into the chart of the tangent
    frame at its closest-approach midpoint and intersected exactly there.
    With near > 0, non-crossing pairs within that chart distance are also
    returned (flagged crossing=False) for tangency bracketing.  Self
    comparison skips adjacent segments.
    """
    self_test = a is b
    out = []
    ii, jj = _segment_candidates(a, b, radius_pad=max(near, 1e-9))
    if len(ii) == 0:
        return out
    if self_test:
        keep = (jj > ii + 1)
        ii, jj = ii[keep], jj[keep]
        if len(ii) == 0:
            return out
    p0, p1 = a.vertices[ii], a.vertices[ii + 1]
    q0, q1 = b.vertices[jj], b.vertices[jj + 1]
    ss, tt, dists = _seg_closest_batch(p0, p1, q0, q1)
    # crossing pairs have tiny 3-D separation (bounded by chord sagitta)
    la = np.linalg.norm(p1 - p0, axis=-1)
    lb = np.linalg.norm(q1 - q0, axis=-1)
    cutoff = np.maximum(near, 0.4 * (la + lb))
    keep = dists <= cutoff
    ii, jj, ss, tt, dists = ii[keep], jj[keep], ss[keep], tt[keep], dists[keep]
    for i, j, s, t, dist in zip(ii, jj, ss, tt, dists):
        p0, p1 = a.vertices[i], a.vertices[i + 1]
        q0, q1 = b.vertices[j], b.vertices[j + 1]
        mid = 0.5 * ((p0 + s * (p1 - p0)) + (q0 + t * (q1 - q0)))
        try:
            mid_s, ok = project_to_level_safe(mid, a.owner.V)
            if not ok:
                continue
            frame = tangent_frame(mid_s)
        except SingularGradient:
            continue
        A = chart_coords(frame, np.array([p0, p1]))
        B = chart_coords(frame, np.array([q0, q1]))
        da, db = A[1] - A[0], B[1] - B[0]
        den = da[0] * db[1] - da[1] * db[0]
        na, nb = np.linalg.norm(da), np.linalg.norm(db)
        if na < 1e-14 or nb < 1e-14:
            continue
        cosang = abs(np.dot(da, db)) / (na * nb)
        angle = float(np.arccos(np.clip(cosang, -1.0, 1.0)))
        crossing = False
        uv = None
        if abs(den) > 1e-14 * na * nb:
            w = B[0] - A[0]
            su = (w[0] * db[1] - w[1] * db[0]) / den
            tv = (w[0] * da[1] - w[1] * da[0]) / den
            if -1e-12 <= su <= 1.0 + 1e-12 and -1e-12 <= tv <= 1.0 + 1e-12:
                crossing = True
                uv = A[0] + su * da
                s, t = float(np.clip(su, 0, 1)), float(np.clip(tv, 0, 1))
        if not crossing:
            if near <= 0.0 or dist > near:
                continue
            uv = 0.5 * (A[0] + s * da + B[0] + t * db)
        point3, okp = project_to_level_safe(chart_point(frame, uv), a.owner.V)
        if not okp:
            continue
        tau_a = a.params[i] + s * (a.params[i + 1] - a.params[i])
        tau_b = b.params[j] + t * (b.params[j + 1] - b.params[j])
        out.append(
            {
                "point": point3,
                "angle": angle,
                "params": (float(tau_a), float(tau_b)),
                "segments": (int(i), int(j)),
                "crossing": bool(crossing),
                "chart_distance": float(dist),
            }
        )
    return out


@dataclass
class TangencyEvent:
    V: float
    location: np.ndarray
    stable_arc: ManifoldArc
    unstable_arc: ManifoldArc
    crossing_angle: float
    quad_coeffs: dict               # {"c_s": float, "c_u": float}
    separation: float               # signed extremal gap M; 0 at tangency,
                                    # > 0 on the two-crossing side
    unfolding_speed: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "V": self.V,
            "point": np.asarray(self.location).tolist(),
            "angle": self.crossing_angle,
            "c_s": self.quad_coeffs["c_s"],
            "c_u": self.quad_coeffs["c_u"],
            "separation": self.separation,
            "speed": self.unfolding_speed,
            "diagnostics": {
                k: v for k, v in self.diagnostics.items() if np.isscalar(v)
            },
        }


def _fit_quadratic(frame_origin, e1, e2, pts):
    d = pts - frame_origin
    s = d @ e1
    z = d @ e2
    Amat = np.stack([np.ones_like(s), s, s * s], axis=-1)
    coef, *_ = np.linalg.lstsq(Amat, z, rcond=None)
    resid = float(np.sqrt(np.mean((Amat @ coef - z) ** 2)))
    return coef, resid, (float(np.min(s)), float(np.max(s)))


def _fit_pair(origin, normal, pts_s, pts_u):
    """Common-tangent-frame quadratic fits of two vertex windows.

    Returns None when degenerate, else a dict with coefficients, residuals,
    spans, and the signed extremal separation M (oriented so the curvature
    gap is positive, hence M > 0 on the two-crossing side).
    """
    t_s = pts_s[-1] - pts_s[0]
    t_u = pts_u[-1] - pts_u[0]
    if np.dot(t_s, t_u) < 0:
        t_u = -t_u
    ns_, nu_ = np.linalg.norm(t_s), np.linalg.norm(t_u)
    if ns_ < 1e-13 or nu_ < 1e-13:
        return None
    tdir = t_s / ns_ + t_u / nu_
    tdir = tdir - np.dot(tdir, normal) * normal
    nt = np.linalg.norm(tdir)
    if nt < 1e-12:
        return None
    e1 = tdir / nt
    e2 = np.cross(normal, e1)
    fs, rs, span_s = _fit_quadratic(origin, e1, e2, pts_s)
    fu, ru, span_u = _fit_quadratic(origin, e1, e2, pts_u)
    if fu[2] - fs[2] < 0:
        e2 = -e2
        fs, fu = -fs, -fu
    dc = fu[2] - fs[2]
    da, db = fu[0] - fs[0], fu[1] - fs[1]
    separation = float(db * db / (4.0 * dc) - da) if abs(dc) > 1e-300 else np.nan
    # angle between the parabolas where they actually meet: zero on the
    # tangent/no-crossing side, atan(sqrt(4 dc M)) at transversal crossings
    touch_angle = float(np.arctan(np.sqrt(4.0 * dc * max(separation, 0.0)))) \
        if np.isfinite(separation) else np.nan
    return {
        "fs": fs,
        "fu": fu,
        "rs": rs,
        "ru": ru,
        "span_s": span_s,
        "span_u": span_u,
        "e1": e1,
        "e2": e2,
        "dc": float(dc),
        "s_star": float(-db / (2.0 * dc)) if abs(dc) > 1e-300 else np.nan,
        "M": separation,
        "angle": touch_angle,
    }


def detect_tangencies(
    ws: ManifoldArc,
    wu: ManifoldArc,
    angle_tol: float = None,
    Delta: float = None,
    *,
    near: float = 0.005,
    window: int = None,
    residual_tol: float = None,
    collect_rejects: bool = False,
    focus: tuple = None,
) -> list:
    """Quadratic tangency candidates between a stable and an unstable arc.

    Near-parallel crossings and close approaches are fitted by quadratics
    z = a + b s + c s^2 in the common-tangent frame; an event is kept only
    if the curvature gap |c_u - c_s| exceeds Delta and both fit residuals
    stay below the tolerance (window shrunk once, then discarded).

    The signed separation is the extremal gap between the two fitted
    parabolas, oriented so that the two-transversal-crossings side is
    positive; it vanishes at the tangency.
    """
    angle_tol = DEFAULTS["angle_tol"] if angle_tol is None else angle_tol
    Delta = DEFAULTS["curvature_gap"] if Delta is None else Delta
    window = DEFAULTS["fit_window"] if window is None else window
    residual_tol = DEFAULTS["fit_residual_tol"] if residual_tol is None else residual_tol

    cands = find_intersections(ws, wu, near=near)
    cands = [c for c in cands if c["angle"] < angle_tol]
    if focus is not None:
        loc, radius = np.asarray(focus[0]), focus[1]
        cands = [c for c in cands if np.linalg.norm(c["point"] - loc) < radius]
    # cluster by location so one fold yields one event
    events, rejects = [], []
    used = np.zeros(len(cands), dtype=bool)
    order = np.argsort([c["chart_distance"] for c in cands])
    for oi in order:
        if used[oi]:
            continue
        c = cands[oi]
        for oj in range(len(cands)):
            if not used[oj] and np.linalg.norm(cands[oj]["point"] - c["point"]) < 0.02:
                used[oj] = True
        ev = _fit_tangency(ws, wu, c, window, residual_tol, Delta)
        if isinstance(ev, TangencyEvent):
            events.append(ev)
        elif collect_rejects:
            rejects.append(ev)
    if collect_rejects:
        return events, rejects
    return events


def _window_params(arc: ManifoldArc, seg: int, half_span: float, n: int):
    """n parameter values spanning +/- half_span in polyline arclength around
    the middle of segment seg, mapped to tau by local linear interpolation."""
    tau_mid = 0.5 * (arc.params[seg] + arc.params[seg + 1])
    # local dtau/dlength from neighboring segments
    lo = max(0, seg - 2)
    hi = min(len(arc.params) - 1, seg + 3)
    length = np.sum(np.linalg.norm(np.diff(arc.vertices[lo : hi + 1], axis=0), axis=-1))
    dtau = (arc.params[hi] - arc.params[lo]) / max(length, 1e-300)
    return tau_mid + np.linspace(-half_span, half_span, n) * dtau


def _fit_tangency(ws, wu, cand, window, residual_tol, Delta):
    i, j = cand["segments"]
    origin, ok = project_to_level_safe(cand["point"], ws.owner.V)
    if not ok:
        return {"reason": "singular_origin", "candidate": cand}
    try:
        frame = tangent_frame(origin)
    except SingularGradient:
        return {"reason": "singular_origin", "candidate": cand}

    # window span shrinks geometrically until the quadratic model is clean
    span0 = 2.0 * max(
        np.linalg.norm(ws.vertices[i + 1] - ws.vertices[i]),
        np.linalg.norm(wu.vertices[j + 1] - wu.vertices[j]),
    )
    fit = None
    half = span0
    for shrink in range(26):
        half = span0 * 0.5 ** shrink
        if half < 1e-7:
            break
        taus_s = _window_params(ws, i, half, window)
        taus_u = _window_params(wu, j, half, window)
        pts_s = ws.evaluate(taus_s)
        pts_u = wu.evaluate(taus_u)
        trial = _fit_pair(origin, frame.normal, pts_s, pts_u)
        if trial is None:
            return {"reason": "degenerate_tangent", "candidate": cand}
        fit = trial
        if fit["rs"] < residual_tol and fit["ru"] < residual_tol:
            break
    if fit is None or fit["rs"] >= residual_tol or fit["ru"] >= residual_tol:
        return {
            "reason": "poor_fit",
            "residuals": (fit["rs"], fit["ru"]) if fit else None,
            "candidate": cand,
        }
    if abs(fit["dc"]) <= Delta:
        return {"reason": "curvature_gap", "gap": abs(fit["dc"]), "candidate": cand}
    fs, fu = fit["fs"], fit["fu"]
    return TangencyEvent(
        V=ws.owner.V,
        location=cand["point"],
        stable_arc=ws,
        unstable_arc=wu,
        crossing_angle=fit["angle"],
        quad_coeffs={"c_s": float(fs[2]), "c_u": float(fu[2])},
        separation=fit["M"],
        diagnostics={
            "fit_residual_s": fit["rs"],
            "fit_residual_u": fit["ru"],
            "extremum_s": fit["s_star"],
            "span_s": fit["span_s"],
            "span_u": fit["span_u"],
            "b_s": float(fs[1]),
            "b_u": float(fu[1]),
            "a_s": float(fs[0]),
            "a_u": float(fu[0]),
            "tau_s": cand["params"][0],
            "tau_u": cand["params"][1],
            "window_halfspan": half,
        },
    )


def _follow_fold(builder: _ArcBuilder, ev: "TangencyEvent", V_lo: float, V_hi: float,
                 max_step: float = 0.01):
    """Continue a fold in V until its signed separation changes sign.

    Returns (Va, Vb, ev, tau_s, tau_u) bracketing the zero, or None when the
    fold is lost or leaves the interval without a sign change.
    """
    tracker = _FoldTracker(builder, ev.diagnostics["tau_s"], ev.diagnostics["tau_u"])
    V0 = ev.V
    f0 = tracker.fit(V0)
    if f0 is None:
        return None
    M0 = f0["M"]
    h = max_step / 8.0
    slope = None
    for direction in (-1.0, 1.0):
        probe_V = np.clip(V0 + direction * h, V_lo, V_hi)
        if probe_V == V0:
            continue
        trial = _FoldTracker(builder, tracker.tau_s, tracker.tau_u)
        fp = trial.fit(float(probe_V))
        if fp is None:
            continue
        if fp["M"] * M0 < 0.0:
            return (V0, float(probe_V), ev, trial.tau_s, trial.tau_u)
        sl = (fp["M"] - M0) / (probe_V - V0)
        if slope is None or abs(sl) > abs(slope):
            slope = sl
    if slope is None or slope == 0.0:
        return None
    V, M = V0, M0
    direction = -np.sign(M / slope)   # walk downhill in |M|
    for _ in range(80):
        step = min(max_step, 0.7 * abs(M / slope)) if slope != 0.0 else max_step
        step = max(step, 1e-9)
        V_next = float(np.clip(V + direction * step, V_lo, V_hi))
        if V_next == V:
            return None
        fnx = tracker.fit(V_next)
        if fnx is None:
            if step <= 1e-8:
                return None
            max_step = step / 2.0
            continue
        if fnx["M"] * M < 0.0:
            return (V, V_next, ev, tracker.tau_s, tracker.tau_u)
        if V_next != V:
            slope = (fnx["M"] - M) / (V_next - V)
        V, M = V_next, fnx["M"]
        if V in (V_lo, V_hi):
            return None
    return None


def _match_event(events: list, loc, radius: float):
    best = None
    for ev in events:
        d = float(np.linalg.norm(np.asarray(ev.location) - loc))
        if d < radius and (best is None or d < best[0]):
            best = (d, ev)
    return best[1] if best else None


def _local_crossings(ws, wu, loc, radius: float) -> int:
    return sum(
        1
        for c in find_intersections(ws, wu)
        if c["crossing"] and np.linalg.norm(c["point"] - loc) < radius
    )


class _ArcBuilder:
    """Rebuilds (W^s, W^u) of a continued periodic orbit at any V (cached)."""

    def __init__(self, period, guess, arclength, tol, max_segment, max_vertices):
        self.period = period
        self.guess = np.asarray(guess, dtype=float)
        self.arclength = arclength
        self.tol = tol
        self.max_segment = max_segment
        self.max_vertices = max_vertices
        self._cache = {}
        self._grower_cache = {}

    def orbit(self, V: float) -> PeriodicOrbit:
        from .periodic import find_periodic

        return find_periodic(V, self.period, self.guess)

    def evaluators(self, V: float):
        """(stable_eval, unstable_eval) local evaluators at level V."""
        if V not in self._grower_cache:
            po = self.orbit(V)
            g_u = _Grower(po, DEFAULTS["manifold_seed_distance"])
            g_rev = _Grower(reversed_orbit(po), DEFAULTS["manifold_seed_distance"])
            if len(self._grower_cache) > 16:
                self._grower_cache.clear()
            self._grower_cache[V] = (
                lambda taus: sigma_map(g_rev.evaluate(np.asarray(taus, dtype=float))),
                lambda taus: g_u.evaluate(np.asarray(taus, dtype=float)),
            )
        return self._grower_cache[V]

    def __call__(self, V: float):
        if V not in self._cache:
            po = self.orbit(V)
            kw = dict(
                tol=self.tol,
                max_segment=self.max_segment,
                max_vertices=self.max_vertices,
                on_singularity="truncate",
            )
            wu = grow_manifold(po, "Unstable", self.arclength, **kw)
            ws = grow_manifold(po, "Stable", self.arclength, **kw)
            if len(self._cache) > 4:
                self._cache.clear()
            self._cache[V] = (ws, wu)
        return self._cache[V]


def _taus_spanning(eval_fn, tau: float, half_len: float, n: int):
    """Parameters around tau whose points span +/- half_len of arclength."""
    eps = 1e-4 * abs(tau)
    probe = eval_fn(np.array([tau - eps, tau + eps]))
    dlen = np.linalg.norm(probe[1] - probe[0])
    slope = 2.0 * eps / max(dlen, 1e-300)          # dtau per unit length
    return tau + np.linspace(-half_len, half_len, n) * slope


class _FoldTracker:
    """Follows one manifold fold across V, reporting its signed separation.

    Keeps the fold's (tau_s, tau_u) addresses up to date by locating the
    closest approach of small local windows, then fits the quadratic pair
    with shrinking spans.
    """

    def __init__(self, builder: _ArcBuilder, tau_s: float, tau_u: float,
                 half_len: float = 0.08, n: int = 61, residual_tol: float = None):
        self.builder = builder
        self.tau_s = tau_s
        self.tau_u = tau_u
        self.half_len = half_len
        self.n = n
        self.residual_tol = (
            DEFAULTS["fit_residual_tol"] if residual_tol is None else residual_tol
        )
        self._last_half = None  # good fit span from the previous call

    def fit(self, V: float):
        """Local quadratic-pair fit at level V, or None if the fold is lost."""
        ev_s, ev_u = self.builder.evaluators(V)
        taus_s = _taus_spanning(ev_s, self.tau_s, self.half_len, self.n)
        taus_u = _taus_spanning(ev_u, self.tau_u, self.half_len, self.n)
        pts_s = ev_s(taus_s)
        pts_u = ev_u(taus_u)
        d2 = np.sum((pts_s[:, None, :] - pts_u[None, :, :]) ** 2, axis=-1)
        i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
        if min(i, j) == 0 or i == len(taus_s) - 1 or j == len(taus_u) - 1:
            return None  # closest approach ran off the window
        self.tau_s = float(taus_s[i])
        self.tau_u = float(taus_u[j])
        origin, ok = project_to_level_safe(0.5 * (pts_s[i] + pts_u[j]), V)
        if not ok:
            return None
        try:
            frame = tangent_frame(origin)
        except SingularGradient:
            return None
        fit = None
        start = self.half_len if self._last_half is None else min(
            self.half_len, 4.0 * self._last_half
        )
        half = start
        while half >= 1e-7:
            w_s = ev_s(_taus_spanning(ev_s, self.tau_s, half, 21))
            w_u = ev_u(_taus_spanning(ev_u, self.tau_u, half, 21))
            trial = _fit_pair(origin, frame.normal, w_s, w_u)
            if trial is None:
                return None
            fit = trial
            if fit["rs"] < self.residual_tol and fit["ru"] < self.residual_tol:
                break
            half *= 0.5
        if fit is None or fit["rs"] >= self.residual_tol or fit["ru"] >= self.residual_tol:
            return None
        self._last_half = half
        fit["origin"] = origin
        fit["fit_span"] = half
        return fit


def _window_arc(builder: _ArcBuilder, V: float, side: str, tau: float,
                half_len: float, n: int = 201) -> ManifoldArc:
    """Small single-window arc around a fold, for local crossing counts."""
    ev_s, ev_u = builder.evaluators(V)
    ev = ev_s if side == "Stable" else ev_u
    taus = _taus_spanning(ev, tau, half_len, n)
    pts = ev(taus)
    po = builder.orbit(V)
    return ManifoldArc(
        owner=po,
        side=side,
        vertices=pts,
        params=taus,
        arclength=float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=-1))),
        refinement_tol=np.inf,
        multiplier=0.0,
        direction=np.zeros(3),
        metadata={"window": True, "tau_center": tau},
        _evaluator=ev,
    )


def unfolding_speed(
    event: TangencyEvent,
    dV: float = 5e-4,
    *,
    builder=None,
    half_len: float = 0.08,
) -> float:
    """Central-difference rate dM/dV of the fold's signed separation.

    Re-evaluates both manifolds locally at V +/- dV (continuing the owner
    orbit), re-locates the fold, and differences the extremal separations.
    The sign convention keeps M = 0 at the tangency and M > 0 on the
    two-crossing side.
    """
    if builder is None:
        po = event.stable_arc.owner
        builder = _ArcBuilder(
            period=po.period,
            guess=po.points[0],
            arclength=max(event.stable_arc.arclength, event.unstable_arc.arclength),
            tol=event.stable_arc.refinement_tol,
            max_segment=0.05,
            max_vertices=500_000,
        )
    tau_s = event.diagnostics["tau_s"]
    tau_u = event.diagnostics["tau_u"]
    Ms = []
    for V in (event.V - dV, event.V + dV):
        tracker = _FoldTracker(builder, tau_s, tau_u, half_len=half_len)
        fit = tracker.fit(V)
        if fit is None:
            raise BranchLost(f"fold lost at V={V} while measuring unfolding speed")
        Ms.append(fit["M"])
    speed = float((Ms[1] - Ms[0]) / (2.0 * dV))
    event.unfolding_speed = speed
    event.diagnostics["M_minus"] = Ms[0]
    event.diagnostics["M_plus"] = Ms[1]
    return speed


def tangency_hunt(
    V_lo: float,
    V_hi: float,
    period: int = 2,
    seeds=None,
    *,
    grid: int = 8,
    arclength: float = 64.0,
    angle_tol: float = None,
    Delta: float = None,
    hunt_angle_tol: float = 0.6,
    near: float = 0.02,
    match_radius: float = 0.1,
    tol: float = 0.03,
    max_segment: float = 0.05,
    max_vertices: int = 500_000,
    bisect_tol: float = 1e-12,
    max_events: int = 2,
    dV_speed: float = 5e-4,
) -> list:
    """Locate quadratic homoclinic tangencies in a V interval.

    For a V grid, continues the seed orbits, grows both manifolds, and
    records the fold candidates (signed separation M of near-parallel
    close approaches).  Folds whose M changes sign between adjacent grid
    values bracket a tangency; the bracket is narrowed by bisection in V,
    then validated with strict tolerances and an unfolding-speed estimate.
    Returns the validated TangencyEvents (empty list plus diagnostics on
    the events' absence is a legitimate outcome).
    """
    if not (-1.0 < V_lo < V_hi < 0.0):
        raise ValueError("need -1 < V_lo < V_hi < 0")
    angle_tol = DEFAULTS["angle_tol"] if angle_tol is None else angle_tol
    Delta = DEFAULTS["curvature_gap"] if Delta is None else Delta

    if seeds is None:
        from .periodic import period_two_point_at_level

        seeds = [period_two_point_at_level(0.5 * (V_lo + V_hi))]

    events_out = []
    for seed in seeds:
        if len(events_out) >= max_events:
            break
        builder = _ArcBuilder(period, seed, arclength, tol, max_segment, max_vertices)
        Vs = np.linspace(V_hi, V_lo, grid)

        # phase 1: collect candidate folds (smallest-angle crossings) per grid V
        folds = []
        for V in Vs:
            try:
                ws, wu = builder(float(V))
            except Exception:
                continue
            cross = [
                c for c in find_intersections(ws, wu)
                if c["crossing"] and c["angle"] < hunt_angle_tol
            ]
            cross.sort(key=lambda c: c["angle"])
            picked = []
            for c in cross:
                if any(np.linalg.norm(c["point"] - p["point"]) < 0.05 for p in picked):
                    continue
                picked.append(c)
                if len(picked) >= 4:
                    break
            for c in picked:
                ev = _fit_tangency(ws, wu, c, DEFAULTS["fit_window"],
                                   DEFAULTS["fit_residual_tol"], 0.0)
                if isinstance(ev, TangencyEvent):
                    folds.append(ev)

        # dedupe folds by location, treating sigma mirror images as the same
        unique = []
        for ev in sorted(folds, key=lambda e: e.crossing_angle):
            loc = np.asarray(ev.location)
            mirror = sigma_map(loc)
            if any(
                min(np.linalg.norm(loc - np.asarray(u.location)),
                    np.linalg.norm(mirror - np.asarray(u.location))) < 0.05
                and abs(ev.V - u.V) < 1e-12
                for u in unique
            ):
                continue
            unique.append(ev)

        # phase 2: follow each fold's separation toward zero (secant steps)
        brackets = []
        for ev in unique[:12]:
            br = _follow_fold(builder, ev, V_lo, V_hi)
            if br is not None:
                brackets.append(br)
            if len(brackets) >= 2 * max_events:
                break

        for Va, Vb, seed_ev, tau_s0, tau_u0 in brackets:
            if len(events_out) >= max_events:
                break
            tracker = _FoldTracker(builder, tau_s0, tau_u0)
            fa = tracker.fit(Va)
            fb = tracker.fit(Vb)
            if fa is None or fb is None or fa["M"] * fb["M"] >= 0.0:
                continue
            # the touch angle scales like sqrt(4 dc M): push M well below
            # the value at which it would reach angle_tol
            m_target = np.tan(angle_tol) ** 2 / (16.0 * max(abs(fa["dc"]), 1e-6))
            lo_V, hi_V, lo_M = Va, Vb, fa["M"]
            fit_star, V_star = None, None
            for _ in range(80):
                if abs(hi_V - lo_V) < bisect_tol * max(1.0, abs(lo_V)):
                    break
                mid = 0.5 * (lo_V + hi_V)
                fm = tracker.fit(mid)
                if fm is None:
                    break
                if abs(fm["M"]) < m_target:
                    fit_star, V_star = fm, mid
                    break
                if fm["M"] * lo_M > 0.0:
                    lo_V, lo_M = mid, fm["M"]
                else:
                    hi_V = mid
            if fit_star is None:
                V_star = 0.5 * (lo_V + hi_V)
                fit_star = tracker.fit(V_star)
            if fit_star is None:
                continue
            fs, fu = fit_star["fs"], fit_star["fu"]
            angle = fit_star["angle"]
            if abs(fit_star["dc"]) <= Delta or not angle < angle_tol:
                continue
            ws_w = _window_arc(builder, V_star, "Stable", tracker.tau_s, tracker.half_len)
            wu_w = _window_arc(builder, V_star, "Unstable", tracker.tau_u, tracker.half_len)
            event = TangencyEvent(
                V=V_star,
                location=fit_star["origin"],
                stable_arc=ws_w,
                unstable_arc=wu_w,
                crossing_angle=angle,
                quad_coeffs={"c_s": float(fs[2]), "c_u": float(fu[2])},
                separation=fit_star["M"],
                diagnostics={
                    "fit_residual_s": fit_star["rs"],
                    "fit_residual_u": fit_star["ru"],
                    "tau_s": tracker.tau_s,
                    "tau_u": tracker.tau_u,
                    "bracket": (lo_V, hi_V),
                    "window_halfspan": tracker.half_len,
                },
            )
            try:
                unfolding_speed(event, dV_speed, builder=builder)
            except BranchLost:
                continue
            # transversal count changes by two across the event
            counts = {}
            for tag, V_side in (("below", V_star - dV_speed), ("above", V_star + dV_speed)):
                aw = _window_arc(builder, V_side, "Stable", tracker.tau_s, tracker.half_len)
                bw = _window_arc(builder, V_side, "Unstable", tracker.tau_u, tracker.half_len)
                counts[tag] = sum(
                    1 for c in find_intersections(aw, bw) if c["crossing"]
                )
            event.diagnostics["crossings_below"] = counts["below"]
            event.diagnostics["crossings_above"] = counts["above"]
            events_out.append(event)
    return events_out


def tangent_graph_intersection_check(g, u, v, interval=None) -> bool:
    """Whether two convex graphs tangent to a common flat graph must intersect.

    g, u, v are quadratic coefficient triples (a, b, c) over a shared
    abscissa.  With |g''| below half the gap and u'', v'' above it, the
    graphs of u and v intersect over the interval spanned by the two
    tangency points; this is used as a self-consistency check on fits (two
    distinct unstable manifolds predicted to cross flags bad data).
    """
    g = np.asarray(g, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if interval is None:
        spans = []
        for f in (u, v):
            dc = f[2] - g[2]
            if abs(dc) < 1e-15:
                return False
            spans.append(-(f[1] - g[1]) / (2.0 * dc))
        alpha, beta = min(spans), max(spans)
    else:
        alpha, beta = min(interval), max(interval)
    if beta - alpha < 1e-15:
        return True  # degenerate: shared tangency point
    d = u - v
    roots = np.roots([d[2], d[1], d[0]]) if abs(d[2]) > 1e-15 else (
        np.array([-d[0] / d[1]]) if abs(d[1]) > 1e-15 else np.array([])
    )
    for r in np.atleast_1d(roots):
        if abs(np.imag(r)) < 1e-12 and alpha - 1e-12 <= np.real(r) <= beta + 1e-12:
            return True
    return False
