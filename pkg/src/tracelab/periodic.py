"""Periodic orbits of the trace map: constrained Newton location, monodromy
and stability, continuation in V, and seeding from rationals of the torus
automorphism.

The Newton solve works in the 2-D tangent chart of the current iterate, so
the invariant constraint I = V is enforced by re-projection rather than by a
third equation.  The monodromy of a period-n orbit always has the left
eigenvector grad I with eigenvalue 1 (a consequence of I o T = I) except at
the conic corners of the Cayley cubic, where grad I = 0 and the transversal
eigenvalue is -1; both cases are handled below.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .defaults import DEFAULTS
from .errors import (
    AmbiguousNeutral,
    BranchLost,
    NearSingularSeed,
    NoConvergence,
    PoleAtHalf,
    SingularGradient,
    SingularJacobian,
)
from .maps import (
    anosov_step,
    factor_map,
    invariant,
    invariant_gradient,
    jacobian,
    trace_map,
)
from .surface import project_to_level, singular_points, tangent_frame


class Stability(enum.Enum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"
    REFLECTION_HYPERBOLIC = "ReflectionHyperbolic"
    PARABOLIC = "Parabolic"


@dataclass
class PeriodicOrbit:
    V: float
    period: int
    points: np.ndarray              # (period, 3)
    monodromy: np.ndarray           # (3, 3)
    residual_trace: float           # trace of the product-(+1) surface pair
    stability: Stability
    newton_residual: float
    raw_pair: tuple = None          # surface pair of the monodromy itself
    doubled: bool = False           # classified through the squared pair
    lower_period: int | None = None # set when a divisor period was hit
    singular: bool = False          # orbit passes through a conic corner

    def to_json_dict(self) -> dict:
        return {
            "V": self.V,
            "period": self.period,
            "points": self.points.tolist(),
            "trace": self.residual_trace,
            "stability": self.stability.value,
            "residual": self.newton_residual,
            "lower_period": self.lower_period,
        }


@dataclass
class BranchEvent:
    V: float
    kind: str  # EllipticTransition | PeriodDoubling | Fold | LostConvergence


@dataclass
class ContinuationBranch:
    orbits: list
    events: list = field(default_factory=list)


def period_two_curve(x: float) -> np.ndarray:
    """The curve of period-two points, rho(x) = (x, x/(2x-1), x); rho(1) = (1,1,1).

    Lies in the plane x = z.  Pole at x = 1/2.
    """
    if abs(x - 0.5) < 1e-12:
        raise PoleAtHalf("period-two curve has a pole at x = 1/2")
    return np.array([x, x / (2.0 * x - 1.0), x])


def period_two_level(x: float) -> float:
    """Invariant value along the period-two curve."""
    return float(invariant(period_two_curve(x)))


def period_two_point_at_level(V: float) -> np.ndarray:
    """The period-two point of the compact component at level V in (-1, 0].

    Inverts V = I(rho(x)) on the branch x in [0, (sqrt(5)-1)/4] by bisection;
    at V = 0 this is x = cos(2 pi / 5).
    """
    if not -1.0 <= V <= 0.0:
        raise ValueError("compact-component period-two point needs V in [-1, 0]")
    lo, hi = 0.0, (np.sqrt(5.0) - 1.0) / 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if period_two_level(mid) < V:
            lo = mid
        else:
            hi = mid
    return period_two_curve(0.5 * (lo + hi))


def orbit_points(p, period: int) -> np.ndarray:
    pts = np.empty((period, 3))
    pts[0] = p
    for i in range(1, period):
        pts[i] = trace_map(pts[i - 1])
    return pts


def monodromy_at(points: np.ndarray) -> np.ndarray:
    """Product of the per-step Jacobians around the orbit."""
    M = np.eye(3)
    for p in points:
        M = jacobian(p) @ M
    return M


def find_periodic(
    V: float,
    period: int,
    guess,
    *,
    max_iter: int = None,
    step_tol: float = None,
) -> PeriodicOrbit:
    """Newton in the 2-D tangent chart for a period-n point of T on S_V.

    Each step solves (U^T M U - I) d = -U^T (T^n(p) - p) in the frame U at
    the current iterate and re-projects p + U d onto S_V.  Converged when
    the chart step drops below 1e-12.  Near a conic corner the frame cannot
    be built; the point is accepted if the closure residual is already below
    1e-8 (the corners are genuine periodic points).
    """
    max_iter = DEFAULTS["newton_max_iter"] if max_iter is None else max_iter
    step_tol = DEFAULTS["newton_step_tol"] if step_tol is None else step_tol

    p = np.asarray(guess, dtype=float)
    if abs(float(invariant(p)) - V) > 1e-10:
        try:
            p = project_to_level(p, V)
        except (NoConvergence, SingularGradient):
            # Degenerate tube (e.g. the point component at V = -1): solve the
            # stacked system (T^n - id, I - V) by Gauss-Newton instead.
            return _gauss_newton_periodic(V, period, p, max_iter, step_tol)

    prev_res = np.inf
    increases = 0
    converged = False
    for _ in range(max_iter):
        q = p.copy()
        M = np.eye(3)
        for _ in range(period):
            M = jacobian(q) @ M
            q = trace_map(q)
        r3 = q - p
        res = float(np.linalg.norm(r3))
        try:
            frame = tangent_frame(p)
        except SingularGradient:
            if res < 1e-8:
                converged = True
                break
            raise
        U = np.stack([frame.u1, frame.u2], axis=-1)      # (3, 2)
        J2 = U.T @ M @ U - np.eye(2)
        cond = np.linalg.cond(J2)
        if not np.isfinite(cond) or cond > DEFAULTS["newton_condition_limit"]:
            raise SingularJacobian(f"chart Newton matrix condition {cond:.3e}")
        F = U.T @ r3
        d = np.linalg.solve(J2, -F)
        if res > prev_res:
            increases += 1
        else:
            increases = 0
        if increases >= 2:
            d = 0.5 * d
        prev_res = res
        step = float(np.linalg.norm(d))
        p_new = p + U @ d
        if abs(float(invariant(p_new)) - V) > DEFAULTS["projection_tol"]:
            try:
                p_new = project_to_level(p_new, V)
            except SingularGradient:
                pass  # next pass re-checks closure at the corner
        p = p_new
        if step < step_tol:
            converged = True
            break
    if not converged:
        raise NoConvergence(
            f"period-{period} Newton at V={V} stalled with residual {prev_res:.3e}"
        )

    pts = orbit_points(p, period)
    residual = float(np.linalg.norm(trace_map(pts[-1]) - pts[0]))
    if residual > 1e-8:
        raise NoConvergence(
            f"chart Newton stalled at a spurious point, closure residual {residual:.3e}"
        )
    lower = None
    for d in range(1, period):
        if period % d == 0 and np.linalg.norm(orbit_points(p, d + 1)[-1] - p) < 1e-8:
            lower = d
            break
    M = monodromy_at(pts)
    singular = bool(np.linalg.norm(invariant_gradient(p)) <= DEFAULTS["gradient_floor"])
    stab, trace, raw_pair, doubled = _classify(M, pts[0], period)
    return PeriodicOrbit(
        V=V,
        period=period,
        points=pts,
        monodromy=M,
        residual_trace=trace,
        stability=stab,
        newton_residual=residual,
        raw_pair=raw_pair,
        doubled=doubled,
        lower_period=lower,
        singular=singular,
    )


def _gauss_newton_periodic(V, period, p, max_iter, step_tol) -> PeriodicOrbit:
    converged = False
    for _ in range(max_iter):
        q = p.copy()
        M = np.eye(3)
        for _ in range(period):
            M = jacobian(q) @ M
            q = trace_map(q)
        r = np.concatenate([q - p, [float(invariant(p)) - V]])
        J = np.vstack([M - np.eye(3), invariant_gradient(p)])
        d, *_ = np.linalg.lstsq(J, -r, rcond=None)
        p = p + d
        if np.linalg.norm(d) < step_tol:
            converged = True
            break
    if not converged:
        raise NoConvergence(f"stacked Gauss-Newton stalled, residual {np.linalg.norm(r):.3e}")
    pts = orbit_points(p, period)
    closure = float(np.linalg.norm(trace_map(pts[-1]) - pts[0]))
    level_err = abs(float(invariant(p)) - V)
    if closure > 1e-8 or level_err > 1e-8:
        raise NoConvergence(
            f"no periodic point: closure {closure:.3e}, level error {level_err:.3e}"
        )
    M = monodromy_at(pts)
    stab, trace, raw_pair, doubled = _classify(M, pts[0], period)
    return PeriodicOrbit(
        V=V,
        period=period,
        points=pts,
        monodromy=M,
        residual_trace=trace,
        stability=stab,
        newton_residual=float(np.linalg.norm(trace_map(pts[-1]) - pts[0])),
        raw_pair=raw_pair,
        doubled=doubled,
        lower_period=None,
        singular=bool(np.linalg.norm(invariant_gradient(pts[0])) <= DEFAULTS["gradient_floor"]),
    )


def monodromy_spectrum(po: PeriodicOrbit) -> dict:
    """Split the monodromy spectrum into the neutral eigenpair and the surface pair.

    The neutral eigenvalue is the one closest to 1 whose left eigenvector
    aligns with grad I (alignment > 0.99).  At a conic corner grad I = 0 and
    the transversal direction carries eigenvalue -1 instead; there the real
    eigenvalue with |mu| nearest 1 is taken as neutral.
    """
    M = po.monodromy
    evals, lvecs = np.linalg.eig(M.T)  # columns: left eigenvectors of M
    g = invariant_gradient(po.points[0])
    gnorm = np.linalg.norm(g)

    if gnorm > DEFAULTS["gradient_floor"]:
        gn = g / gnorm
        align = np.zeros(3)
        for i in range(3):
            v = lvecs[:, i]
            nv = np.linalg.norm(v)
            if nv > 0:
                align[i] = abs(np.real(np.vdot(v, gn))) / nv
        order = np.argsort(np.abs(evals - 1.0))
        aligned = [i for i in order if align[i] > 0.99]
        if not aligned:
            raise AmbiguousNeutral(
                f"no eigenvalue aligns with grad I (alignments {align})"
            )
        near_one = [i for i in range(3) if abs(evals[i] - 1.0) < 1e-6 and align[i] > 0.99]
        if len(near_one) > 1:
            raise AmbiguousNeutral(
                f"two eigenvalues within 1e-6 of 1 both align: {evals[near_one]}"
            )
        neutral_idx = aligned[0]
    else:
        real_idx = [i for i in range(3) if abs(np.imag(evals[i])) < 1e-9]
        neutral_idx = min(real_idx, key=lambda i: abs(abs(evals[i]) - 1.0))

    pair = tuple(evals[i] for i in range(3) if i != neutral_idx)
    return {
        "neutral": (evals[neutral_idx], lvecs[:, neutral_idx]),
        "surface_pair": pair,
        "pair_product": pair[0] * pair[1],
        "singular": gnorm <= DEFAULTS["gradient_floor"],
    }


def _classify(M: np.ndarray, point: np.ndarray, period: int):
    """Stability from the surface pair, squaring it when its product is -1."""
    dummy = PeriodicOrbit(
        V=float(invariant(point)), period=period, points=np.array([point]),
        monodromy=M, residual_trace=0.0, stability=Stability.PARABOLIC,
        newton_residual=0.0,
    )
    spec = monodromy_spectrum(dummy)
    pair = spec["surface_pair"]
    raw_pair = pair
    doubled = False
    if np.real(spec["pair_product"]) < 0.0:
        pair = (pair[0] ** 2, pair[1] ** 2)
        doubled = True
    t = float(np.real(pair[0] + pair[1]))
    tol = DEFAULTS["parabolic_tol"]
    if abs(t - 2.0) < tol or abs(t + 2.0) < tol:
        stab = Stability.PARABOLIC
    elif abs(t) < 2.0:
        stab = Stability.ELLIPTIC
    elif t > 2.0:
        stab = Stability.HYPERBOLIC
    else:
        stab = Stability.REFLECTION_HYPERBOLIC
    return stab, t, raw_pair, doubled


def classify_stability(po: PeriodicOrbit) -> Stability:
    """Stability class of the orbit (re-derived from its monodromy)."""
    stab, _, _, _ = _classify(po.monodromy, po.points[0], po.period)
    return stab


def continue_in_V(
    po: PeriodicOrbit,
    V_target: float,
    max_step: float = 0.01,
    *,
    detect_doubling: bool = True,
) -> ContinuationBranch:
    """Predictor-corrector continuation of a periodic orbit in V.

    Steps adaptively (halving on Newton failure, floor 1e-6); records an
    EllipticTransition whenever the surface trace crosses +/-2 and a
    PeriodDoubling when a crossing of -2 has a doubled-period orbit nearby.
    A branch that cannot be continued ends with a BranchLost-kind event
    rather than an exception.
    """
    branch = ContinuationBranch(orbits=[po])
    if V_target == po.V:
        return branch
    direction = np.sign(V_target - po.V)
    floor = DEFAULTS["continuation_step_floor"]
    step = max_step
    current = po
    while np.sign(V_target - current.V) == direction:
        V_next = current.V + direction * min(step, abs(V_target - current.V))
        try:
            nxt = find_periodic(current.V + (V_next - current.V), current.period,
                                current.points[0])
        except (NoConvergence, SingularJacobian, SingularGradient):
            if step <= floor:
                kind = "Fold" if abs(abs(current.residual_trace) - 2.0) < 0.05 else "LostConvergence"
                branch.events.append(BranchEvent(V=current.V, kind=kind))
                return branch
            step = max(step / 2.0, floor)
            continue
        _record_transitions(branch, current, nxt, detect_doubling)
        branch.orbits.append(nxt)
        current = nxt
        step = min(step * 1.5, max_step)
        if abs(current.V - V_target) <= 1e-15:
            break
    return branch


def _record_transitions(branch, a: PeriodicOrbit, b: PeriodicOrbit, detect_doubling: bool):
    for crossing in (2.0, -2.0):
        if (a.residual_trace - crossing) * (b.residual_trace - crossing) < 0.0:
            V_cross = _refine_crossing(a, b, crossing)
            branch.events.append(BranchEvent(V=V_cross, kind="EllipticTransition"))
            if crossing == -2.0 and detect_doubling:
                if _doubling_exists(a, b, V_cross):
                    branch.events.append(BranchEvent(V=V_cross, kind="PeriodDoubling"))


def _refine_crossing(a: PeriodicOrbit, b: PeriodicOrbit, crossing: float) -> float:
    lo, hi = a, b
    for _ in range(60):
        V_mid = 0.5 * (lo.V + hi.V)
        try:
            mid = find_periodic(V_mid, a.period, lo.points[0])
        except (NoConvergence, SingularJacobian, SingularGradient):
            break
        if abs(mid.residual_trace - crossing) < DEFAULTS["parabolic_tol"]:
            return mid.V
        if (lo.residual_trace - crossing) * (mid.residual_trace - crossing) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo.V + hi.V)


def _doubling_exists(a: PeriodicOrbit, b: PeriodicOrbit, V_cross: float) -> bool:
    """Probe for a period-doubled orbit just past the -2 crossing."""
    side = b if abs(b.residual_trace) < abs(a.residual_trace) else a
    eps = DEFAULTS["doubling_probe_eps"]
    pair_vecs = np.linalg.eig(side.monodromy)
    # eigenvector of the eigenvalue nearest -1 (the doubling direction)
    idx = int(np.argmin(np.abs(pair_vecs[0] + 1.0)))
    vec = np.real(pair_vecs[1][:, idx])
    nv = np.linalg.norm(vec)
    if nv == 0:
        return False
    vec = vec / nv
    for sign in (1.0, -1.0):
        try:
            dbl = find_periodic(side.V, 2 * side.period, side.points[0] + sign * eps * vec)
        except Exception:
            continue
        if dbl.lower_period is None and dbl.newton_residual < 1e-8:
            return True
    return False


def _anosov_period(a: int, b: int, q: int, max_period: int = 10_000):
    """Smallest m with A^m (a, b) = +/- (a, b) mod q; sign tells which."""
    x, y = a % q, b % q
    for m in range(1, max_period + 1):
        x, y = (x + y) % q, x
        if (x, y) == (a % q, b % q):
            return m, +1
        if (x, y) == ((-a) % q, (-b) % q):
            return m, -1
    raise NoConvergence(f"no torus period below {max_period}")


def seed_from_torus(t, V: float, *, max_step: float = 0.01) -> PeriodicOrbit:
    """Periodic orbit from a rational torus point: lift through the factor map,
    polish on the Cayley cubic, then continue to level V.

    t is a pair of fractions (p1/q, p2/q).  The trace-map period is the
    smallest m with A^m t = +/- t mod 1 (the factor map identifies t with -t).
    Raises NearSingularSeed when the lifted orbit passes within 1e-3 of a
    conic corner, where continuation is unreliable.
    """
    t = (Fraction(t[0]), Fraction(t[1]))
    q = np.lcm(t[0].denominator, t[1].denominator)
    a = int(t[0] * q) % q
    b = int(t[1] * q) % q
    if (a, b) == (0, 0):
        period = 1
    else:
        period, _ = _anosov_period(a, b, q)

    torus_orbit = np.empty((period, 2))
    x, y = a / q, b / q
    for i in range(period):
        torus_orbit[i] = (x, y)
        x, y = (x + y) % 1.0, x
    lifted = factor_map(torus_orbit)

    guard = DEFAULTS["singularity_guard"]
    exact_corner = all(
        any(np.linalg.norm(p - s) < 1e-12 for s in singular_points())
        for p in lifted
    )
    if not (exact_corner and V == 0.0):
        # exact corner cycles are genuine periodic orbits of the Cayley
        # cubic, but cannot be continued away from it and anything merely
        # near a corner is unreliable
        for s in singular_points():
            d = np.min(np.linalg.norm(lifted - s, axis=-1))
            if d < guard:
                raise NearSingularSeed(
                    f"lifted orbit passes within {d:.2e} of the corner {s.tolist()}"
                )

    po = find_periodic(0.0, period, lifted[0])
    if V == 0.0:
        return po
    branch = continue_in_V(po, V, max_step=max_step, detect_doubling=False)
    last = branch.orbits[-1]
    if abs(last.V - V) > 1e-12:
        raise BranchLost(
            f"continuation from V=0 stalled at V={last.V} (target {V})"
        )
    return last


def branch_to_jsonl(branch: ContinuationBranch, path) -> None:
    """One orbit per line plus a trailing events record."""
    import json

    with open(path, "w") as fh:
        for orb in branch.orbits:
            fh.write(json.dumps(orb.to_json_dict(), sort_keys=True) + "\n")
        fh.write(json.dumps(
            {"events": [{"V": e.V, "kind": e.kind} for e in branch.events]},
            sort_keys=True,
        ) + "\n")
