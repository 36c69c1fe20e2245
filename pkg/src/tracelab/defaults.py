"""Versioned defaults table.

Every pipeline pulls its tolerances and sweep parameters from this single
table so that artifacts can embed the exact configuration they were produced
with.  Override per call or per CLI flag; never edit in place at runtime.
"""

from __future__ import annotations

DEFAULTS_VERSION = "1"

DEFAULTS = {
    # surface / projection
    "gradient_floor": 1e-8,        # ||grad I|| below this is a singularity
    "projection_tol": 1e-14,       # |I - V| after Newton projection
    "projection_max_iter": 50,
    "surface_membership_tol": 1e-10,
    # orbits
    "reprojection_interval": 16,
    "chaos_threshold": 0.01,       # Lyapunov per iterate, n = 1e4 calibration
    "chaos_iterations": 10_000,
    "chaos_resolution": 100,
    "poincare_seeds": 200,
    "poincare_iterations": 20_000,
    "escape_box": 2.0,             # marks 'escaped'
    "guard_box": 10.0,             # raises EscapedDomain
    # periodic orbits
    "newton_step_tol": 1e-12,
    "newton_max_iter": 50,
    "newton_condition_limit": 1e12,
    "parabolic_tol": 1e-8,
    "continuation_step_floor": 1e-6,
    "doubling_probe_eps": 1e-4,
    # manifolds
    "manifold_seed_distance": 1e-6,   # …to 1e-5 for the fundamental segment
    "manifold_turning_tol": 0.05,     # radians between consecutive segments
    "angle_tol": 1e-3,                # tangency candidate angle, radians
    "curvature_gap": 0.05,            # Delta: |c_u - c_s| must exceed this
    "fit_window": 21,                 # vertices per quadratic fit
    "fit_residual_tol": 1e-8,
    "singularity_guard": 1e-3,        # ball radius around conic singularities
    "surface_margin": 1e-3,           # arc truncation box margin at V near 0
    # torus horseshoe
    "avoidance_depth": 14,
    "gap_mass_stabilization": 0.01,   # DepthTooShallow heuristic
    # cantor
    "min_gap": 1e-12,
    "boundary_product_tol": 1e-9,     # tau1*tau2 == 1 boundary flag
    # service
    "orbit_request_cap": 1_000_000,
    "transport_point_cap": 50_000,
    "chaos_resolution_cap": 256,
    "chaos_iteration_cap": 5_000,
}


def resolved(overrides: dict | None = None) -> dict:
    """Copy of the defaults table with overrides applied, plus version stamp."""
    table = dict(DEFAULTS)
    if overrides:
        unknown = set(overrides) - set(table)
        if unknown:
            raise KeyError(f"unknown default keys: {sorted(unknown)}")
        table.update(overrides)
    table["defaults_version"] = DEFAULTS_VERSION
    return table
