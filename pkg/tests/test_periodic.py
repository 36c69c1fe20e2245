from fractions import Fraction

import numpy as np
import pytest

from tracelab import maps, periodic
from tracelab.errors import NearSingularSeed, PoleAtHalf
from tracelab.periodic import Stability


class TestPeriodTwoCurve:
    def test_corner_value(self):
        assert np.array_equal(periodic.period_two_curve(1.0), [1.0, 1.0, 1.0])

    def test_reference_point(self):
        rho = periodic.period_two_curve(0.8)
        assert np.allclose(rho, [0.8, 4.0 / 3.0, 0.8], atol=1e-15)
        t2 = maps.trace_map(maps.trace_map(rho))
        assert np.linalg.norm(t2 - rho) < 1e-14

    def test_pole(self):
        with pytest.raises(PoleAtHalf):
            periodic.period_two_curve(0.5)

    def test_lies_in_diagonal_plane(self, rng):
        for x in rng.uniform(-2, 2, 50):
            if abs(x - 0.5) < 1e-3:
                continue
            rho = periodic.period_two_curve(x)
            assert rho[0] == rho[2]

    def test_closed_form_period_two_everywhere(self, rng):
        xs = np.concatenate([rng.uniform(-3, 0.45, 50), rng.uniform(0.55, 3, 50)])
        for x in xs:
            rho = periodic.period_two_curve(x)
            assert np.linalg.norm(maps.trace_map(maps.trace_map(rho)) - rho) < 1e-12


class TestFindPeriodic:
    def test_converges_to_corner_fixed_point(self, p1_orbit):
        assert np.allclose(p1_orbit.points[0], [1, 1, 1], atol=1e-9)
        assert p1_orbit.singular
        assert p1_orbit.stability == Stability.HYPERBOLIC

    def test_origin_elliptic_at_minus_one(self):
        po = periodic.find_periodic(-1.0, 1, [0.02, 0.01, -0.015])
        assert np.allclose(po.points[0], [0, 0, 0], atol=1e-12)
        assert po.stability == Stability.ELLIPTIC
        # surface pair on the unit circle (cube roots of -1)
        pair = np.array(po.raw_pair)
        assert np.max(np.abs(np.abs(pair) - 1.0)) < 1e-8

    def test_recovers_period_two_curve_point(self, rng):
        x0 = 0.8
        rho = periodic.period_two_curve(x0)
        V = periodic.period_two_level(x0)
        po = periodic.find_periodic(V, 2, rho + 1e-3 * rng.standard_normal(3))
        assert np.linalg.norm(po.points[0] - rho) < 1e-10

    def test_orbit_closure_invariant(self, period2_s0):
        pts = period2_s0.points
        assert np.linalg.norm(maps.trace_map(pts[0]) - pts[1]) < 1e-10
        assert np.linalg.norm(maps.trace_map(pts[1]) - pts[0]) < 1e-10

    def test_lower_period_reported(self):
        po = periodic.find_periodic(0.0, 4, [0.9, 0.9, 0.9])
        assert po.lower_period in (1, 2)  # a proper divisor of 4 was hit


class TestMonodromy:
    def test_left_eigenvector_identity(self, period2_s0, rng):
        # (DT^n)^T grad I = grad I at a periodic point (independent check)
        for po in (period2_s0,):
            g = maps.invariant_gradient(po.points[0])
            resid = np.linalg.norm(po.monodromy.T @ g - g) / np.linalg.norm(g)
            assert resid < 1e-8

    def test_determinant_parity(self, period2_s0, p1_orbit):
        for po in (period2_s0, p1_orbit):
            det = np.linalg.det(po.monodromy)
            assert abs(det - (-1.0) ** po.period) < 1e-8

    def test_spectrum_of_lifted_orbit(self, period2_s0):
        spec = periodic.monodromy_spectrum(period2_s0)
        pair = np.sort(np.abs(np.array(spec["surface_pair"])))
        lam = maps.GOLDEN
        assert abs(pair[1] - lam ** 2) / lam ** 2 < 0.01
        assert abs(pair[0] - lam ** -2) / lam ** -2 < 0.01
        assert abs(spec["pair_product"] - 1.0) < 1e-8

    def test_eigenvalue_product_is_determinant(self, period2_s0):
        spec = periodic.monodromy_spectrum(period2_s0)
        neutral = spec["neutral"][0]
        product = neutral * spec["pair_product"]
        assert abs(product - np.linalg.det(period2_s0.monodromy)) < 1e-8

    def test_corner_differential_eigenvalues(self):
        # raw differential at the fixed corner: {-1, lambda^2, lambda^-2}
        # (the rectified model differential has lambda in place of lambda^2;
        # the factor map is a double branched cover at the corner)
        ev = np.sort(np.linalg.eigvals(maps.jacobian([1.0, 1.0, 1.0])).real)
        lam = maps.GOLDEN
        assert np.allclose(ev, [-1.0, lam ** -2, lam ** 2], atol=1e-12)
        model = np.sort(np.diag(maps.P1_MODEL_DIFFERENTIAL))
        assert np.allclose(model, [-1.0, 1 / lam, lam], atol=0)


class TestClassification:
    def test_corner_fixed_point_trace_three(self, p1_orbit):
        # surface pair at the corner has product +1 already; t = 3 exactly
        assert abs(p1_orbit.residual_trace - 3.0) < 1e-8
        assert p1_orbit.stability == Stability.HYPERBOLIC

    def test_origin_unit_circle_elliptic(self):
        po = periodic.find_periodic(-1.0, 1, [0.01, -0.02, 0.01])
        assert abs(po.residual_trace) < 2.0
        assert classify_is(po, Stability.ELLIPTIC)

    def test_rotation_invariance_of_trace(self, period2_s0):
        rolled = np.roll(period2_s0.points, 1, axis=0)
        M = periodic.monodromy_at(rolled)
        stab, t, _, _ = periodic._classify(M, rolled[0], 2)
        assert abs(t - period2_s0.residual_trace) < 1e-8
        assert stab == period2_s0.stability

    def test_sigma_duality(self, period2_s0):
        # the sigma image, traversed backwards, is again a periodic orbit of
        # the same period and stability
        rev = periodic.find_periodic(
            0.0, 2, maps.sigma(period2_s0.points[0]))
        assert rev.stability == period2_s0.stability
        assert abs(rev.residual_trace - period2_s0.residual_trace) < 1e-8

    def test_classify_stability_api(self, period2_s0):
        assert periodic.classify_stability(period2_s0) == period2_s0.stability


def classify_is(po, stab):
    return periodic.classify_stability(po) == stab


class TestContinuation:
    def test_noop_when_target_equals_start(self, period2_s0):
        branch = periodic.continue_in_V(period2_s0, period2_s0.V)
        assert branch.orbits == [period2_s0]
        assert branch.events == []

    def test_branch_near_zero_stays_hyperbolic(self):
        start = periodic.find_periodic(
            -0.005, 2, periodic.period_two_point_at_level(-0.005))
        branch = periodic.continue_in_V(start, -0.049, max_step=0.01)
        assert abs(branch.orbits[-1].V - (-0.049)) < 1e-12
        kinds = {e.kind for e in branch.events}
        assert "EllipticTransition" not in kinds
        for po in branch.orbits:
            assert po.stability in (
                Stability.HYPERBOLIC, Stability.REFLECTION_HYPERBOLIC)

    def test_elliptic_transition_bracketed_with_parabolic_point(self):
        # the symmetric period-two orbit crosses t = -2 between -0.5 and -0.7
        start = periodic.find_periodic(
            -0.5, 2, periodic.period_two_point_at_level(-0.5))
        branch = periodic.continue_in_V(start, -0.7, max_step=0.02)
        trans = [e for e in branch.events if e.kind == "EllipticTransition"]
        assert trans
        V_c = trans[0].V
        po_c = periodic.find_periodic(
            V_c, 2, periodic.period_two_point_at_level(V_c))
        assert abs(abs(po_c.residual_trace) - 2.0) < 1e-6
        # stability flips across the crossing
        t_before = periodic.find_periodic(
            V_c + 1e-4, 2, periodic.period_two_point_at_level(V_c + 1e-4))
        t_after = periodic.find_periodic(
            V_c - 1e-4, 2, periodic.period_two_point_at_level(V_c - 1e-4))
        assert (t_before.residual_trace + 2.0) * (t_after.residual_trace + 2.0) < 0

    def test_monotone_V_along_branch(self):
        start = periodic.find_periodic(
            -0.05, 2, periodic.period_two_point_at_level(-0.05))
        branch = periodic.continue_in_V(start, -0.2, max_step=0.03)
        Vs = [po.V for po in branch.orbits]
        assert all(b < a for a, b in zip(Vs[:-1], Vs[1:]))


class TestSeedFromTorus:
    def test_origin_maps_to_corner(self):
        po = periodic.seed_from_torus((Fraction(0), Fraction(0)), 0.0)
        assert po.period == 1
        assert np.allclose(po.points[0], [1, 1, 1], atol=1e-9)

    def test_rational_orbit_closes(self):
        po = periodic.seed_from_torus((Fraction(2, 5), Fraction(1, 5)), 0.0)
        assert po.newton_residual < 1e-10
        # torus period divides the full period of the automorphism mod 5
        assert 20 % po.period == 0

    def test_near_singular_seed_rejected(self):
        with pytest.raises(NearSingularSeed):
            periodic.seed_from_torus((Fraction(1, 2), Fraction(0)), -0.05)

    def test_continuation_to_negative_level(self):
        po = periodic.seed_from_torus((Fraction(2, 5), Fraction(1, 5)), -0.02)
        assert abs(po.V - (-0.02)) < 1e-12
        assert po.newton_residual < 1e-9
        assert np.max(np.abs(maps.invariant(po.points) - (-0.02))) < 1e-9


class TestSerialization:
    def test_json_dict_fields(self, period2_s0):
        d = period2_s0.to_json_dict()
        assert set(d) >= {"V", "period", "points", "trace", "stability", "residual"}

    def test_branch_jsonl(self, tmp_path, period2_s0):
        import json

        branch = periodic.continue_in_V(period2_s0, period2_s0.V)
        path = tmp_path / "branch.jsonl"
        periodic.branch_to_jsonl(branch, path)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 2
        assert json.loads(lines[0])["period"] == 2
        assert "events" in json.loads(lines[1])
