import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracelab import maps

from conftest import finite_difference_jacobian

coord = st.floats(-2.0, 2.0, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


class TestTraceMap:
    def test_fixed_points(self):
        assert np.array_equal(maps.trace_map([1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])
        assert np.array_equal(maps.trace_map([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])

    def test_direct_substitution(self):
        assert np.array_equal(maps.trace_map([1.0, 2.0, 3.0]), [1.0, 1.0, 2.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            maps.trace_map([np.nan, 0.0, 0.0])
        with pytest.raises(ValueError):
            maps.trace_map([np.inf, 0.0, 0.0])

    def test_inverse_closed_form(self):
        assert np.array_equal(maps.trace_map_inverse([1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])
        # inverts the forward example
        assert np.allclose(maps.trace_map_inverse([1.0, 1.0, 2.0]), [1.0, 2.0, 3.0])

    def test_inverse_is_sigma_conjugate(self, rng):
        p = rng.uniform(-2, 2, (50, 3))
        direct = maps.trace_map_inverse(p)
        conj = maps.sigma(maps.trace_map(maps.sigma(p)))
        assert np.allclose(direct, conj, atol=0)

    @given(point)
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, p):
        assert np.linalg.norm(maps.trace_map_inverse(maps.trace_map(p)) - p) < 1e-12
        assert np.linalg.norm(maps.trace_map(maps.trace_map_inverse(p)) - p) < 1e-12

    def test_sigma_involution(self, rng):
        p = rng.uniform(-3, 3, (100, 3))
        assert np.array_equal(maps.sigma(maps.sigma(p)), p)

    def test_sigma_maps_orbits_to_inverse_orbits(self, rng):
        p = rng.uniform(-0.5, 0.5, 3)
        fw = maps.iterate_map(maps.trace_map, p, 10)
        bw = maps.iterate_map(maps.trace_map_inverse, maps.sigma(p), 10)
        assert np.allclose(maps.sigma(fw), bw, atol=1e-12)


class TestInvariant:
    def test_reference_values(self):
        assert maps.invariant([1.0, 1.0, 1.0]) == 0.0
        assert maps.invariant([0.0, 0.0, 0.0]) == -1.0
        assert maps.invariant([2.0, 0.0, 0.0]) == 3.0

    @given(point)
    @settings(max_examples=200, deadline=None)
    def test_conserved_one_step(self, p):
        assert abs(maps.invariant(maps.trace_map(p)) - maps.invariant(p)) < 1e-12

    def test_conserved_along_bounded_orbit(self):
        # 1e4 steps in double precision without reprojection
        p = maps.factor_map(np.array([0.123, 0.456]))
        I0 = maps.invariant(p)
        drift = 0.0
        for _ in range(10_000):
            p = maps.trace_map(p)
            drift = max(drift, abs(float(maps.invariant(p)) - I0))
        assert drift < 1e-8

    def test_gradient_critical_points(self):
        assert np.array_equal(maps.invariant_gradient([1.0, 1.0, 1.0]), [0, 0, 0])
        assert np.array_equal(maps.invariant_gradient([0.0, 0.0, 0.0]), [0, 0, 0])

    def test_gradient_against_finite_differences(self, rng):
        for _ in range(20):
            p = rng.uniform(-2, 2, 3)
            fd = finite_difference_jacobian(lambda q: [maps.invariant(q)], p)[0]
            g = maps.invariant_gradient(p)
            denom = max(1.0, np.linalg.norm(g))
            assert np.linalg.norm(fd - g) / denom < 1e-6


class TestJacobian:
    def test_value_at_ones(self):
        J = maps.jacobian([1.0, 1.0, 1.0])
        assert np.array_equal(J, [[2, 2, -1], [1, 0, 0], [0, 1, 0]])

    def test_determinant_is_minus_one(self, rng):
        p = rng.uniform(-5, 5, (100, 3))
        det = np.linalg.det(maps.jacobian(p))
        assert np.max(np.abs(det + 1.0)) < 1e-14

    def test_chain_rule_against_finite_differences(self, rng):
        p = rng.uniform(-1, 1, 3)
        J2 = maps.jacobian(maps.trace_map(p)) @ maps.jacobian(p)
        fd = finite_difference_jacobian(
            lambda q: maps.trace_map(maps.trace_map(q)), p)
        assert np.max(np.abs(J2 - fd)) < 1e-5

    def test_apply_jacobian_matches_matrix(self, rng):
        p = rng.uniform(-2, 2, (30, 3))
        v = rng.uniform(-1, 1, (30, 3))
        direct = maps.apply_jacobian(p, v)
        matrix = np.einsum("nij,nj->ni", maps.jacobian(p), v)
        assert np.allclose(direct, matrix, atol=0)


class TestTorusMaps:
    def test_cat_fixed_point(self):
        assert np.array_equal(maps.anosov_step([0.0, 0.0]), [0.0, 0.0])

    def test_cat_half_point(self):
        assert np.array_equal(maps.anosov_step([0.5, 0.0]), [0.5, 0.5])

    def test_cat_eigen_stretch(self):
        # eigen-decomposition oracle of [[1, 1], [1, 0]]
        evals, evecs = np.linalg.eig(maps.CAT_MATRIX)
        lam = float(np.max(evals))
        assert abs(lam - maps.GOLDEN) < 1e-14
        v = evecs[:, np.argmax(evals)]
        stretched = maps.CAT_MATRIX @ v
        assert np.allclose(stretched, lam * v, atol=1e-14)

    def test_reduction_snaps_near_one(self):
        r = maps.reduce_torus([1.0 - 1e-16, 0.3])
        assert r[0] == 0.0

    def test_factor_map_values(self):
        assert np.allclose(maps.factor_map([0.0, 0.0]), [1, 1, 1], atol=0)
        assert np.allclose(maps.factor_map([0.5, 0.0]), [-1, -1, 1], atol=1e-15)
        assert np.allclose(maps.factor_map([0.25, 0.25]), [-1, 0, 0], atol=1e-15)

    def test_factor_image_on_cayley_cubic(self, rng):
        t = rng.random((1000, 2))
        assert np.max(np.abs(maps.invariant(maps.factor_map(t)))) < 1e-12

    def test_semiconjugacy_on_grid(self, rng):
        t = rng.random((500, 2))
        lhs = maps.factor_map(maps.anosov_step(t))
        rhs = maps.trace_map(maps.factor_map(t))
        assert np.max(np.linalg.norm(lhs - rhs, axis=-1)) < 1e-12


class TestStandardMap:
    def test_fixed_points(self):
        for k in (0.3, 1.7):
            assert np.allclose(maps.standard_map([0.0, 0.0], k), [0, 0], atol=1e-15)
            out = maps.standard_map([0.5, 0.0], k)
            assert np.allclose(out, [0.5, 0.0], atol=1e-15)

    def test_integrable_twist(self):
        assert np.allclose(maps.standard_map([0.3, 0.2], 0.0), [0.5, 0.2], atol=1e-15)

    def test_area_preservation(self, rng):
        q = rng.random((200, 2))
        for k in (0.0, 0.7, 3.0):
            det = np.linalg.det(maps.standard_map_jacobian(q, k))
            assert np.max(np.abs(det - 1.0)) < 1e-12

    def test_jacobian_against_finite_differences(self, rng):
        k = 0.8
        q = rng.random(2) * 0.3 + 0.1
        fd = finite_difference_jacobian(
            lambda t: maps.standard_map(t, k), q)
        assert np.max(np.abs(fd - maps.standard_map_jacobian(q, k))) < 1e-5


def test_extended_precision_dtype_preserved():
    p = np.array([0.3, 0.2, 0.1], dtype=np.longdouble)
    out = maps.trace_map(p)
    assert out.dtype == np.longdouble
    assert maps.invariant(p).dtype == np.longdouble
