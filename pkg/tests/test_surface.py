import numpy as np
import pytest

from tracelab import maps, surface
from tracelab.errors import EmptyComponent, SingularGradient
from tracelab.surface import SurfaceTopology


class TestClassify:
    @pytest.mark.parametrize("V,tag", [
        (0.5, SurfaceTopology.FOUR_PUNCTURED_SPHERE),
        (0.0, SurfaceTopology.CAYLEY_CUBIC),
        (-0.5, SurfaceTopology.SPHERE_AND_FOUR_DISCS),
        (-1.0, SurfaceTopology.POINT_AND_FOUR_DISCS),
        (-1.5, SurfaceTopology.FOUR_DISCS_ONLY),
    ])
    def test_tags(self, V, tag):
        assert surface.classify_level(V) == tag

    def test_thresholds_exact(self):
        assert surface.classify_level(-1e-300) == SurfaceTopology.SPHERE_AND_FOUR_DISCS
        assert surface.classify_level(1e-300) == SurfaceTopology.FOUR_PUNCTURED_SPHERE


class TestSolveZ:
    def test_two_sheets(self):
        # independent oracle: numpy.roots on z^2 - 2xy z + (x^2 + y^2 - 1 - V)
        roots = surface.solve_z(0.0, 0.0, -0.75)
        assert roots == (-0.5, 0.5)
        oracle = np.sort(np.roots([1.0, 0.0, 0.0 + 0.0 - 1.0 - (-0.75)]))
        assert np.allclose(roots, oracle, atol=1e-15)

    def test_double_root_at_corner(self):
        assert surface.solve_z(1.0, 1.0, 0.0) == (1.0,)

    def test_no_real_root(self):
        assert surface.solve_z(0.0, 0.0, -2.0) == ()

    def test_roots_satisfy_invariant(self, rng):
        V = -0.4
        xs = rng.uniform(-1, 1, 200)
        ys = rng.uniform(-1, 1, 200)
        z_lo, z_hi, mask = surface.solve_z(xs, ys, V)
        for z in (z_lo[mask], z_hi[mask]):
            pts = np.stack([xs[mask], ys[mask], z], axis=-1)
            assert np.max(np.abs(maps.invariant(pts) - V)) < 1e-12


class TestSampling:
    def test_degenerate_point_component(self):
        pts = surface.sample_compact_component(-1.0, 5)
        assert np.array_equal(pts, [[0.0, 0.0, 0.0]])

    def test_empty_below_minus_one(self):
        with pytest.raises(EmptyComponent):
            surface.sample_compact_component(-1.5, 10)

    def test_samples_on_surface_in_cube(self):
        pts = surface.sample_compact_component(-0.5, 10_000)
        assert len(pts) >= 10_000
        assert np.max(np.abs(maps.invariant(pts) - (-0.5))) < 1e-12
        assert np.all(np.abs(pts) <= 1.0 + 1e-12)

    def test_both_sheets_present(self):
        pts = surface.sample_compact_component(-0.5, 1000)
        side = pts[:, 2] - pts[:, 0] * pts[:, 1]
        assert np.any(side > 1e-6) and np.any(side < -1e-6)


class TestProjection:
    def test_already_on_surface_unmoved(self):
        p = np.array([0.0, 0.0, 0.5])
        out = surface.project_to_level(p, -0.75)
        assert np.array_equal(out, p)

    def test_axis_projection_value(self):
        out = surface.project_to_level([0.0, 0.0, 0.51], -0.75)
        assert np.allclose(out, [0.0, 0.0, 0.5], atol=1e-14)

    def test_singular_gradient(self):
        with pytest.raises(SingularGradient):
            surface.project_to_level([1.0, 1.0, 1.0], -0.5)

    def test_idempotent(self, rng):
        V = -0.3
        pts = surface.sample_compact_component(V, 200)
        nudged = pts + rng.uniform(-1e-3, 1e-3, pts.shape)
        once = surface.project_to_level(nudged, V)
        twice = surface.project_to_level(once, V)
        assert np.max(np.linalg.norm(twice - once, axis=-1)) < 1e-13

    def test_safe_variant_flags_singular(self):
        q, ok = surface.project_to_level_safe(np.array([1.0, 1.0, 1.0]), -0.5)
        assert not ok


class TestTangentFrame:
    def test_orthonormality(self, rng):
        pts = surface.sample_compact_component(-0.6, 100)
        for p in pts[rng.choice(len(pts), 20, replace=False)]:
            fr = surface.tangent_frame(p)
            for resid in (
                abs(np.dot(fr.u1, fr.u2)),
                abs(np.linalg.norm(fr.u1) - 1),
                abs(np.linalg.norm(fr.u2) - 1),
                abs(np.dot(fr.u1, fr.normal)),
                abs(np.dot(fr.u2, fr.normal)),
                abs(np.linalg.norm(fr.normal) - 1),
            ):
                assert resid < 1e-12

    def test_normal_along_gradient(self):
        fr = surface.tangent_frame([0.0, 0.0, 0.5])
        assert np.allclose(fr.normal, [0, 0, 1], atol=0)

    def test_bit_for_bit_deterministic(self):
        p = [0.11, -0.37, 0.71]
        a = surface.tangent_frame(p)
        b = surface.tangent_frame(p)
        assert np.array_equal(a.u1, b.u1)
        assert np.array_equal(a.u2, b.u2)
        assert np.array_equal(a.normal, b.normal)

    def test_singular_gradient(self):
        with pytest.raises(SingularGradient):
            surface.tangent_frame([1.0, 1.0, 1.0])


class TestAreaDensity:
    def test_reference_value(self):
        assert surface.area_density([0.0, 0.0, 0.5]) == 1.0

    def test_diverges_toward_corner(self):
        V = 0.0
        densities = []
        for d in (0.3, 0.1, 0.03):
            x = 1.0 - d
            z = surface.solve_z(x, x, V)[-1]
            densities.append(surface.area_density([x, x, z]))
        assert densities[0] < densities[1] < densities[2]

    def test_pushforward_invariance(self):
        """Weighted area of a small surface triangle is preserved by the map.

        Numerical pushforward oracle: barycentric refinement to depth 6,
        weighted by the density at centroids.
        """
        V = -0.5
        base = surface.project_to_level(np.array([0.1, 0.2, 0.95]), V)
        fr = surface.tangent_frame(base)
        h = 0.01
        tri = np.array([
            base,
            surface.project_to_level(base + h * fr.u1, V),
            surface.project_to_level(base + h * fr.u2, V),
        ])

        def weighted_area(triangle, depth):
            tris = [triangle]
            for _ in range(depth):
                nxt = []
                for a, b, c in tris:
                    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
                    nxt += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
                tris = nxt
            total = 0.0
            for a, b, c in tris:
                area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
                centroid = surface.project_to_level((a + b + c) / 3.0, V)
                total += area * surface.area_density(centroid)
            return total

        before = weighted_area(tri, 6)
        image = surface.project_to_level(maps.trace_map(tri), V)
        after = weighted_area(image, 6)
        assert abs(after - before) / before < 0.01


class TestSingularPoints:
    def test_exact_list(self):
        sp = surface.singular_points()
        assert np.array_equal(
            sp, [[1, 1, 1], [-1, -1, 1], [1, -1, -1], [-1, 1, -1]])

    def test_all_critical_on_cayley(self):
        sp = surface.singular_points()
        assert np.max(np.abs(maps.invariant(sp))) == 0.0
        assert np.max(np.abs(maps.invariant_gradient(sp))) == 0.0

    def test_invariant_as_a_set_with_unique_fixed_point(self):
        sp = surface.singular_points()
        images = maps.trace_map(sp)
        # image rows form the same set
        for row in images:
            assert any(np.array_equal(row, s) for s in sp)
        fixed = [i for i, s in enumerate(sp) if np.array_equal(images[i], s)]
        assert fixed == [0]  # only (1, 1, 1)
        # the other three form a 3-cycle
        cycle = {tuple(s): tuple(t) for s, t in zip(sp[1:], images[1:])}
        start = tuple(sp[1])
        seen = {start}
        cur = cycle[start]
        while cur != start:
            seen.add(cur)
            cur = cycle[cur]
        assert len(seen) == 3
