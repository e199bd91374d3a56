"""Radial projections and the discretized line-incidence machinery."""

import math

import numpy as np
import pytest

from favlab.geometry import Line, Point2, TWO_PI
from favlab.ifs import generate_generation, preset
from favlab.projections import projection_count
from favlab.visibility import (DEFAULT_C, DiscreteLine, LineFamily,
                               PointCloud, build_line_family,
                               cloud_from_generation, cone_count, counts_table,
                               f_delta, l2_norm_f, mass, radial_projection,
                               radial_projection_balls, richness_histogram,
                               scan_line_low_visibility, select_intervals,
                               vis_delta, visibility)


@pytest.fixture(scope="module")
def k4_setup(gens):
    g = gens(4)
    A = cloud_from_generation(g)
    fam = build_line_family(float(g.side), 2.5)
    table = counts_table(A, fam)
    return A, fam, table


def ray_oracle_vis(gen, a, n_rays=200_000):
    """Slab-test ray casting; independent of the arc-union code path."""
    ang = (np.arange(n_rays) + 0.5) * (TWO_PI / n_rays)
    dx, dy = np.cos(ang), np.sin(ang)
    hit = np.zeros(n_rays, dtype=bool)
    for x0, y0, side in zip(gen.corner_x, gen.corner_y, gen.sides):
        with np.errstate(divide="ignore", invalid="ignore"):
            tx1 = (x0 - a.x) / dx
            tx2 = (x0 + side - a.x) / dx
            ty1 = (y0 - a.y) / dy
            ty2 = (y0 + side - a.y) / dy
        tmin = np.maximum(np.minimum(tx1, tx2), np.minimum(ty1, ty2))
        tmax = np.minimum(np.maximum(tx1, tx2), np.maximum(ty1, ty2))
        hit |= (tmax >= tmin) & (tmax >= 0)
    return float(np.mean(hit))


class TestRadialProjection:
    def test_interior_vantage_full(self, gens):
        assert visibility(gens(1), Point2(0.1, 0.1)) == 1.0

    def test_distant_vantage_vs_ray_oracle(self, gens):
        g = gens(1)
        a = Point2(0.5, -10.0)
        vis = visibility(g, a)
        assert abs(vis - ray_oracle_vis(g, a)) < 1e-3
        # union of four arcs is at most four times the widest one
        widths = [2 * math.atan(0.25 / 2 / 9.0)]
        assert vis <= 4 * max(widths) / TWO_PI * 1.5

    def test_unit_square_side_vantage(self, gens):
        vis = visibility(gens(0), Point2(-1.0, 0.5))
        assert vis == pytest.approx(2 * math.atan(0.5) / TWO_PI, abs=1e-12)

    def test_monotone_under_refinement(self, gens):
        a = Point2(-1.0, -1.0)
        vals = [visibility(gens(n), a) for n in range(1, 5)]
        assert all(v1 >= v2 - 1e-12 for v1, v2 in zip(vals, vals[1:]))

    def test_ball_cloud_version(self, gens):
        g = gens(2)
        A = cloud_from_generation(g)
        a = Point2(-1.0, -1.0)
        ball = radial_projection_balls(A, float(g.side), a).measure()
        square = radial_projection(g, a).measure()
        # a side-s square sits inside the radius-s ball around its center
        assert ball >= square - 1e-12

    def test_ball_cloud_interior(self):
        A = PointCloud(np.array([[0.0, 0.0]]), 0.5)
        assert radial_projection_balls(A, 0.5, Point2(0.2, 0.0)).is_full()


class TestLineFamily:
    def test_spec_count(self):
        fam = build_line_family(0.1, 2.0)
        assert fam.k1_count == 32
        assert fam.k2_max == 20 and fam.k2_min == -20
        assert fam.n_lines == 32 * 41 == 1312
        assert len(fam.lines) == 1312

    def test_degenerate_scale(self):
        fam = build_line_family(1.0, 1.0)
        assert fam.n_lines >= 4

    def test_density_scaling(self):
        for delta in (0.1, 0.05, 0.025):
            fam = build_line_family(delta, 2.0)
            assert 1.0 <= fam.n_lines * delta ** 2 <= 4 * math.pi * 2.0

    def test_line_indices_roundtrip(self):
        fam = build_line_family(0.1, 2.0)
        ell = fam.line(3, -7)
        assert ell.line.theta == pytest.approx(0.3)
        assert ell.line.offset == pytest.approx(-0.7)
        assert ell.delta == 0.1

    def test_rejects_bad_scales(self):
        from favlab.geometry import GeometryError
        with pytest.raises(GeometryError):
            build_line_family(0.5, 0.1)

    def test_budget_guard(self):
        from favlab.ifs import ResourceBudgetError
        fam = build_line_family(0.001, 2.0)
        with pytest.raises(ResourceBudgetError):
            fam.lines


class TestFDelta:
    def test_single_point_on_axis(self):
        A = PointCloud(np.array([[0.0, 0.0]]), 0.1)
        ell = DiscreteLine(0, 0, Line(0.0, 0.0), 0.1)
        assert f_delta(ell, A, 4.0) == 1

    def test_far_points(self):
        A = PointCloud(np.array([[0.0, 5.0], [3.0, -2.0]]), 0.1)
        ell = DiscreteLine(0, 0, Line(0.0, 0.0), 0.1)
        assert f_delta(ell, A, 4.0) == 0

    def test_column_line_tight_c(self, gens):
        # one full column of stage-3 centers at c=1: 2^3 points
        g = gens(3)
        A = cloud_from_generation(g)
        delta = float(g.side)
        column = DiscreteLine(0, 0, Line(math.pi / 2, -delta / 2), delta)
        assert f_delta(column, A, 1.0) == 8

    def test_column_line_wide_c_catches_neighbor(self, gens):
        # at c=4 the 3*delta-distant sibling column enters the tube
        g = gens(3)
        A = cloud_from_generation(g)
        delta = float(g.side)
        column = DiscreteLine(0, 0, Line(math.pi / 2, -delta / 2), delta)
        assert f_delta(column, A, 4.0) == 16

    def test_rejects_bad_c(self):
        A = PointCloud(np.array([[0.0, 0.0]]), 0.1)
        with pytest.raises(ValueError):
            f_delta(DiscreteLine(0, 0, Line(0.0, 0.0), 0.1), A, 0.0)

    def test_counts_table_matches_f_delta(self, k4_setup):
        A, fam, table = k4_setup
        rng = np.random.default_rng(11)
        for _ in range(50):
            k1 = int(rng.integers(0, fam.k1_count))
            k2 = int(rng.integers(fam.k2_min, fam.k2_max + 1))
            assert table[k1, k2 - fam.k2_min] == f_delta(fam.line(k1, k2), A)


class TestVisDelta:
    def test_empty_cloud(self):
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.empty((0, 2)), 0.05)
        assert vis_delta(Point2(0, 0), A, fam) == 0

    def test_single_point_pencil(self):
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.array([[1.0, 0.0]]), 0.05)
        count = vis_delta(Point2(0.0, 0.0), A, fam)
        # all qualifying lines lie in one ~delta-wide direction pencil
        assert 1 <= count <= 60

    def test_monotone_in_cloud(self, gens):
        g = gens(3)
        A = cloud_from_generation(g)
        half = PointCloud(A.points[::2], A.delta)
        fam = build_line_family(A.delta, 2.5)
        a = Point2(-1.0, -1.0)
        t_full = counts_table(A, fam)
        t_half = counts_table(half, fam)
        assert vis_delta(a, A, fam, table=t_full) >= \
            vis_delta(a, half, fam, table=t_half)

    def test_counts_only_lines_near_vantage(self, k4_setup):
        A, fam, table = k4_setup
        a = Point2(-1.0, -1.0)
        vd = vis_delta(a, A, fam, table=table)
        # brute check on a small sample of directions
        delta = fam.delta
        brute = 0
        for k1 in range(0, fam.k1_count, 97):
            th = k1 * delta
            t = -math.sin(th) * a.x + math.cos(th) * a.y
            for k2 in range(fam.k2_min, fam.k2_max + 1):
                if abs(t - k2 * delta) <= 2 * delta and \
                        table[k1, k2 - fam.k2_min] > 0:
                    brute += 1
        assert vd >= brute
        assert 0 < vd < fam.n_lines


class TestL2Norm:
    def test_empty(self):
        fam = build_line_family(0.05, 2.0)
        assert l2_norm_f(PointCloud(np.empty((0, 2)), 0.05), fam) == 0.0

    def test_single_point_scale(self):
        delta = 0.02
        fam = build_line_family(delta, 2.0)
        A = PointCloud(np.array([[0.3, -0.2]]), delta)
        v = l2_norm_f(A, fam)
        # each incident line contributes 1; count ~ delta^-1 of ~delta^-2
        assert 0.05 <= v / delta <= 20

    def test_matches_table(self, gens):
        g = gens(3)
        A = cloud_from_generation(g)
        fam = build_line_family(A.delta, 2.0)
        table = counts_table(A, fam)
        direct = float(np.sum(table.astype(np.float64) ** 2)) / fam.n_lines
        assert l2_norm_f(A, fam) == pytest.approx(direct, rel=1e-12)


class TestMassAndCones:
    def test_empty_cloud(self):
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.empty((0, 2)), 0.05)
        assert mass(Point2(0, 0), (0.0, TWO_PI), A, fam) == 0
        assert cone_count(Point2(0, 0), (0.0, TWO_PI), A, fam) == 0

    def test_full_circle_dominates_vis(self, k4_setup):
        A, fam, table = k4_setup
        a = Point2(-1.0, -1.0)
        m = mass(a, (0.0, TWO_PI), A, fam, table=table)
        assert m >= vis_delta(a, A, fam, table=table)

    def test_degenerate_arc(self, k4_setup):
        A, fam, table = k4_setup
        a = Point2(-1.0, -1.0)
        # an arc of length ~0 off the direction grid selects nothing
        m = mass(a, (0.12345e-3 + fam.delta / 3, 1e-12), A, fam, table=table)
        assert m == 0

    def test_lone_vantage_cone(self):
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.array([[0.3, 0.4]]), 0.05)
        a = Point2(0.3, 0.4)
        assert cone_count(a, (0.0, TWO_PI), A, fam) == 0

    def test_single_neighbor_cone(self):
        fam = build_line_family(0.05, 2.0)
        a = Point2(0.0, 0.0)
        A = PointCloud(np.array([[0.5, 0.0]]), 0.05)
        c = cone_count(a, (-0.3, 0.6), A, fam)
        assert 1 <= c <= 120

    def test_cone_monotone_in_arc(self, k4_setup):
        A, fam, table = k4_setup
        a = Point2(-1.0, -1.0)
        wide = cone_count(a, (0.0, math.pi / 2), A, fam, table=table)
        narrow = cone_count(a, (0.0, math.pi / 4), A, fam, table=table)
        assert narrow <= wide

    def test_mass_cone_sandwich(self, k4_setup):
        """Direct cone counts and the line-mass agree up to constants."""
        A, fam, table = k4_setup
        a = Point2(-1.0, -1.0)
        arc = (math.pi / 4 - 0.3, 0.6)
        m = mass(a, arc, A, fam, table=table)
        cones = cone_count(a, arc, A, fam, table=table)
        anti = ((arc[0] + math.pi) % TWO_PI, arc[1])
        dilated = (arc[0] - 2 * fam.delta, arc[1] + 4 * fam.delta)
        cones_dilated = (cone_count(a, dilated, A, fam, table=table)
                         + cone_count(a, (anti[0] - 2 * fam.delta,
                                          anti[1] + 4 * fam.delta),
                                      A, fam, table=table))
        c_hi = 8.0
        assert cones <= c_hi * m
        assert m <= c_hi * (cones_dilated + 1)


class TestSelectIntervals:
    def test_two_perpendicular_clusters(self):
        delta = 0.01
        rng = np.random.default_rng(1)
        c1 = np.stack([np.full(30, 1.0) + rng.uniform(-0.1, 0.1, 30),
                       rng.uniform(-0.05, 0.05, 30)], axis=1)
        c2 = np.stack([rng.uniform(-0.05, 0.05, 30),
                       np.full(30, 1.0) + rng.uniform(-0.1, 0.1, 30)], axis=1)
        A = PointCloud(np.concatenate([c1, c2]), delta)
        fam = build_line_family(delta, 2.0)
        sel = select_intervals(Point2(0.0, 0.0), A, fam, 12)
        assert sel is not None
        from favlab.visibility import _arc_contains
        covered = (_arc_contains(sel.arc1, 0.0)
                   or _arc_contains(sel.arc2, 0.0))
        assert covered
        assert sel.mass1 > len(A) / 120 and sel.mass2 > len(A) / 120

    def test_single_cone_with_antipode_fails(self):
        # collinear cloud through the vantage: every rich direction sits in
        # one arc or its antipode, so no admissible pair exists
        delta = 0.01
        ang = 0.26  # interior of the first 2*pi/12 grid arc
        rs = np.concatenate([np.linspace(0.5, 1.5, 25),
                             -np.linspace(0.5, 1.5, 25)])
        A = PointCloud(np.stack([rs * math.cos(ang), rs * math.sin(ang)],
                                axis=1), delta)
        fam = build_line_family(delta, 2.0)
        assert select_intervals(Point2(0.0, 0.0), A, fam, 12) is None

    def test_fourcorner_succeeds(self, k4_setup):
        A, fam, table = k4_setup
        sel = select_intervals(Point2(-1.0, -1.0), A, fam, 12, table=table)
        assert sel is not None
        assert 1 <= sel.i1 < sel.i2 <= 12

    def test_rejects_bad_k(self, k4_setup):
        A, fam, table = k4_setup
        with pytest.raises(ValueError):
            select_intervals(Point2(-1, -1), A, fam, 10)
        with pytest.raises(ValueError):
            select_intervals(Point2(-1, -1), A, fam, 13)


class TestRichnessHistogram:
    def test_empty(self):
        fam = build_line_family(0.05, 2.0)
        h = richness_histogram(PointCloud(np.empty((0, 2)), 0.05), fam)
        assert h.buckets == {}

    def test_coincident_cluster_top_bucket(self):
        m = 33
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.tile([[0.25, 0.35]], (m, 1)), 0.05)
        h = richness_histogram(A, fam)
        assert max(h.buckets) == int(math.floor(math.log2(m)))

    def test_total_is_occupied_line_count(self, gens):
        g = gens(3)
        A = cloud_from_generation(g)
        fam = build_line_family(A.delta, 2.0)
        table = counts_table(A, fam)
        h = richness_histogram(A, fam)
        assert h.total() == int(np.count_nonzero(table))
        assert h.family_size == fam.n_lines

    def test_shape_bound(self, gens):
        """bucket(j) * 2^(2j) * delta^(1+alpha) stays polylog-bounded."""
        for n in (3, 4, 5):
            g = gens(n)
            A = cloud_from_generation(g)
            fam = build_line_family(A.delta, 2.0)
            h = richness_histogram(A, fam)
            logfac = math.log(1 / A.delta) ** 3
            for j, cnt in h.buckets.items():
                assert cnt * 2.0 ** (2 * j) * A.delta ** 2 <= 2.0 * logfac


class TestLineScan:
    def test_empty_cloud_full_segment(self):
        fam = build_line_family(0.05, 2.0)
        A = PointCloud(np.empty((0, 2)), 0.05)
        ell0 = Line(0.0, -0.5)
        length = scan_line_low_visibility(ell0, A, fam, 0.5)
        chord = 2 * math.sqrt(2.0 ** 2 - 0.5 ** 2)
        assert length == pytest.approx(chord, abs=0.05)

    def test_monotone_in_lambda(self, k4_setup):
        A, fam, table = k4_setup
        ell0 = Line(0.0, -0.5)
        lams = [2.0 ** -j for j in range(1, 7)]
        lengths = [scan_line_low_visibility(ell0, A, fam, lam, table=table)
                   for lam in lams]
        assert all(a >= b - 1e-12 for a, b in zip(lengths, lengths[1:]))

    def test_offset_outside_disk(self, k4_setup):
        A, fam, table = k4_setup
        assert scan_line_low_visibility(Line(0.0, 5.0), A, fam, 0.5,
                                        table=table) == 0.0

    def test_rejects_bad_lambda(self, k4_setup):
        A, fam, table = k4_setup
        with pytest.raises(ValueError):
            scan_line_low_visibility(Line(0.0, -0.5), A, fam, 0.0)


class TestAntipodalConsistency:
    """g_n(theta) = f_{n, theta - pi/2}(0) has the support of the radial
    projection from the origin, doubled to the antipode."""

    def test_support_agreement(self):
        sys_ = preset("fourcorner-annulus")
        g = generate_generation(sys_, 3)
        arcs = radial_projection(g, Point2(0.0, 0.0))
        assert not arcs.is_full()
        eps = 1e-6
        for start, length in arcs.arcs[:8]:
            mid = (start + length / 2) % TWO_PI
            count = projection_count(g, (mid - math.pi / 2) % math.pi, 0.0)
            assert count >= 1
        # midpoints of the complementary gaps carry no line through 0
        all_arcs = sorted(arcs.arcs)
        for (s1, l1), (s2, _) in zip(all_arcs, all_arcs[1:]):
            gap_mid = (s1 + l1 + s2) / 2
            if (gap_mid - (s1 + l1)) < eps:
                continue
            anti = (gap_mid + math.pi) % TWO_PI
            if arcs.contains(anti):
                continue
            count = projection_count(g, (gap_mid - math.pi / 2) % math.pi, 0.0)
            assert count == 0
