import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cremovable.intervals import IntervalSet, cantor_function, ternary_cantor
from cremovable.plane import (
    Boxes,
    Kind,
    NoSignChange,
    cantor_dust,
    direction,
    extended_cantor_bounds,
    holey_staircase,
    koch_curve,
    koch_polyline,
    last_graph_crossing,
    point_box_distance,
    point_clearance,
    product_approx,
    rect_union,
    segment_box_distance,
    segment_clearance,
    write_polyline_csv,
    write_rects_csv,
)

coord = st.floats(-3, 3, allow_nan=False)


def point_rect_dist(p, r):
    dx = max(r[0] - p[0], 0, p[0] - r[2])
    dy = max(r[1] - p[1], 0, p[1] - r[3])
    return math.hypot(dx, dy)


def seg_rect_dist_oracle(a, b, r):
    """Ternary search on the convex function t -> dist(a + t(b-a), r)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    lo, hi = 0.0, 1.0
    f = lambda t: point_rect_dist(a + t * (b - a), r)  # noqa: E731
    for _ in range(200):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return min(f(0), f(1), f((lo + hi) / 2))


class TestBoxes:
    def test_from_rects_validates(self):
        with pytest.raises(ValueError):
            Boxes.from_rects([[1, 0, 0, 1]])

    def test_area(self):
        assert Boxes.from_rects([[0, 0, 1, 2], [5, 5, 6, 6]]).area() == pytest.approx(3)

    def test_rotated_box_distance(self):
        # unit square rotated by 45 degrees, centred at the origin
        s = math.sqrt(0.5)
        b = Boxes([[0, 0]], [[s, s]], [[0.5, 0.5]])
        assert point_box_distance((2, 0), b)[0] == pytest.approx(2 - math.sqrt(0.5))
        assert point_box_distance((0.1, 0.1), b)[0] == 0

    @settings(max_examples=300)
    @given(coord, coord, coord, coord, coord, coord,
           st.floats(0, 2), st.floats(0, 2))
    def test_segment_distance_matches_oracle(self, ax, ay, bx, by, rx, ry, w, h):
        r = (rx, ry, rx + w, ry + h)
        got = segment_box_distance((ax, ay), (bx, by), Boxes.from_rects([r]))[0]
        assert got == pytest.approx(seg_rect_dist_oracle((ax, ay), (bx, by), r), abs=1e-7)


class TestProduct:
    def test_finite_product_is_exact(self):
        S = product_approx(IntervalSet([(0, 1)]), IntervalSet([(0, 1), (2, 3)]))
        assert S.kind is Kind.PRODUCT and len(S.cover(0)) == 2 and S.haus_bound(3) == 0

    def test_empty_factor(self):
        with pytest.raises(ValueError):
            product_approx(IntervalSet([]), IntervalSet([(0, 1)]))

    def test_dust_cover_and_bound(self):
        D = cantor_dust()
        assert len(D.cover(3)) == 64
        assert D.haus_bound(3) == pytest.approx(math.sqrt(2) / 27)
        assert D.cover(3).area() == pytest.approx((4 / 9) ** 3)

    def test_near_is_a_superset_of_meeting_boxes(self):
        D = cantor_dust()
        near = D.cover_near(4, (0.1, 0.1, 0.4, 0.3))
        full = D.rects(4)
        meets = (full[:, 0] <= 0.4) & (full[:, 2] >= 0.1) & (full[:, 1] <= 0.3) & (full[:, 3] >= 0.1)
        assert len(near) >= meets.sum() > 0

    def test_cover_memoized(self):
        D = cantor_dust()
        assert D.cover(3) is D.cover(3)


class TestStaircase:
    def test_cover_shape(self):
        S = holey_staircase()
        for g in range(6):
            r = S.rects(g)
            assert len(r) == 2 ** g
            assert np.allclose(r[:, 2] - r[:, 0], 3.0 ** -g)
            assert np.allclose(r[:, 3] - r[:, 1], 2.0 ** -g)

    def test_hausdorff_bound(self):
        assert holey_staircase().haus_bound(2) == pytest.approx(math.sqrt(1 / 81 + 1 / 16))

    def test_cover_contains_graph_points(self):
        S = holey_staircase()
        rng = np.random.default_rng(1)
        for _ in range(50):
            digits = rng.integers(0, 2, 25)
            x = sum(Fraction(2 * int(d), 3 ** (i + 1)) for i, d in enumerate(digits))
            y, _ = cantor_function(x, 40)
            assert S.contains_point((float(x), float(y)), 12)

    def test_clearance_of_point_on_cover(self):
        # a horizontal segment at height 1/4 across the middle third still
        # touches the generation-1 cover [0,1/3]x[0,1/2]
        S = holey_staircase()
        seg = ((1 / 3, 1 / 4), (2 / 3, 1 / 4))
        assert segment_clearance(seg, S, 1) == 0
        assert segment_clearance(((-1, -1), (-1, 1)), S, 4) == pytest.approx(1)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5), st.floats(-0.5, 1.5), st.floats(-0.5, 1.5),
           st.integers(0, 7))
    def test_branch_and_bound_matches_brute_force(self, ax, ay, bx, by, g):
        S = holey_staircase()
        brute = segment_box_distance((ax, ay), (bx, by), S.cover(g)).min()
        assert segment_clearance(((ax, ay), (bx, by)), S, g) == pytest.approx(brute, abs=1e-12)

    def test_clearance_monotone_in_depth(self):
        S = holey_staircase()
        seg = ((0.2, 0.6), (0.9, 0.3))
        vals = [segment_clearance(seg, S, g) for g in range(0, 20)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_deep_point_clearance_is_fast(self):
        S = holey_staircase()
        d = point_clearance((0.5, 0.5), S, 33)
        # (1/2, 1/2) is on the plateau, off the set; the nearest set points are (1/3, 1/2), (2/3, 1/2)
        assert d == pytest.approx(1 / 6, rel=1e-9)

    def test_depth_limit(self):
        with pytest.raises(ValueError):
            holey_staircase().cover(34)


class TestKoch:
    def test_vertex_count_and_apex(self):
        P = koch_polyline(1)
        assert len(P) == 5
        assert np.allclose(P[2], (1.5, math.sqrt(3) / 2))
        assert len(koch_polyline(5)) == 4 ** 5 + 1

    def test_length_grows_by_four_thirds(self):
        def length(P):
            return np.hypot(*np.diff(P, axis=0).T).sum()
        for g in range(1, 6):
            assert length(koch_polyline(g)) == pytest.approx(3 * (4 / 3) ** g)

    def test_refinement_stays_in_cover(self):
        K = koch_curve()
        fine = koch_polyline(6)
        for g in (2, 3, 4):
            assert point_clearance_all(fine, K, g) == 0

    def test_depth_cap(self):
        with pytest.raises(ValueError):
            koch_polyline(13)


def point_clearance_all(pts, S, g):
    boxes = S.cover(g)
    return max(float(point_box_distance(p, boxes).min()) for p in pts[::37])


class TestRectUnion:
    def test_solid_square(self):
        sq = rect_union([[0, 0, 1, 1]])
        assert segment_clearance(((0.5, -1), (0.5, 2)), sq) == 0
        assert segment_clearance(((2, -1), (2, 2)), sq) == pytest.approx(1)


class TestGraphCrossing:
    def test_crossing_lies_near_graph_and_on_segment(self):
        seg = ((Fraction(-1, 3), Fraction(1, 4)), (Fraction(4, 3), Fraction(3, 4)))
        c = last_graph_crossing(seg, depth=20)
        x, y = c.point
        assert abs(y - (0.25 + (x + 1 / 3) * 0.5 / (5 / 3))) < 1e-12
        lo, hi = c.x_bracket
        assert lo <= Fraction(x) <= hi and hi - lo <= Fraction(1, 2 ** 18)
        assert c.residual <= Fraction(1, 2 ** 17)
        c20 = ternary_cantor(20).classify(Fraction(x))
        assert c20.inside or c20.distance <= Fraction(1, 2 ** 18)

    def test_downhill_segment_can_cross_on_a_plateau(self):
        c = last_graph_crossing(((Fraction(-1, 3), Fraction(55, 100)), (Fraction(4, 3), Fraction(45, 100))))
        assert abs(c.point.x - 0.5) < 0.01
        assert not ternary_cantor(20).classify(Fraction(c.point.x)).inside

    def test_same_side_raises(self):
        with pytest.raises(NoSignChange):
            last_graph_crossing(((-1, 2), (2, 2)))

    def test_vertical_rejected(self):
        with pytest.raises(ValueError):
            last_graph_crossing(((0.5, 0), (0.5, 1)))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-0.5, -0.1), st.floats(-0.3, -0.01), st.floats(1.1, 1.5), st.floats(1.01, 1.3))
    def test_crossing_is_rightmost(self, ax, ay, bx, by):
        c = last_graph_crossing(((ax, ay), (bx, by)), depth=16)
        # sample to the right of the bracket: the segment stays above the graph
        hi = float(c.x_bracket[1])
        slope = (by - ay) / (bx - ax)
        side = None
        for x in np.linspace(hi, bx, 40)[1:]:
            y = ay + slope * (x - ax)
            h, _ = extended_cantor_bounds(x, 24)
            s = y > float(h)
            side = s if side is None else side
            assert s == side or abs(y - float(h)) < 1e-6


class TestCsv:
    def test_rects_and_polyline(self, tmp_path):
        write_rects_csv(tmp_path / "r.csv", holey_staircase(), 2)
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "xmin,ymin,xmax,ymax" and len(lines) == 5
        write_polyline_csv(tmp_path / "p.csv", koch_polyline(1))
        assert len((tmp_path / "p.csv").read_text().splitlines()) == 6


def test_direction_normalizes():
    assert direction(3, 4) == pytest.approx((0.6, 0.8))
    with pytest.raises(ValueError):
        direction(0, 0)
