from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cremovable import counterexample as cx
from cremovable.convexity import (
    Box,
    SegmentFamily,
    midpoint_violation_scan,
    separate_convexity_check,
    sigma_rho_check,
    sverak_probe,
)
from cremovable.intervals import fat_cantor


def neg_xy(x, y):
    return -x * y


def sq(x, y):
    return x * x + y * y


def saddle(x, y):
    return x * x - y * y


class TestMidpointScan:
    def test_convex_function_never_violates(self):
        scan = midpoint_violation_scan(sq, Box(-1, -1, 1, 1), 2000, vectorized=True)
        assert not scan.violated and scan.samples == 2000

    def test_neg_xy_violates_on_diagonal(self):
        scan = midpoint_violation_scan(neg_xy, Box(-1, -1, 1, 1), 10, pairs=[((-1, -1), (1, 1))])
        assert scan.worst == 1  # f(0,0) - (f(-1,-1) + f(1,1))/2 = 0 - (-1)
        assert scan.midpoint == (0, 0)

    def test_segment_family_includes_endpoints(self):
        fam = SegmentFamily((((-1, -1), (1, 1)),))
        scan = midpoint_violation_scan(neg_xy, fam, 0)
        assert scan.samples == 1 and scan.worst == 1

    def test_counterexample_exact_violation(self):
        P = cx.build_params(fat_cantor(Fraction(1, 12), 5)[1])
        scan = midpoint_violation_scan(lambda x, y: cx.eval_f(P, (x, y)), Box(-1, -1, 1, 1), 0,
                                       pairs=[((-1, -1), (1, 1))])
        assert scan.worst == Fraction(11, 128)

    def test_empty(self):
        scan = midpoint_violation_scan(sq, SegmentFamily(()), 10)
        assert scan.worst == float("-inf") and scan.p is None

    def test_bad_region(self):
        with pytest.raises(TypeError):
            midpoint_violation_scan(sq, (0, 0, 1, 1), 10)


class TestSverak:
    def test_neg_xy_passes(self):
        for x in np.linspace(-1, 1, 5):
            assert sverak_probe(neg_xy, x).passed

    def test_concave_kink_fails(self):
        pr = sverak_probe(lambda x, y: -abs(x + y), 0, L=5)
        assert not pr.passed

    def test_kink_passes_with_positive_sup(self):
        pr = sverak_probe(lambda x, y: abs(x) + abs(y), 0, L=5)
        assert pr.passed and min(w.sup for w in pr.windows) == 4

    def test_window_grid(self):
        pr = sverak_probe(sq, Fraction(1, 3), L=3, m=4)
        assert [w.level for w in pr.windows] == [1, 2, 3]
        assert len(pr.rows()) == 6  # t = 2^-1 .. 2^-6

    def test_validation(self):
        with pytest.raises(ValueError):
            sverak_probe(sq, 0, L=0)
        with pytest.raises(ValueError):
            sverak_probe(sq, 0, m=0)

    @settings(max_examples=30)
    @given(st.fractions(-1, 1, max_denominator=50), st.fractions(0, 3, max_denominator=10),
           st.fractions(0, 3, max_denominator=10))
    def test_convex_quadratics_pass(self, x, a, c):
        f = lambda u, v: a * u * u + c * v * v  # noqa: E731
        assert sverak_probe(f, x, L=6, m=6).passed


class TestSigmaRho:
    def test_neg_xy(self):
        res = sigma_rho_check(neg_xy, [Fraction(1, 2 ** k) for k in range(10)])
        # sigma = 2t^2 and rho = -2t^2 cancel exactly
        assert res.passed and all(s + r == 0 for _, s, r in res.rows)

    def test_concave_fails(self):
        assert not sigma_rho_check(lambda x, y: -(x * x) - y * y, [Fraction(1, 2)]).passed


class TestSeparate:
    def test_saddle_fails(self):
        res = separate_convexity_check(saddle, vectorized=True)
        assert not res.passed and res.witness is res.vertical

    def test_neg_xy_and_hinge_pass(self):
        assert separate_convexity_check(neg_xy, vectorized=True).passed
        assert separate_convexity_check(lambda x, y: np.maximum(x + y, 0), vectorized=True).passed
