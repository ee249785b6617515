from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cremovable import koch


def L_oracle(k):
    """Sum-free form of the lower bound, built from the closed-form product."""
    P = lambda m: Fraction(2 * 3 ** m, 3 ** m + 1)  # noqa: E731
    return 3 ** k * P(k) - 2 * sum(3 ** m * P(m) for m in range(k))


class TestProducts:
    def test_small_values(self):
        assert [koch.koch_product(k) for k in range(3)] == [1, Fraction(3, 2), Fraction(9, 5)]

    @given(st.integers(0, 64))
    def test_closed_form(self, k):
        assert koch.koch_product(k) == Fraction(2 * 3 ** k, 3 ** k + 1)

    def test_limits(self):
        with pytest.raises(ValueError):
            koch.koch_product(65)
        with pytest.raises(ValueError):
            koch.koch_lower_bound(0)


class TestLowerBound:
    def test_values(self):
        assert koch.koch_lower_bound(1) == Fraction(5, 2)
        assert koch.koch_lower_bound(2) == Fraction(26, 5)

    @given(st.integers(1, 64))
    def test_at_least_2k(self, k):
        L = koch.koch_lower_bound(k)
        assert L == L_oracle(k) and L >= 2 * k

    def test_table_and_csv(self, tmp_path):
        rows = koch.bounds_table(5)
        assert rows[0] == (1, Fraction(5, 2), 2)
        koch.write_bounds_csv(tmp_path / "b.csv", 3)
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert lines == ["k,L,2k", "1,5/2,2", "2,26/5,4", lines[3]]


class TestRecurrence:
    def test_stepwise_examples(self):
        assert koch.recurrence_propagate(1, 1) == Fraction(3, 2)
        assert koch.recurrence_propagate(1, 2) == 6

    def test_iterated_is_lower_bound(self):
        for k in range(1, 21):
            assert koch.recurrence_propagate(k, 1, form="iterated") == koch.koch_lower_bound(k)

    @given(st.integers(1, 30), st.fractions(1, 100, max_denominator=50))
    def test_affine_in_terminal(self, k, T):
        for form in ("stepwise", "iterated"):
            a, b = koch.recurrence_affine(k, form)
            assert koch.recurrence_propagate(k, T, form) == a * T + b

    @given(st.integers(1, 30), st.fractions(1, 10, max_denominator=20))
    def test_monotone_in_terminal(self, k, T):
        assert koch.recurrence_propagate(k, T + 1) > koch.recurrence_propagate(k, T)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            koch.recurrence_propagate(3, Fraction(1, 2))
        with pytest.raises(ValueError):
            koch.recurrence_affine(3, "other")


class TestQSqrt3:
    def test_arithmetic(self):
        s = koch.SQRT3
        assert s * s == 3
        assert (1 + s) * (1 - s) == -2
        assert float(2 * s - 1) == pytest.approx(2 * 3 ** 0.5 - 1)

    @given(st.fractions(-10, 10, max_denominator=30), st.fractions(-10, 10, max_denominator=30))
    def test_sign_matches_float(self, q, r):
        v = koch.QSqrt3(q, r)
        f = float(q) + float(r) * 3 ** 0.5
        if abs(f) > 1e-9:
            assert v.sign() == (1 if f > 0 else -1)
        if q == 0 and r == 0:
            assert v.sign() == 0

    def test_ordering(self):
        assert koch.QSqrt3(1, 0) < koch.SQRT3 < koch.QSqrt3(2, 0)


class TestLandmarks:
    def test_derived(self):
        lm = koch.landmarks(1)
        assert lm.b == (Fraction(1, 6), koch.SQRT3 * Fraction(-1, 9))
        assert lm.u == (Fraction(1, 2), koch.SQRT3 * Fraction(-1, 9))
        assert lm.p == (Fraction(1, 6), 0)

    def test_literal(self):
        lm = koch.landmarks(2, u_rule="literal")
        assert lm.u == lm.b

    def test_floats_and_validation(self):
        fl = koch.landmarks(0).as_floats()
        assert fl["z"] == pytest.approx((0, 3 ** 0.5 / 3))
        with pytest.raises(ValueError):
            koch.landmarks(-1)
        with pytest.raises(ValueError):
            koch.landmarks(1, u_rule="x")
