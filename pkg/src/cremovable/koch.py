"""Exact divergent lower bounds tied to the Koch curve.

The central quantities are

    P(k) = prod_{j<k} (3^{j+1} + 3) / (3^{j+1} + 1)  =  2 * 3^k / (3^k + 1)
    L(k) = 3^k P(k) - 2 * sum_{m<k} 3^m P(m)

with ``L(k) >= 2k``, so ``L(k) -> infinity``. ``L`` is also what a downward
recurrence produces from a terminal value 1. Landmark points of the curve
live in Q[sqrt 3] and are kept exact.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ._rational import as_fraction

__all__ = [
    "MAX_K",
    "ratio",
    "koch_product",
    "koch_product_closed",
    "koch_lower_bound",
    "recurrence_propagate",
    "recurrence_affine",
    "stepwise_closed_form",
    "bounds_table",
    "write_bounds_csv",
    "QSqrt3",
    "SQRT3",
    "KochLandmarks",
    "landmarks",
]

MAX_K = 64


def _check_k(k: int, lo: int) -> None:
    if not lo <= k <= MAX_K:
        raise ValueError(f"k must be in [{lo}, {MAX_K}]")


def ratio(j: int) -> Fraction:
    return Fraction(3 ** (j + 1) + 3, 3 ** (j + 1) + 1)


@lru_cache(maxsize=None)
def _partial_product(k: int) -> Fraction:
    if k == 0:
        return Fraction(1)
    return _partial_product(k - 1) * ratio(k - 1)


def koch_product_closed(k: int) -> Fraction:
    return Fraction(2 * 3 ** k, 3 ** k + 1)


def koch_product(k: int) -> Fraction:
    """``P(k)`` by multiplying the factors, checked against ``2 * 3^k / (3^k + 1)``."""
    _check_k(k, 0)
    prod = _partial_product(k)
    if prod != koch_product_closed(k):
        raise ArithmeticError(f"product and closed form disagree at k={k}")
    return prod


def koch_lower_bound(k: int) -> Fraction:
    """``L(k)``, asserted to be at least ``2k``."""
    _check_k(k, 1)
    value = 3 ** k * koch_product(k) - 2 * sum(
        (3 ** m * koch_product(m) for m in range(k)), Fraction(0))
    if value < 2 * k:
        raise ArithmeticError(f"L({k}) = {value} is below {2 * k}")
    return value


def recurrence_affine(k: int, form: str = "stepwise") -> tuple[Fraction, Fraction]:
    """``B_0 = a * B_k + b`` as exact coefficients ``(a, b)``.

    ``"stepwise"``: ``B_i = r_i (3 B_{i+1} - 2)``.
    ``"iterated"``: ``B_i = 3 r_i B_{i+1} - 2``.
    """
    a, b = Fraction(1), Fraction(0)
    for i in reversed(range(k)):
        r = ratio(i)
        if form == "stepwise":
            a, b = 3 * r * a, r * (3 * b - 2)
        elif form == "iterated":
            a, b = 3 * r * a, 3 * r * b - 2
        else:
            raise ValueError(f"unknown form {form!r}")
    return a, b


def stepwise_closed_form(k: int, terminal) -> Fraction:
    """Expansion of the stepwise recurrence: ``3^k P(k) T - 2 sum_{m<k} 3^m P(m+1)``."""
    T = as_fraction(terminal)
    return 3 ** k * _partial_product(k) * T - 2 * sum(
        (3 ** m * _partial_product(m + 1) for m in range(k)), Fraction(0))


def recurrence_propagate(k: int, terminal=1, form: str = "stepwise") -> Fraction:
    """Run the recurrence down from ``B_k = terminal`` and return ``B_0``.

    Both forms are checked against their symbolic expansions; with
    ``terminal = 1`` the iterated form equals :func:`koch_lower_bound`.
    """
    _check_k(k, 1)
    T = as_fraction(terminal)
    if T < 1:
        raise ValueError("terminal value must be at least 1")
    B = T
    for i in reversed(range(k)):
        r = ratio(i)
        B = r * (3 * B - 2) if form == "stepwise" else 3 * r * B - 2
    a, b = recurrence_affine(k, form)
    if B != a * T + b:
        raise ArithmeticError("recurrence disagrees with its affine expansion")
    if form == "stepwise" and B != stepwise_closed_form(k, T):
        raise ArithmeticError("stepwise recurrence disagrees with its closed form")
    if form == "iterated" and T == 1 and B != koch_lower_bound(k):
        raise ArithmeticError("iterated recurrence disagrees with L(k)")
    return B


def bounds_table(k_max: int) -> list[tuple[int, Fraction, int]]:
    return [(k, koch_lower_bound(k), 2 * k) for k in range(1, k_max + 1)]


def write_bounds_csv(path, k_max: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "L", "2k"])
        for k, L, two_k in bounds_table(k_max):
            w.writerow([k, f"{L.numerator}/{L.denominator}", two_k])


# ---------------------------------------------------------------------------
# Q[sqrt 3]


@dataclass(frozen=True)
class QSqrt3:
    """``q + r * sqrt(3)`` with rational ``q``, ``r``."""

    q: Fraction = Fraction(0)
    r: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "q", as_fraction(self.q))
        object.__setattr__(self, "r", as_fraction(self.r))

    @staticmethod
    def lift(v) -> "QSqrt3":
        return v if isinstance(v, QSqrt3) else QSqrt3(as_fraction(v), 0)

    def __add__(self, other):
        o = QSqrt3.lift(other)
        return QSqrt3(self.q + o.q, self.r + o.r)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.q, -self.r)

    def __sub__(self, other):
        return self + (-QSqrt3.lift(other))

    def __rsub__(self, other):
        return QSqrt3.lift(other) - self

    def __mul__(self, other):
        o = QSqrt3.lift(other)
        return QSqrt3(self.q * o.q + 3 * self.r * o.r, self.q * o.r + self.r * o.q)

    __rmul__ = __mul__

    def sign(self) -> int:
        """Exact sign of ``q + r sqrt 3``."""
        q, r = self.q, self.r
        if q >= 0 and r >= 0:
            return 0 if q == 0 and r == 0 else 1
        if q <= 0 and r <= 0:
            return -1
        # opposite signs: compare q^2 with 3 r^2
        s = q * q - 3 * r * r
        if s == 0:
            return 0
        return (1 if q > 0 else -1) if s > 0 else (1 if r > 0 else -1)

    def __eq__(self, other):
        try:
            o = QSqrt3.lift(other)
        except TypeError:
            return NotImplemented
        return self.q == o.q and self.r == o.r

    def __hash__(self):
        return hash((self.q, self.r))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __float__(self):
        return float(self.q) + float(self.r) * math.sqrt(3)

    def __repr__(self):
        return f"QSqrt3({self.q} + {self.r}*sqrt3)"


SQRT3 = QSqrt3(0, 1)

Pt = tuple[QSqrt3, QSqrt3]


def _pt(x, y) -> Pt:
    return QSqrt3.lift(x), QSqrt3.lift(y)


@dataclass(frozen=True)
class KochLandmarks:
    i: int
    a: Pt
    b: Pt
    u: Pt
    z: Pt
    s: Pt
    p: Pt
    u_rule: str

    def as_floats(self) -> dict[str, tuple[float, float]]:
        return {name: (float(v[0]), float(v[1])) for name, v in
                (("a", self.a), ("b", self.b), ("u", self.u), ("z", self.z), ("s", self.s), ("p", self.p))}


def landmarks(i: int, u_rule: str = "derived") -> KochLandmarks:
    """Exact landmark points at scale ``i``.

    ``u_rule="derived"`` places ``u`` three times as far from the axis as
    ``b`` on the same horizontal line, which is the placement that makes the
    two convexity inequalities of the recurrence consistent.
    ``u_rule="literal"`` makes ``u`` coincide with ``b``.
    """
    if i < 0:
        raise ValueError("i must be nonnegative")
    half = Fraction(1, 2 * 3 ** i)
    low = SQRT3 * Fraction(-1, 3 ** (i + 1))
    top = SQRT3 * Fraction(1, 3)
    a = _pt(0, low)
    b = _pt(half, low)
    if u_rule == "derived":
        u = _pt(3 * half, low)
    elif u_rule == "literal":
        u = b
    else:
        raise ValueError(f"unknown u_rule {u_rule!r}")
    z = _pt(0, top)
    s = _pt(half, top)
    p = _pt(half, 0)
    assert p[1] == 0
    assert s[1] == top
    assert a[1] == b[1]
    assert s[0] == b[0]
    return KochLandmarks(i, a, b, u, z, s, p, u_rule)
