"""A non-convex function that is locally convex off ``K x K``.

``K`` is ``[-1, 1]`` minus finitely many open gaps ``(w_i - eps_i, w_i + eps_i)``.
The function is

    f = -xy + f_1 + f_2 + f_3 + f_4 + sum_i (g_i + h_i)

where the ``f_j`` are one-sided quadratic walls outside ``[-1, 1]^2``, ``g_i``
is a vertical stripe bump around ``x = w_i`` and ``h_i`` its transpose. All
pieces except ``-xy`` are convex and C^1. Evaluation is exact when given
:class:`~fractions.Fraction` inputs.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rational import as_fraction, frac_str, parse_frac
from .intervals import GapList
from .plane import Point2

__all__ = [
    "BETA_MAX",
    "EPS_SUM_MAX",
    "ALPHA_MIN",
    "Orientation",
    "StripeTerm",
    "CounterexampleParams",
    "Hessian2",
    "OnBoundary",
    "Case",
    "ConvexityCertificate",
    "NonconvexityGap",
    "TooFewGaps",
    "InfeasibleCap",
    "PointInsideObstacle",
    "UnsatisfiableF",
    "eval_g",
    "eval_h",
    "eval_outer",
    "eval_f",
    "eval_f_batch",
    "hessian_at",
    "hessian_batch",
    "certify_local_convexity",
    "check_certificate",
    "in_obstacle",
    "nonconvexity_gap",
    "nonconvexity_gap_raw",
    "stripe_delta",
    "tail_bound",
    "build_params",
    "write_slice_csv",
]

BETA_MAX = Fraction(1, 80)
EPS_SUM_MAX = Fraction(1, 24)
ALPHA_MIN = Fraction(9, 40)
BETA_TOTAL = Fraction(1, 4)


class TooFewGaps(ValueError):
    pass


class InfeasibleCap(ValueError):
    pass


class PointInsideObstacle(ValueError):
    pass


class UnsatisfiableF(ArithmeticError):
    pass


class Orientation(str, Enum):
    VERTICAL = "Vertical"
    HORIZONTAL = "Horizontal"


@dataclass(frozen=True)
class StripeTerm:
    beta: Fraction
    eps: Fraction
    w: Fraction
    orientation: Orientation = Orientation.VERTICAL

    def __post_init__(self):
        for name in ("beta", "eps", "w"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 0 < self.beta < BETA_MAX:
            raise ValueError(f"beta {self.beta} outside (0, 1/80)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if abs(self.w) < self.eps:
            raise ValueError("stripe contains 0")
        if self.w - self.eps < -1 or self.w + self.eps > 1:
            raise ValueError("stripe leaves [-1, 1]")

    def __call__(self, p):
        fn = eval_g if self.orientation is Orientation.VERTICAL else eval_h
        return fn(self.beta, self.eps, self.w, p)


@dataclass(frozen=True)
class CounterexampleParams:
    gaps: GapList
    betas: tuple[Fraction, ...]

    def __post_init__(self):
        betas = tuple(as_fraction(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)
        if len(betas) != len(self.gaps):
            raise ValueError("one beta per gap is required")
        if len(betas) < 21:
            raise TooFewGaps(f"{len(betas)} gaps cannot carry total weight 1/4 below 1/80 each")
        for b in betas:
            if not 0 < b < BETA_MAX:
                raise ValueError(f"beta {b} outside (0, 1/80)")
        if sum(betas, Fraction(0)) != BETA_TOTAL:
            raise ValueError("betas must sum to exactly 1/4")
        if self.gaps.eps_sum() >= EPS_SUM_MAX:
            raise ValueError("sum of gap half-lengths must stay below 1/24")
        floats = (np.array([float(b) for b in betas]),
                  np.array([float(e) for e in self.epss]),
                  np.array([float(w) for w in self.ws]))
        object.__setattr__(self, "_floats", floats)
        lines = [float(v) for w, e in self.gaps for v in (w - e, w + e)] + [-1.0, 1.0]
        object.__setattr__(self, "_lines", np.array(lines))

    @property
    def n(self) -> int:
        return len(self.betas)

    @property
    def ws(self) -> tuple[Fraction, ...]:
        return self.gaps.centers

    @property
    def epss(self) -> tuple[Fraction, ...]:
        return self.gaps.half_lengths

    def terms(self) -> list[StripeTerm]:
        out = []
        for b, (w, e) in zip(self.betas, self.gaps):
            out.append(StripeTerm(b, e, w, Orientation.VERTICAL))
            out.append(StripeTerm(b, e, w, Orientation.HORIZONTAL))
        return out

    def arrays(self):
        """Float arrays ``(beta, eps, w)`` for batch evaluation."""
        return self._floats

    def to_json(self) -> dict:
        return {"gaps": self.gaps.to_json(), "betas": [frac_str(b) for b in self.betas]}

    @classmethod
    def from_json(cls, data: dict) -> "CounterexampleParams":
        return cls(GapList.from_json(data["gaps"]), tuple(parse_frac(b) for b in data["betas"]))


# ---------------------------------------------------------------------------
# evaluation


def _bump(beta, eps, u, v):
    """The stripe profile with ``u`` across the stripe and ``v`` along it."""
    if u <= -eps:
        return beta * v * v - 2 * eps * u - eps * eps
    if u < eps:
        return beta * v * v + u * u
    return beta * v * v + 2 * eps * u - eps * eps


def eval_g(beta, eps, w, p):
    x, y = p
    return _bump(beta, eps, x - w, y)


def eval_h(beta, eps, w, p):
    x, y = p
    return _bump(beta, eps, y - w, x)


def _wall(x, y):
    return Fraction(1, 12) * x * x + (4 * (y - 1) ** 2 if y > 1 else 0)


def eval_outer(i: int, p):
    x, y = p
    if i == 1:
        return _wall(x, y)
    if i == 2:
        return _wall(x, -y)
    if i == 3:
        return _wall(y, x)
    if i == 4:
        return _wall(y, -x)
    raise ValueError("outer index must be 1, 2, 3 or 4")


def _coords(p, exact: bool):
    if exact:
        return as_fraction(p[0]), as_fraction(p[1])
    return float(p[0]), float(p[1])


def eval_f(params: CounterexampleParams, p, exact: bool = True):
    """``f(p)``; exact rational when ``exact`` (the default)."""
    x, y = _coords(p, exact)
    total = -x * y + sum(eval_outer(i, (x, y)) for i in (1, 2, 3, 4))
    for b, (w, e) in zip(params.betas, params.gaps):
        if not exact:
            b, w, e = float(b), float(w), float(e)
        total += _bump(b, e, x - w, y) + _bump(b, e, y - w, x)
    return total


def _bump_batch(beta, eps, u, v):
    quad = beta * v * v
    lin = 2 * eps * np.abs(u) - eps * eps
    return quad + np.where(np.abs(u) < eps, u * u, lin)


def eval_f_batch(params: CounterexampleParams, pts) -> np.ndarray:
    """Float evaluation at an ``(n, 2)`` array of points."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    beta, eps, w = params.arrays()
    out = -x * y + (x * x + y * y) / 6
    out += 4 * (np.maximum(y - 1, 0) ** 2 + np.maximum(-y - 1, 0) ** 2
                + np.maximum(x - 1, 0) ** 2 + np.maximum(-x - 1, 0) ** 2)
    X, Y = x[:, None], y[:, None]
    out += _bump_batch(beta, eps, X - w, Y).sum(axis=1)
    out += _bump_batch(beta, eps, Y - w, X).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# Hessians


@dataclass(frozen=True)
class Hessian2:
    fxx: Fraction
    fxy: Fraction
    fyy: Fraction

    @property
    def det(self):
        return self.fxx * self.fyy - self.fxy * self.fxy

    def is_psd(self, tol=0) -> bool:
        return self.fxx >= -tol and self.fyy >= -tol and self.det >= -tol


@dataclass(frozen=True)
class OnBoundary:
    """The point lies on a line where some second derivative jumps."""

    lines: tuple[str, ...]


@dataclass(frozen=True)
class Subfamily:
    """Which terms of ``f`` to include; ``None`` index sets mean all."""

    outer: tuple[int, ...] = (1, 2, 3, 4)
    g: tuple[int, ...] | None = None
    h: tuple[int, ...] | None = None


FULL = Subfamily()


def hessian_at(params: CounterexampleParams, p, family: Subfamily = FULL) -> Hessian2 | OnBoundary:
    """Exact Hessian of ``f`` (or of a subfamily of its terms) at ``p``."""
    x, y = as_fraction(p[0]), as_fraction(p[1])
    fxx = fyy = Fraction(0)
    touching = []
    for i in family.outer:
        # walls 1, 2 add x^2/12; 3, 4 add y^2/12; each has one quadratic side
        var, side = {1: (y, 1), 2: (y, -1), 3: (x, 1), 4: (x, -1)}[i]
        if var == side:
            touching.append(f"{'y' if i < 3 else 'x'}={side}")
            continue
        active = Fraction(8) if var * side > 1 else Fraction(0)
        if i < 3:
            fxx += Fraction(1, 6)
            fyy += active
        else:
            fyy += Fraction(1, 6)
            fxx += active
    g_idx = range(params.n) if family.g is None else family.g
    h_idx = range(params.n) if family.h is None else family.h
    for i in g_idx:
        w, e = params.gaps.gaps[i]
        if x in (w - e, w + e):
            touching.append(f"x=w[{i}]{'-' if x < w else '+'}eps[{i}]")
        fyy += 2 * params.betas[i]
        if abs(x - w) < e:
            fxx += 2
    for i in h_idx:
        w, e = params.gaps.gaps[i]
        if y in (w - e, w + e):
            touching.append(f"y=w[{i}]{'-' if y < w else '+'}eps[{i}]")
        fxx += 2 * params.betas[i]
        if abs(y - w) < e:
            fyy += 2
    if touching:
        return OnBoundary(tuple(touching))
    return Hessian2(fxx, Fraction(-1), fyy)


def hessian_batch(params: CounterexampleParams, pts, family: Subfamily = FULL):
    """Float Hessians at ``(n, 2)`` points; returns ``(fxx, fxy, fyy)`` arrays.

    Points on boundary lines get the value from one side; callers sample
    away from them.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    fxx = np.zeros(len(pts))
    fyy = np.zeros(len(pts))
    for i in family.outer:
        if i == 1:
            fxx += 1 / 6
            fyy += 8 * (y > 1)
        elif i == 2:
            fxx += 1 / 6
            fyy += 8 * (y < -1)
        elif i == 3:
            fyy += 1 / 6
            fxx += 8 * (x > 1)
        else:
            fyy += 1 / 6
            fxx += 8 * (x < -1)
    beta, eps, w = params.arrays()
    g_idx = np.arange(params.n) if family.g is None else np.asarray(family.g, dtype=int)
    h_idx = np.arange(params.n) if family.h is None else np.asarray(family.h, dtype=int)
    if len(g_idx):
        fyy += 2 * beta[g_idx].sum()
        fxx += 2 * (np.abs(x[:, None] - w[g_idx]) < eps[g_idx]).sum(axis=1)
    if len(h_idx):
        fxx += 2 * beta[h_idx].sum()
        fyy += 2 * (np.abs(y[:, None] - w[h_idx]) < eps[h_idx]).sum(axis=1)
    return fxx, np.full(len(pts), -1.0), fyy


# ---------------------------------------------------------------------------
# certificates


class Case(str, Enum):
    OUTER_TOP = "OuterTop"
    OUTER_BOTTOM = "OuterBottom"
    OUTER_RIGHT = "OuterRight"
    OUTER_LEFT = "OuterLeft"
    STRIPE = "StripeBased"


@dataclass(frozen=True)
class ConvexityCertificate:
    """``f`` is convex on the open ball ``B(point, radius)``.

    The subfamily ``-xy + (listed terms)`` has Hessian determinant at least
    ``det_bound`` and positive ``fxx`` throughout the ball; the remaining
    terms of ``f`` are convex.
    """

    point: Point2
    case: Case
    F: tuple[int, ...]
    alpha_F: Fraction
    det_bound: Fraction
    radius: Fraction
    stripe: int | None = None
    stripe_orientation: Orientation | None = None
    family: Subfamily = field(default=FULL, repr=False)

    def to_json(self) -> dict:
        return {
            "point": [self.point.x, self.point.y],
            "case": self.case.value,
            "F_size": len(self.F),
            "alpha_F": frac_str(self.alpha_F),
            "det_bound": frac_str(self.det_bound),
            "radius": frac_str(self.radius),
            "stripe": self.stripe,
            "stripe_orientation": self.stripe_orientation.value if self.stripe_orientation else None,
        }


def in_obstacle(params: CounterexampleParams, x) -> bool:
    """``x`` lies in ``K = [-1, 1]`` minus the open gaps."""
    x = as_fraction(x)
    return -1 <= x <= 1 and params.gaps.gap_index_containing(x) is None


def det_bound_for(alpha: Fraction) -> Fraction:
    return 4 * (alpha + alpha * alpha) - 1


_OUTER = {
    Case.OUTER_TOP: (1, lambda x, y: y - 1),
    Case.OUTER_BOTTOM: (2, lambda x, y: -y - 1),
    Case.OUTER_RIGHT: (3, lambda x, y: x - 1),
    Case.OUTER_LEFT: (4, lambda x, y: -x - 1),
}


def _stripe_certificate(params, point, across, along, k, orientation):
    """Certificate when ``across`` lies inside gap ``k`` (vertical: across = x)."""
    w, e = params.gaps.gaps[k]
    radius = min(across - (w - e), (w + e) - across)
    # boundaries of the transverse stripes running through the point
    F = []
    for i, (wi, ei) in enumerate(params.gaps.gaps):
        d = min(abs(along - (wi - ei)), abs(along - (wi + ei)))
        if d == 0:
            continue
        F.append(i)
        radius = min(radius, d)
    alpha = sum((params.betas[i] for i in F), Fraction(0))
    if alpha <= ALPHA_MIN:
        raise UnsatisfiableF(f"admissible weight {alpha} does not exceed 9/40")
    extra = () if k in F else (k,)
    if orientation is Orientation.VERTICAL:
        family = Subfamily(outer=(), g=tuple(F) + extra, h=tuple(F))
    else:
        family = Subfamily(outer=(), g=tuple(F), h=tuple(F) + extra)
    return ConvexityCertificate(point, Case.STRIPE, tuple(F), alpha, det_bound_for(alpha),
                                radius, k, orientation, family)


def certify_local_convexity(params: CounterexampleParams, p) -> ConvexityCertificate:
    """A ball around ``p`` on which ``f`` is provably convex.

    Every applicable case is tried and the one with the largest radius wins.
    """
    x, y = as_fraction(p[0]), as_fraction(p[1])
    if in_obstacle(params, x) and in_obstacle(params, y):
        raise PointInsideObstacle(f"({x}, {y}) lies in K x K")
    point = Point2(float(x), float(y))
    candidates = []
    for case, (i, dist) in _OUTER.items():
        r = dist(x, y)
        if r > 0:
            # -xy plus one wall: Hessian (1/6, -1; -1, 8), determinant 1/3
            candidates.append(ConvexityCertificate(point, case, (), Fraction(0), Fraction(1, 3), r,
                                                   family=Subfamily(outer=(i,), g=(), h=())))
    kx = params.gaps.gap_index_containing(x)
    if kx is not None:
        candidates.append(_stripe_certificate(params, point, x, y, kx, Orientation.VERTICAL))
    ky = params.gaps.gap_index_containing(y)
    if ky is not None:
        candidates.append(_stripe_certificate(params, point, y, x, ky, Orientation.HORIZONTAL))
    if not candidates:  # pragma: no cover - excluded by the obstacle test
        raise PointInsideObstacle(f"no case applies at ({x}, {y})")
    return max(candidates, key=lambda c: c.radius)


def _sample_ball(rng, center, radius: float, n: int) -> np.ndarray:
    ang = rng.uniform(0, 2 * np.pi, n)
    rad = radius * np.sqrt(rng.uniform(0, 1, n)) * (1 - 1e-9)
    return np.column_stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)])


def _off_boundaries(params, pts, tol=1e-12):
    lines = params._lines
    dx = np.abs(pts[:, :1] - lines).min(axis=1)
    dy = np.abs(pts[:, 1:] - lines).min(axis=1)
    return (dx > tol) & (dy > tol)


def check_certificate(params: CounterexampleParams, cert: ConvexityCertificate, n: int = 200,
                      rng=None, tol: float = 1e-9) -> bool:
    """Sample the ball and confirm the certified subfamily and the full Hessian are PSD."""
    rng = np.random.default_rng(rng)
    pts = _sample_ball(rng, cert.point, float(cert.radius), n)
    pts = pts[_off_boundaries(params, pts)]
    fxx, fxy, fyy = hessian_batch(params, pts, cert.family)
    det = fxx * fyy - fxy * fxy
    if np.any(fxx <= 0) or np.any(det < float(cert.det_bound) - tol):
        return False
    fxx, fxy, fyy = hessian_batch(params, pts)
    det = fxx * fyy - fxy * fxy
    return bool(np.all(fxx >= -tol) and np.all(fyy >= -tol) and np.all(det >= -tol))


# ---------------------------------------------------------------------------
# the non-convexity witness


def stripe_delta(beta, eps, w) -> Fraction:
    """Midpoint excess of one stripe term between (-1,-1), (1,1) and (0,0)."""
    beta, eps, w = as_fraction(beta), as_fraction(eps), as_fraction(w)
    return beta + 2 * eps * (1 - abs(w))


@dataclass(frozen=True)
class NonconvexityGap:
    G: Fraction
    closed_form: Fraction
    sum_delta: Fraction

    @property
    def midpoint_violation(self) -> Fraction:
        return -self.G / 2


def nonconvexity_gap_raw(betas: Sequence, epss: Sequence, ws: Sequence) -> NonconvexityGap:
    """``f(-1,-1) + f(1,1) - 2 f(0,0)`` for arbitrary stripe data, evaluated directly.

    Stripes must avoid 0 and stay inside ``[-1, 1]`` for the closed form to
    apply; disjointness and the weight constraints are not needed here.
    """
    betas = [as_fraction(b) for b in betas]
    epss = [as_fraction(e) for e in epss]
    ws = [as_fraction(w) for w in ws]
    for b, e, w in zip(betas, epss, ws):
        if abs(w) < e or w - e < -1 or w + e > 1:
            raise ValueError("each stripe must avoid 0 and stay inside [-1, 1]")

    def f(x, y):
        total = -x * y + sum(eval_outer(i, (x, y)) for i in (1, 2, 3, 4))
        for b, e, w in zip(betas, epss, ws):
            total += eval_g(b, e, w, (x, y)) + eval_h(b, e, w, (x, y))
        return total

    one = Fraction(1)
    G = f(-one, -one) + f(one, one) - 2 * f(Fraction(0), Fraction(0))
    sum_delta = sum((stripe_delta(b, e, w) for b, e, w in zip(betas, epss, ws)), Fraction(0))
    closed = Fraction(-4, 3) + 4 * sum_delta
    if G != closed:
        raise ArithmeticError(f"direct gap {G} disagrees with closed form {closed}")
    return NonconvexityGap(G, closed, sum_delta)


def nonconvexity_gap(params: CounterexampleParams) -> NonconvexityGap:
    res = nonconvexity_gap_raw(params.betas, params.epss, params.ws)
    one = Fraction(1)
    direct = eval_f(params, (-one, -one)) + eval_f(params, (one, one)) - 2 * eval_f(params, (0, 0))
    assert direct == res.G
    assert res.G < 0
    return res


def tail_bound(tail_beta_sum, tail_eps_sum, R) -> tuple[Fraction, Fraction]:
    """Bracket on the omitted stripe terms ``sum_{i>N} (g_i + h_i)`` over ``[-R, R]^2``.

    Each omitted ``g_i`` (and ``h_i``) is nonnegative with maximum below
    ``beta_i R^2 + 4 R eps_i``, so the sum lies in ``[0, 2(B R^2 + 4 R E)]``.
    """
    b, e, R = as_fraction(tail_beta_sum), as_fraction(tail_eps_sum), as_fraction(R)
    if R < 1:
        raise ValueError("R must be at least 1")
    if b < 0 or e < 0:
        raise ValueError("tail sums must be nonnegative")
    return Fraction(0), 2 * (b * R * R + 4 * R * e)


# ---------------------------------------------------------------------------
# parameter construction


def build_params(gaps: GapList, policy: str = "uniform",
                 margin: Fraction = Fraction(1, 8000)) -> CounterexampleParams:
    """Choose weights ``beta_i`` summing to exactly 1/4, each below 1/80.

    ``"uniform"`` gives every gap ``1/(4N)``. ``"proportional"`` splits 1/4
    in proportion to gap length, capping each weight at ``1/80 - margin`` and
    handing the excess to the uncapped gaps.
    """
    n = len(gaps)
    policy = policy.lower()
    if policy == "uniform":
        if n <= 20:
            raise TooFewGaps(f"uniform weights need at least 21 gaps, got {n}")
        return CounterexampleParams(gaps, tuple(BETA_TOTAL / n for _ in range(n)))
    if policy not in ("proportional", "proportionalcapped", "proportional-capped"):
        raise ValueError(f"unknown policy {policy!r}")
    cap = BETA_MAX - as_fraction(margin)
    if cap <= 0 or n * cap < BETA_TOTAL:
        raise InfeasibleCap(f"{n} gaps capped at {cap} cannot reach 1/4")
    weights = list(gaps.half_lengths)
    betas: list[Fraction | None] = [None] * n
    remaining = BETA_TOTAL
    while True:
        free = [i for i in range(n) if betas[i] is None]
        total = sum((weights[i] for i in free), Fraction(0))
        over = [i for i in free if remaining * weights[i] / total > cap]
        if not over:
            for i in free:
                betas[i] = remaining * weights[i] / total
            break
        for i in over:
            betas[i] = cap
            remaining -= cap
    return CounterexampleParams(gaps, tuple(betas))


def write_slice_csv(path, params: CounterexampleParams, p0, v, ts) -> None:
    """Rows ``(t, f(p0 + t v))`` for plotting a line slice."""
    p0 = np.asarray(p0, dtype=float)
    v = np.asarray(v, dtype=float)
    ts = np.asarray(ts, dtype=float)
    vals = eval_f_batch(params, p0 + ts[:, None] * v)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for t, val in zip(ts, vals):
            w.writerow([repr(float(t)), repr(float(val))])
