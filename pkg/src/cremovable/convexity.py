"""Sampling-based convexity scans and the diagonal second-difference probe.

A positive midpoint violation with its witness triple disproves convexity.
Everything else here is evidence, not proof.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._rational import as_fraction

__all__ = [
    "Box",
    "SegmentFamily",
    "MidpointScan",
    "WindowSup",
    "SverakProbe",
    "SigmaRho",
    "SeparateConvexity",
    "midpoint_violation_scan",
    "sverak_probe",
    "sigma_rho_check",
    "separate_convexity_check",
]

Fn2 = Callable


@dataclass(frozen=True)
class Box:
    xmin: float
    ymin: float
    xmax: float
    ymax: float


@dataclass(frozen=True)
class SegmentFamily:
    """Segments ``(a, b)``; sample pairs are drawn along one segment at a time."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((tuple(map(float, a)), tuple(map(float, b))) for a, b in self.segments)
        object.__setattr__(self, "segments", segs)


@dataclass(frozen=True)
class MidpointScan:
    worst: float
    p: tuple | None
    q: tuple | None
    samples: int

    @property
    def violated(self) -> bool:
        return self.worst > 0

    @property
    def midpoint(self):
        if self.p is None:
            return None
        return ((self.p[0] + self.q[0]) / 2, (self.p[1] + self.q[1]) / 2)


def _pairs(region, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(region, Box):
        lo = np.array([region.xmin, region.ymin])
        hi = np.array([region.xmax, region.ymax])
        return rng.uniform(lo, hi, (n, 2)), rng.uniform(lo, hi, (n, 2))
    if isinstance(region, SegmentFamily):
        segs = np.array(region.segments, dtype=float)  # (k, 2, 2)
        if len(segs) == 0:
            return np.zeros((0, 2)), np.zeros((0, 2))
        k = rng.integers(0, len(segs), n)
        a, b = segs[k, 0], segs[k, 1]
        s = rng.uniform(0, 1, (n, 1))
        t = rng.uniform(0, 1, (n, 1))
        return a + s * (b - a), a + t * (b - a)
    raise TypeError("region must be a Box or a SegmentFamily")


def _evaluate(f, pts: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        return np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    return np.array([float(f(x, y)) for x, y in pts])


def midpoint_violation_scan(f: Fn2, region, n_samples: int = 1000, seed: int = 0,
                            pairs: Sequence = (), vectorized: bool = False) -> MidpointScan:
    """Largest ``f((p+q)/2) - (f(p) + f(q))/2`` over sampled pairs.

    Explicit ``pairs`` are evaluated first and exactly (with the values ``f``
    returns, so rational-valued functions give rational violations). For a
    :class:`SegmentFamily` the endpoint pair of every segment is included.
    """
    best = None
    explicit = list(pairs)
    if isinstance(region, SegmentFamily):
        explicit += list(region.segments)
    if vectorized and explicit:
        EP = np.array([p for p, _ in explicit], dtype=float)
        EQ = np.array([q for _, q in explicit], dtype=float)
        viol = _evaluate(f, (EP + EQ) / 2, True) - (_evaluate(f, EP, True) + _evaluate(f, EQ, True)) / 2
        i = int(np.argmax(viol))
        best = (float(viol[i]), tuple(map(float, EP[i])), tuple(map(float, EQ[i])))
    elif explicit:
        for p, q in explicit:
            p = tuple(as_fraction(v) for v in p)
            q = tuple(as_fraction(v) for v in q)
            m = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            v = f(*m) - (f(*p) + f(*q)) / 2
            if best is None or v > best[0]:
                best = (v, tuple(map(float, p)), tuple(map(float, q)))
    rng = np.random.default_rng(seed)
    P, Q = _pairs(region, n_samples, rng)
    if len(P):
        M = (P + Q) / 2
        viol = _evaluate(f, M, vectorized) - (_evaluate(f, P, vectorized) + _evaluate(f, Q, vectorized)) / 2
        i = int(np.argmax(viol))
        if best is None or viol[i] > best[0]:
            best = (float(viol[i]), tuple(map(float, P[i])), tuple(map(float, Q[i])))
    total = len(explicit) + len(P)
    if best is None:
        return MidpointScan(float("-inf"), None, None, 0)
    return MidpointScan(best[0], best[1], best[2], total)


# ---------------------------------------------------------------------------
# diagonal probe


@dataclass(frozen=True)
class WindowSup:
    level: int
    sup: float
    t_at_sup: float


@dataclass(frozen=True)
class SverakProbe:
    """Per-window sups of ``r(t) = (g(x+t) + g(x-t) - 2 g(x)) / t`` with ``g(s) = f(s, s)``."""

    x: float
    windows: tuple[WindowSup, ...]
    tol: float
    passed: bool
    samples: tuple = field(default=(), repr=False)

    def rows(self):
        return list(self.samples)


def sverak_probe(f: Fn2, x, L: int = 20, m: int = 32, tol: float = 1e-6,
                 exact: bool = True) -> SverakProbe:
    """Finite transcription of ``liminf_{t->0+} r(t) >= 0`` along the diagonal.

    Window ``n`` is ``(0, 2**-n]`` sampled at ``t = 2**-n * 2**-j`` for
    ``j < m``. The probe passes when every window's sup is at least
    ``-tol``. With ``exact`` the function receives Fractions, so second
    differences at tiny ``t`` do not cancel catastrophically; ``f`` must then
    be closed under rational arithmetic.
    """
    if not 1 <= L <= 40:
        raise ValueError("L must be in [1, 40]")
    if m < 1:
        raise ValueError("m must be positive")
    x = as_fraction(x) if exact else float(x)
    gx = f(x, x)
    cache: dict = {}

    def r(t):
        if t not in cache:
            cache[t] = (f(x + t, x + t) + f(x - t, x - t) - 2 * gx) / t
        return cache[t]

    windows = []
    for n in range(1, L + 1):
        best = None
        for j in range(m):
            t = Fraction(1, 2 ** (n + j)) if exact else 2.0 ** -(n + j)
            val = r(t)
            if best is None or val > best[0]:
                best = (val, t)
        windows.append(WindowSup(n, float(best[0]), float(best[1])))
    passed = all(w.sup >= -tol for w in windows)
    samples = tuple(sorted((float(t), float(v)) for t, v in cache.items()))
    return SverakProbe(float(x), tuple(windows), tol, passed, samples)


@dataclass(frozen=True)
class SigmaRho:
    rows: tuple  # (t, sigma, rho)
    tol: float
    passed: bool


def sigma_rho_check(f: Fn2, t_grid, tol: float = 1e-9) -> SigmaRho:
    """``sigma(t) = f(t,-t) + f(-t,t)`` and ``rho(t) = f(t,t) + f(-t,-t)`` after shifting ``f(0,0)`` to 0."""
    f0 = f(0, 0)
    rows = []
    for t in t_grid:
        sigma = f(t, -t) + f(-t, t) - 2 * f0
        rho = f(t, t) + f(-t, -t) - 2 * f0
        rows.append((t, sigma, rho))
    passed = all(float(s + r) >= -tol for _, s, r in rows)
    return SigmaRho(tuple(rows), tol, passed)


@dataclass(frozen=True)
class SeparateConvexity:
    horizontal: MidpointScan
    vertical: MidpointScan
    tol: float

    @property
    def passed(self) -> bool:
        return self.horizontal.worst <= self.tol and self.vertical.worst <= self.tol

    @property
    def witness(self) -> MidpointScan:
        return self.horizontal if self.horizontal.worst >= self.vertical.worst else self.vertical


def separate_convexity_check(f: Fn2, region: Box = Box(-1, -1, 1, 1), n: int = 2000, seed: int = 0,
                             tol: float = 1e-12, vectorized: bool = False) -> SeparateConvexity:
    """Midpoint scans restricted to horizontal and to vertical segments."""
    rng = np.random.default_rng(seed)

    def family(axis: int) -> SegmentFamily:
        fixed = rng.uniform([region.xmin, region.ymin][1 - axis], [region.xmax, region.ymax][1 - axis], n)
        lo, hi = [region.xmin, region.ymin][axis], [region.xmax, region.ymax][axis]
        segs = []
        for c in fixed:
            a, b = [0.0, 0.0], [0.0, 0.0]
            a[axis], b[axis] = lo, hi
            a[1 - axis] = b[1 - axis] = c
            segs.append((tuple(a), tuple(b)))
        return SegmentFamily(tuple(segs))

    horiz = midpoint_violation_scan(f, family(0), n, seed, vectorized=vectorized)
    vert = midpoint_violation_scan(f, family(1), n, seed + 1, vectorized=vectorized)
    return SeparateConvexity(horiz, vert, tol)
