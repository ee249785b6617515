"""Searches for segments that dodge a plane set, and line-trace scans.

A returned :class:`TransparencyWitness` is a proof: its segment has positive
distance from an outer cover, hence from the set. Failing to find one only
yields :class:`Unknown`, never a claim that the set is not thin.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import qmc

from .intervals import ternary_cantor
from .plane import (
    CLEARANCE_EPS,
    Boxes,
    Direction,
    PlaneSetApprox,
    Point2,
    direction,
    line_box_intervals,
    segment_clearance,
)
from .report import INCONCLUSIVE, PASS, Report

__all__ = [
    "ThinnessQuery",
    "TransparencyWitness",
    "Unknown",
    "LineCount",
    "find_transparent_segment",
    "directional_thinness_scan",
    "totally_disconnected_scan",
    "line_intersection_count",
    "line_trace",
    "halton",
]

RESOLUTION_NOTE = (
    "depth-indexed semantics: witnesses are certified against outer covers; "
    "missing witnesses are inconclusive"
)


def halton(n: int, d: int, seed: int) -> np.ndarray:
    """First ``n`` points of a scrambled Halton sequence in ``[0, 1)^d``."""
    if n <= 0:
        return np.zeros((0, d))
    return qmc.Halton(d=d, scramble=True, rng=np.random.default_rng(seed)).random(n)


@dataclass(frozen=True)
class ThinnessQuery:
    x: Point2
    y: Point2
    eps: float
    direction: Direction | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", Point2(float(self.x[0]), float(self.x[1])))
        object.__setattr__(self, "y", Point2(float(self.y[0]), float(self.y[1])))
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        dx, dy = self.y.x - self.x.x, self.y.y - self.x.y
        if dx == 0 and dy == 0:
            raise ValueError("query endpoints coincide")
        if self.direction is not None:
            v = direction(*self.direction)
            object.__setattr__(self, "direction", v)
            cross = (dx * v.vy - dy * v.vx) / math.hypot(dx, dy)
            if abs(cross) > 1e-9:
                raise ValueError("query endpoints are not parallel to the direction")


@dataclass(frozen=True)
class TransparencyWitness:
    x_prime: Point2
    y_prime: Point2
    clearance: float
    depth: int


@dataclass(frozen=True)
class Unknown:
    depth_max: int
    tried: int


def _blocked_offsets(x: np.ndarray, D: np.ndarray, n: np.ndarray, boxes: Boxes):
    """Offsets ``xi`` for which the segment ``[x + xi*n, x + xi*n + D]`` meets each box.

    The set is ``{xi : xi*n in box - x - [0,1]*D}``, a line through a
    zonotope, which is the intersection of three slabs.
    """
    cz = boxes.center - x - D / 2
    g1 = boxes.axis * boxes.half[:, :1]
    g2 = boxes.perp * boxes.half[:, 1:]
    nd = np.array([-D[1], D[0]])
    normals = [boxes.perp, boxes.axis, np.broadcast_to(nd, boxes.center.shape)]
    lo = np.full(len(boxes), -np.inf)
    hi = np.full(len(boxes), np.inf)
    for nu in normals:
        a = nu @ n
        b = np.sum(nu * cz, axis=1)
        r = np.abs(np.sum(nu * g1, axis=1)) + np.abs(np.sum(nu * g2, axis=1)) + np.abs(nu @ (D / 2))
        flat = np.abs(a) < 1e-15
        safe = np.where(flat, 1.0, a)
        e1, e2 = (b - r) / safe, (b + r) / safe
        inside = np.abs(b) <= r
        lo = np.maximum(lo, np.where(flat, np.where(inside, -np.inf, np.inf), np.minimum(e1, e2)))
        hi = np.minimum(hi, np.where(flat, np.where(inside, np.inf, -np.inf), np.maximum(e1, e2)))
    keep = lo <= hi
    return lo[keep], hi[keep]


def _widest_free(lo_b: np.ndarray, hi_b: np.ndarray, lo: float, hi: float):
    """Widest open sub-interval of ``(lo, hi)`` avoiding all closed ``[lo_b, hi_b]``."""
    order = np.argsort(lo_b)
    best = None
    cursor = lo
    for a, b in zip(lo_b[order], hi_b[order]):
        if a > cursor and (best is None or a - cursor > best[1] - best[0]):
            best = (cursor, min(a, hi))
        cursor = max(cursor, b)
        if cursor >= hi:
            break
    if cursor < hi and (best is None or hi - cursor > best[1] - best[0]):
        best = (cursor, hi)
    if best is None or best[1] <= best[0]:
        return None
    return best


def find_transparent_segment(q: ThinnessQuery, S: PlaneSetApprox, budget: int = 64, seed: int = 0,
                             max_depth: int = 10, min_depth: int = 1):
    """Look for ``x'`` near ``q.x`` and ``y'`` near ``q.y`` with ``[x', y']`` missing ``S``.

    Candidates are ``x' = x + xi*n`` and ``y' = y + (xi + kappa)*n`` with
    ``n`` normal to ``y - x``. For each tilt ``kappa`` (0 first, then a
    scrambled Halton sequence) the offsets ``xi`` blocked by the cover form
    a union of intervals, so the widest free offset is found exactly. The
    chosen segment is then re-measured against the whole cover.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    x = np.array(q.x, dtype=float)
    y = np.array(q.y, dtype=float)
    D0 = y - x
    n = np.array([-D0[1], D0[0]]) / math.hypot(*D0)
    eps = q.eps * (1 - 1e-9)
    kappas = np.concatenate([[0.0], (2 * halton(budget - 1, 1, seed)[:, 0] - 1) * 2 * eps])
    window = (min(x[0], y[0]) - q.eps, min(x[1], y[1]) - q.eps,
              max(x[0], y[0]) + q.eps, max(x[1], y[1]) + q.eps)
    top = min(max_depth, S.max_depth)
    tried = 0
    for depth in range(max(min_depth, 0), top + 1):
        boxes = S.cover_near(depth, window)
        for kappa in kappas:
            lo = max(-eps, -eps - kappa)
            hi = min(eps, eps - kappa)
            if hi <= lo:
                continue
            tried += 1
            D = D0 + kappa * n
            free = _widest_free(*_blocked_offsets(x, D, n, boxes), lo, hi)
            if free is None:
                continue
            xi = (free[0] + free[1]) / 2
            a = x + xi * n
            b = a + D
            clr = segment_clearance((a, b), S, depth)
            if clr > CLEARANCE_EPS:
                return TransparencyWitness(Point2(*map(float, a)), Point2(*map(float, b)), clr, depth)
    return Unknown(top, tried)


def _lines_through_bbox(S: PlaneSetApprox, v: Direction, count: int, seed: int, margin: float = 0.25):
    x0, y0, x1, y1 = S.bbox
    pts = halton(count, 2, seed)
    base = np.column_stack([x0 - margin + pts[:, 0] * (x1 - x0 + 2 * margin),
                            y0 - margin + pts[:, 1] * (y1 - y0 + 2 * margin)])
    half = math.hypot(x1 - x0, y1 - y0) + margin
    return base, half


def directional_thinness_scan(S: PlaneSetApprox, v, n_queries: int = 50,
                              eps_grid=(0.1, 0.01), seed: int = 0, budget: int = 64,
                              max_depth: int = 10) -> Report:
    """Query pairs parallel to ``v`` spread over the bounding box, at every ``eps``."""
    start = time.perf_counter()
    v = direction(*v)
    if n_queries < 0:
        raise ValueError("n_queries must be >= 0")
    base, half = _lines_through_bbox(S, v, n_queries, seed)
    vec = np.array(v)
    witnesses, unknowns = [], []
    depth_used = 0
    for i, p in enumerate(base):
        for eps in eps_grid:
            q = ThinnessQuery(Point2(*(p - half * vec)), Point2(*(p + half * vec)), float(eps), v)
            res = find_transparent_segment(q, S, budget=budget, seed=seed + i, max_depth=max_depth)
            entry = {"x": q.x, "y": q.y, "eps": float(eps)}
            if isinstance(res, TransparencyWitness):
                entry.update(x_prime=res.x_prime, y_prime=res.y_prime,
                             clearance=res.clearance, depth=res.depth)
                witnesses.append(entry)
                depth_used = max(depth_used, res.depth)
            else:
                unknowns.append(entry)
    total = len(witnesses) + len(unknowns)
    verdict = PASS if total and not unknowns else INCONCLUSIVE
    return Report(
        command="thinness-scan",
        verdict=verdict,
        inputs={"set": S.name, "v": v, "n_queries": n_queries, "eps_grid": list(eps_grid)},
        witnesses=witnesses,
        metrics={"queries": total, "witnesses": len(witnesses), "unknowns": len(unknowns),
                 "depth_max": depth_used, "unknown_queries": unknowns,
                 "consistent_with_thin": verdict == PASS},
        seed=seed,
        settings={"budget": budget, "max_depth": max_depth},
        notes=[RESOLUTION_NOTE],
        wall_time=time.perf_counter() - start,
    )


def line_trace(p0, u, boxes: Boxes) -> list[tuple[float, float]]:
    """Connected components of ``{p0 + s*u}`` intersected with the boxes, as s-intervals."""
    if len(boxes) == 0:
        return []
    lo, hi = line_box_intervals(p0, u, boxes)
    keep = lo <= hi
    lo, hi = lo[keep], hi[keep]
    order = np.argsort(lo)
    runs: list[list[float]] = []
    for a, b in zip(lo[order], hi[order]):
        if runs and a <= runs[-1][1]:
            runs[-1][1] = max(runs[-1][1], b)
        else:
            runs.append([float(a), float(b)])
    return [(a, b) for a, b in runs]


def totally_disconnected_scan(S: PlaneSetApprox, v, resolution: float, n_lines: int = 50,
                              depth: int | None = None, seed: int = 0) -> Report:
    """Longest connected run of line traces parallel to ``v``, per cover depth.

    Short runs at the final depth are evidence of disconnected traces; long
    runs are inconclusive because covers are fat.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    start = time.perf_counter()
    v = direction(*v)
    depth = S.default_depth if depth is None else depth
    base, _ = _lines_through_bbox(S, v, n_lines, seed)
    u = np.array(v)
    per_depth = []
    monotone = True
    last = None
    worst_line = None
    for g in range(0, depth + 1):
        boxes = S.cover(g)
        longest = np.array([max((b - a for a, b in line_trace(p, u, boxes)), default=0.0) for p in base])
        if last is not None and np.any(longest > last + 1e-12):
            monotone = False
        last = longest
        per_depth.append({"depth": g, "longest_run": float(longest.max(initial=0.0))})
        if g == depth and len(longest):
            worst_line = int(np.argmax(longest))
    final = per_depth[-1]["longest_run"]
    verdict = PASS if n_lines > 0 and monotone and final < resolution else INCONCLUSIVE
    witnesses = []
    if worst_line is not None:
        witnesses.append({"line_point": Point2(*base[worst_line]), "direction": v,
                          "longest_run": float(last[worst_line])})
    return Report(
        command="disconnect-scan",
        verdict=verdict,
        inputs={"set": S.name, "v": v, "resolution": resolution, "n_lines": n_lines},
        witnesses=witnesses,
        metrics={"runs": per_depth, "runs_nonincreasing": monotone,
                 "consistent": verdict == PASS},
        seed=seed,
        settings={"depth": depth},
        notes=[RESOLUTION_NOTE],
        wall_time=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class LineCount:
    lower: int
    upper: int
    depth: int


def _is_dyadic(c: Fraction) -> bool:
    d = c.denominator
    return d & (d - 1) == 0


def _graph_lower(a: np.ndarray, b: np.ndarray, graph, depth: int) -> int:
    """Points of the staircase set certainly on the line through ``a`` and ``b``."""
    ax, ay, bx, by = (Fraction(float(v)) for v in (*a, *b))
    if ay == by:
        c = ay
        if c < 0 or c > 1:
            return 0
        # the Cantor function takes each dyadic value in (0, 1) at both ends of one gap
        return 2 if 0 < c < 1 and _is_dyadic(c) else 1
    if ax == bx or (by - ay) / (bx - ax) <= 0:
        return 0
    # An increasing line that is above the graph at some x and below it
    # further right has its last crossing in between on a Cantor point:
    # crossing downward on a plateau would need a negative slope.
    slope = (by - ay) / (bx - ax)
    g = min(depth, _LOWER_PROBE_DEPTH)
    xs = [Fraction(0)] + [iv_end for iv in ternary_cantor(g) for iv_end in (iv.lo, iv.hi)] + [Fraction(1)]
    above_seen = False
    for x in xs:
        y = ay + slope * (x - ax)
        lo, hi = graph(x, 40)
        if y > hi:
            above_seen = True
        elif y < lo and above_seen:
            return 1
    return 0


_LOWER_PROBE_DEPTH = 10


def line_intersection_count(line, S: PlaneSetApprox, depth: int | None = None) -> LineCount:
    """Bounds on the number of points where the full line meets ``S``.

    ``upper`` counts connected components of the line inside ``cover(depth)``
    (evidence only, since components could hold infinitely many points).
    ``lower`` uses exact facts about the graph kind and is 0 otherwise.
    """
    a = np.asarray(line[0], dtype=float)
    b = np.asarray(line[1], dtype=float)
    d = b - a
    norm = math.hypot(*d)
    if norm == 0:
        raise ValueError("degenerate line")
    depth = S.default_depth if depth is None else depth
    upper = len(line_trace(a, d / norm, S.cover(depth)))
    lower = _graph_lower(a, b, S.graph, depth) if S.graph is not None else 0
    lower = min(lower, upper)
    return LineCount(lower, upper, depth)
