"""Compact plane sets represented by depth-indexed outer covers.

Every cover is a union of closed oriented boxes (axis-aligned rectangles are
boxes with axis ``(1, 0)``). Because the true set lies inside every cover,
a segment at positive distance from ``cover(g)`` provably misses the set;
zero distance says nothing about the set itself.

Cover coordinates are float64. Distances below :data:`CLEARANCE_EPS` are
treated as touching when a result is used as a certificate.
"""
from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._rational import as_fraction
from .intervals import IntervalSet, TernaryCantorSet, cantor_function, ternary_cantor

__all__ = [
    "Point2",
    "Segment2",
    "Direction",
    "direction",
    "Boxes",
    "Kind",
    "PlaneSetApprox",
    "product_approx",
    "cantor_dust",
    "holey_staircase",
    "koch_polyline",
    "koch_curve",
    "rect_union",
    "segment_clearance",
    "point_clearance",
    "segment_box_distance",
    "point_box_distance",
    "line_box_intervals",
    "extended_cantor_bounds",
    "last_graph_crossing",
    "GraphCrossing",
    "NoSignChange",
    "write_rects_csv",
    "write_polyline_csv",
    "CLEARANCE_EPS",
]

CLEARANCE_EPS = 1e-12
STAIRCASE_MAX_DEPTH = 33  # 3**33 < 2**53 keeps endpoints correctly rounded
KOCH_MAX_DEPTH = 12


class Point2(NamedTuple):
    x: float
    y: float


class Segment2(NamedTuple):
    a: Point2
    b: Point2


class Direction(NamedTuple):
    vx: float
    vy: float


def direction(vx: float, vy: float) -> Direction:
    """Normalize ``(vx, vy)`` to a unit :class:`Direction`."""
    norm = math.hypot(vx, vy)
    if norm == 0 or not math.isfinite(norm):
        raise ValueError(f"not a direction: ({vx}, {vy})")
    d = Direction(vx / norm, vy / norm)
    assert abs(d.vx ** 2 + d.vy ** 2 - 1) <= 1e-12
    return d


_X_AXIS = np.array([1.0, 0.0])


def _as_point(p) -> np.ndarray:
    return np.asarray(p, dtype=float).reshape(2)


# ---------------------------------------------------------------------------
# box geometry kernel


@dataclass(frozen=True)
class Boxes:
    """Closed oriented boxes: ``center + s*axis + t*perp`` with ``|s|<=half[0]``, ``|t|<=half[1]``."""

    center: np.ndarray
    axis: np.ndarray
    half: np.ndarray

    def __post_init__(self):
        for name in ("center", "axis", "half"):
            arr = getattr(self, name)
            if not (isinstance(arr, np.ndarray) and arr.ndim == 2 and arr.dtype == float):
                arr = np.asarray(arr, dtype=float).reshape(-1, 2)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.center)

    @classmethod
    def empty(cls) -> "Boxes":
        z = np.zeros((0, 2))
        return cls(z, z, z)

    @classmethod
    def from_rects(cls, rects) -> "Boxes":
        r = np.asarray(rects, dtype=float).reshape(-1, 4)
        half = (r[:, 2:] - r[:, :2]) / 2
        if (half < 0).any():
            raise ValueError("rectangle with xmax < xmin or ymax < ymin")
        return cls((r[:, :2] + r[:, 2:]) / 2, np.broadcast_to(_X_AXIS, half.shape), half)

    @classmethod
    def around_segments(cls, vertices, radius: float) -> "Boxes":
        """Boxes containing the ``radius``-neighbourhood of each polyline segment."""
        v = np.asarray(vertices, dtype=float)
        a, b = v[:-1], v[1:]
        d = b - a
        length = np.hypot(d[:, 0], d[:, 1])
        axis = d / length[:, None]
        half = np.column_stack([length / 2 + radius, np.full(len(a), radius)])
        return cls((a + b) / 2, axis, half)

    @property
    def perp(self) -> np.ndarray:
        return np.stack([-self.axis[:, 1], self.axis[:, 0]], axis=1)

    def take(self, idx) -> "Boxes":
        return Boxes(self.center[idx], self.axis[idx], self.half[idx])

    def corners(self) -> np.ndarray:
        """(n, 4, 2) corners in counter-clockwise order."""
        u = self.axis * self.half[:, :1]
        w = self.perp * self.half[:, 1:]
        c = self.center
        return np.stack([c - u - w, c + u - w, c + u + w, c - u + w], axis=1)

    def aabb(self) -> np.ndarray:
        """(n, 4) axis-aligned bounds ``xmin, ymin, xmax, ymax``."""
        if len(self) == 0:
            return np.zeros((0, 4))
        ext = np.abs(self.axis) * self.half[:, :1] + np.abs(self.perp) * self.half[:, 1:]
        return np.column_stack([self.center - ext, self.center + ext])

    def project(self, normal) -> tuple[np.ndarray, np.ndarray]:
        """Projection interval of each box onto the unit vector ``normal``."""
        n = _as_point(normal)
        mid = self.center @ n
        rad = self.half[:, 0] * np.abs(self.axis @ n) + self.half[:, 1] * np.abs(self.perp @ n)
        return mid - rad, mid + rad

    def area(self) -> float:
        return float(np.sum(4 * self.half[:, 0] * self.half[:, 1]))

    @staticmethod
    def concat(parts: Sequence["Boxes"]) -> "Boxes":
        parts = [p for p in parts if len(p)]
        if not parts:
            return Boxes.empty()
        return Boxes(np.concatenate([p.center for p in parts]),
                     np.concatenate([p.axis for p in parts]),
                     np.concatenate([p.half for p in parts]))


def _to_local(points: np.ndarray, boxes: Boxes) -> np.ndarray:
    d = points - boxes.center
    return np.stack([np.sum(d * boxes.axis, axis=-1), np.sum(d * boxes.perp, axis=-1)], axis=-1)


def point_box_distance(p, boxes: Boxes) -> np.ndarray:
    loc = _to_local(_as_point(p)[None, :], boxes)
    excess = np.maximum(np.abs(loc) - boxes.half, 0.0)
    return np.hypot(excess[:, 0], excess[:, 1])


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0, np.sum((p - a) * ab, axis=-1) / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * ab
    diff = p - closest
    return np.hypot(diff[..., 0], diff[..., 1])


def _slab_clip(la: np.ndarray, d: np.ndarray, half: np.ndarray, s_lo, s_hi):
    """Clip ``la + s*d`` against ``[-half, half]`` per axis; returns updated bounds."""
    s_lo = np.broadcast_to(np.asarray(s_lo, dtype=float), la.shape[:1]).copy()
    s_hi = np.broadcast_to(np.asarray(s_hi, dtype=float), la.shape[:1]).copy()
    for k in range(2):
        dk = d[:, k]
        lk = la[:, k]
        hk = half[:, k]
        flat = np.abs(dk) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            s1 = (-hk - lk) / np.where(flat, 1.0, dk)
            s2 = (hk - lk) / np.where(flat, 1.0, dk)
        enter = np.where(flat, np.where(np.abs(lk) <= hk, -np.inf, np.inf), np.minimum(s1, s2))
        leave = np.where(flat, np.where(np.abs(lk) <= hk, np.inf, -np.inf), np.maximum(s1, s2))
        s_lo = np.maximum(s_lo, enter)
        s_hi = np.minimum(s_hi, leave)
    return s_lo, s_hi


def segment_box_distance(a, b, boxes: Boxes) -> np.ndarray:
    """Exact Euclidean distance from segment ``[a, b]`` to each box (0 if they meet)."""
    if len(boxes) == 0:
        return np.zeros(0)
    a, b = _as_point(a), _as_point(b)
    la = _to_local(a[None, :], boxes)
    lb = _to_local(b[None, :], boxes)
    s_lo, s_hi = _slab_clip(la, lb - la, boxes.half, 0.0, 1.0)
    hits = s_lo <= s_hi

    h = boxes.half
    excess_a = np.maximum(np.abs(la) - h, 0.0)
    excess_b = np.maximum(np.abs(lb) - h, 0.0)
    dist = np.minimum(np.hypot(excess_a[:, 0], excess_a[:, 1]), np.hypot(excess_b[:, 0], excess_b[:, 1]))
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            corner = np.column_stack([sx * h[:, 0], sy * h[:, 1]])
            dist = np.minimum(dist, _point_segment_distance(corner, la, lb))
    return np.where(hits, 0.0, dist)


def line_box_intervals(p0, u, boxes: Boxes) -> tuple[np.ndarray, np.ndarray]:
    """Parameter ranges ``[s_lo, s_hi]`` where ``p0 + s*u`` lies in each box.

    Boxes the line misses get ``s_lo > s_hi``.
    """
    p0, u = _as_point(p0), _as_point(u)
    lp = _to_local(p0[None, :], boxes)
    du = np.stack([boxes.axis @ u, boxes.perp @ u], axis=-1)
    return _slab_clip(lp, du, boxes.half, -np.inf, np.inf)


# ---------------------------------------------------------------------------
# plane sets


class Kind(str, Enum):
    PRODUCT = "Product"
    HOLEY_STAIRCASE = "HoleyStaircase"
    KOCH_CURVE = "KochCurve"
    RECT_UNION = "RectUnion"


Box2 = tuple[float, float, float, float]


@dataclass
class PlaneSetApprox:
    """A compact set known through outer covers ``cover(g)``.

    ``cover_fn(g)`` builds the full cover; ``near_fn(g, window)`` returns a
    sub-cover that includes every box meeting the window. ``haus_fn(g)``
    bounds the Hausdorff distance between cover and set.
    """

    kind: Kind
    cover_fn: Callable[[int], Boxes]
    haus_fn: Callable[[int], float]
    bbox: Box2
    near_fn: Callable[[int, Box2], Boxes] | None = None
    nearest_fn: Callable | None = None
    max_depth: int = 64
    default_depth: int = 8
    name: str = ""
    graph: Callable[[Fraction, int], tuple[Fraction, Fraction]] | None = None
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _check_depth(self, depth: int) -> int:
        if depth is None:
            depth = self.default_depth
        if not 0 <= depth <= self.max_depth:
            raise ValueError(f"depth {depth} outside [0, {self.max_depth}] for {self.kind.value}")
        return depth

    def cover(self, depth: int | None = None) -> Boxes:
        depth = self._check_depth(depth)
        hit = self._memo.get(depth)
        if hit is not None:
            return hit
        built = self.cover_fn(depth)
        with self._lock:
            # first writer wins so every caller sees the same object
            return self._memo.setdefault(depth, built)

    def cover_near(self, depth: int | None, window: Box2) -> Boxes:
        depth = self._check_depth(depth)
        if self.near_fn is not None and depth not in self._memo:
            return self.near_fn(depth, window)
        boxes = self.cover(depth)
        lo = boxes.aabb()
        x0, y0, x1, y1 = window
        keep = (lo[:, 0] <= x1) & (lo[:, 2] >= x0) & (lo[:, 1] <= y1) & (lo[:, 3] >= y0)
        return boxes.take(np.nonzero(keep)[0])

    def haus_bound(self, depth: int | None = None) -> float:
        return float(self.haus_fn(self._check_depth(depth)))

    def rects(self, depth: int | None = None) -> np.ndarray:
        return self.cover(depth).aabb()

    def contains_point(self, p, depth: int | None = None) -> bool:
        return point_clearance(p, self, depth) <= CLEARANCE_EPS


def _window_around(points: np.ndarray, pad: float) -> Box2:
    return (float(points[:, 0].min() - pad), float(points[:, 1].min() - pad),
            float(points[:, 0].max() + pad), float(points[:, 1].max() + pad))


def _nearest_distance(points: np.ndarray, S: PlaneSetApprox, depth, dist_fn) -> float:
    """Exact minimum of ``dist_fn(boxes)`` over the whole cover.

    Hierarchical kinds use branch and bound; others scan growing windows.
    """
    if S.nearest_fn is not None:
        return S.nearest_fn(S._check_depth(depth), dist_fn)
    bx = S.bbox
    span = max(bx[2] - bx[0], bx[3] - bx[1], 1e-9)
    pad = span * 1e-3
    while True:
        boxes = S.cover_near(depth, _window_around(points, pad))
        if len(boxes):
            d = float(np.min(dist_fn(boxes)))
            if d <= pad:
                return d
            # every box within distance d lies in the window padded by d
            boxes = S.cover_near(depth, _window_around(points, d))
            return float(np.min(dist_fn(boxes)))
        far = max(abs(points[:, 0] - bx[0]).max(), abs(points[:, 0] - bx[2]).max(),
                  abs(points[:, 1] - bx[1]).max(), abs(points[:, 1] - bx[3]).max())
        if pad > 2 * (span + far):
            return math.inf
        pad *= 4


def segment_clearance(seg, S: PlaneSetApprox, depth: int | None = None) -> float:
    """Minimum distance from ``seg`` to ``S.cover(depth)``.

    A value above :data:`CLEARANCE_EPS` certifies that the segment misses the
    true set; zero is inconclusive.
    """
    a, b = _as_point(seg[0]), _as_point(seg[1])
    pts = np.stack([a, b])
    return _nearest_distance(pts, S, depth, lambda boxes: segment_box_distance(a, b, boxes))


def point_clearance(p, S: PlaneSetApprox, depth: int | None = None) -> float:
    p = _as_point(p)
    return _nearest_distance(p[None, :], S, depth, lambda boxes: point_box_distance(p, boxes))


# -- products --------------------------------------------------------------------


def _factor(A) -> Callable[[int], IntervalSet]:
    if callable(A) and not isinstance(A, IntervalSet):
        return A
    if not isinstance(A, IntervalSet):
        A = IntervalSet.from_intervals(A)
    if A.is_empty():
        raise ValueError("product factor is empty")
    return lambda depth: A


def _product_boxes(xs, ys) -> Boxes:
    if not xs or not ys:
        return Boxes.empty()
    xi = np.array([[float(iv.lo), float(iv.hi)] for iv in xs])
    yi = np.array([[float(iv.lo), float(iv.hi)] for iv in ys])
    gx = np.repeat(xi, len(yi), axis=0)
    gy = np.tile(yi, (len(xi), 1))
    return Boxes.from_rects(np.column_stack([gx[:, 0], gy[:, 0], gx[:, 1], gy[:, 1]]))


def product_approx(A, B, haus_bound: Callable[[int], float] | None = None,
                   default_depth: int = 6, name: str = "") -> PlaneSetApprox:
    """Cover of ``A x B`` by the rectangle grid of the factors' intervals.

    ``A`` and ``B`` are interval sets (the cover then *is* the set and the
    Hausdorff bound is 0) or callables ``depth -> IntervalSet`` supplying
    nested approximations, in which case ``haus_bound`` must be given.
    """
    fixed = not (callable(A) and not isinstance(A, IntervalSet)) and \
        not (callable(B) and not isinstance(B, IntervalSet))
    fa, fb = _factor(A), _factor(B)
    if haus_bound is None:
        if not fixed:
            raise ValueError("depth-indexed factors need an explicit haus_bound")
        haus_bound = lambda depth: 0.0  # noqa: E731
    ha, hb = fa(0).hull(), fb(0).hull()
    bbox = (float(ha.lo), float(hb.lo), float(ha.hi), float(hb.hi))

    def cover(depth):
        return _product_boxes(list(fa(depth)), list(fb(depth)))

    def near(depth, window):
        x0, y0, x1, y1 = window
        return _product_boxes(fa(depth).intervals_meeting(Fraction(x0), Fraction(x1)),
                              fb(depth).intervals_meeting(Fraction(y0), Fraction(y1)))

    return PlaneSetApprox(Kind.PRODUCT, cover, haus_bound, bbox, near_fn=near,
                          default_depth=default_depth, name=name or "product")


def cantor_dust(default_depth: int = 6) -> PlaneSetApprox:
    """``C x C`` for the ternary Cantor set ``C``, covered by generation-g squares."""
    return product_approx(ternary_cantor, ternary_cantor,
                          haus_bound=lambda g: math.sqrt(2) * 3.0 ** -g,
                          default_depth=default_depth, name="cantor-dust")


def rect_union(rects, name: str = "rects") -> PlaneSetApprox:
    boxes = Boxes.from_rects(rects)
    r = boxes.aabb()
    bbox = (float(r[:, 0].min()), float(r[:, 1].min()), float(r[:, 2].max()), float(r[:, 3].max()))
    return PlaneSetApprox(Kind.RECT_UNION, lambda depth: boxes, lambda depth: 0.0, bbox,
                          default_depth=0, name=name)


# -- the holey devil's staircase -----------------------------------------------------


def extended_cantor_bounds(x, depth: int) -> tuple[Fraction, Fraction]:
    """Bounds ``(lo, hi)`` on the Cantor function extended by 0 left of 0 and 1 right of 1."""
    x = as_fraction(x)
    if x <= 0:
        return Fraction(0), Fraction(0)
    if x >= 1:
        return Fraction(1), Fraction(1)
    v, e = cantor_function(x, depth)
    return v, v + e


def _staircase_boxes(lo_num: np.ndarray, k: np.ndarray, depth: int) -> Boxes:
    w = 3.0 ** -depth
    h = 2.0 ** -depth
    center = np.stack([lo_num / float(3 ** depth) + w / 2, k / float(2 ** depth) + h / 2], axis=1)
    half = np.broadcast_to(np.array([w / 2, h / 2]), center.shape)
    return Boxes(center, np.broadcast_to(_X_AXIS, center.shape), half)


def _staircase_cover(depth: int) -> Boxes:
    lo = np.zeros(1, dtype=np.int64)
    for _ in range(depth):
        lo = np.stack([3 * lo, 3 * lo + 2], axis=1).reshape(-1)
    return _staircase_boxes(lo, np.arange(1 << depth, dtype=np.int64), depth)


def _staircase_near(depth: int, window: Box2) -> Boxes:
    x0, y0, x1, y1 = window
    lo = np.zeros(1, dtype=np.int64)
    k = np.zeros(1, dtype=np.int64)
    for level in range(depth + 1):
        sx, sy = float(3 ** level), float(2 ** level)
        keep = (lo / sx <= x1) & ((lo + 1) / sx >= x0) & (k / sy <= y1) & ((k + 1) / sy >= y0)
        lo, k = lo[keep], k[keep]
        if level == depth or len(lo) == 0:
            break
        lo = np.stack([3 * lo, 3 * lo + 2], axis=1).reshape(-1)
        k = np.stack([2 * k, 2 * k + 1], axis=1).reshape(-1)
    if len(lo) == 0:
        return Boxes.empty()
    return _staircase_boxes(lo, k, depth)


def _staircase_nearest(depth: int, dist_fn) -> float:
    """Branch and bound over the rectangle hierarchy.

    A node's rectangle bounds the distance of all its descendants from
    below; its lower-left and upper-right corners lie on the set, so their
    distances bound the answer from above.
    """
    lo = np.zeros(1, dtype=np.int64)
    k = np.zeros(1, dtype=np.int64)
    for level in range(depth + 1):
        boxes = _staircase_boxes(lo, k, level)
        d_lo = dist_fn(boxes)
        if level == depth:
            return float(d_lo.min())
        pts = np.concatenate([boxes.center - boxes.half, boxes.center + boxes.half])
        corners = Boxes(pts, np.broadcast_to(_X_AXIS, pts.shape), np.zeros_like(pts))
        upper = float(dist_fn(corners).min())
        # slack absorbs rounding between the two distance formulas
        keep = d_lo <= upper * (1 + 1e-9) + 1e-15
        lo, k = lo[keep], k[keep]
        lo = np.stack([3 * lo, 3 * lo + 2], axis=1).reshape(-1)
        k = np.stack([2 * k, 2 * k + 1], axis=1).reshape(-1)
    raise AssertionError("unreachable")  # pragma: no cover


def holey_staircase(depth: int = 10) -> PlaneSetApprox:
    """Graph of the Cantor function over the Cantor set.

    ``cover(g)`` is the union over generation-g Cantor intervals ``I`` of
    ``I x h(I)``: ``2**g`` rectangles of width ``3**-g`` and height ``2**-g``.
    ``depth`` only sets the default query depth.
    """
    return PlaneSetApprox(
        Kind.HOLEY_STAIRCASE, _staircase_cover,
        lambda g: math.sqrt(9.0 ** -g + 4.0 ** -g),
        (0.0, 0.0, 1.0, 1.0),
        near_fn=_staircase_near,
        nearest_fn=_staircase_nearest,
        max_depth=STAIRCASE_MAX_DEPTH,
        default_depth=depth,
        name="holey-staircase",
        graph=extended_cantor_bounds,
    )


# -- Koch curve ---------------------------------------------------------------------


def koch_polyline(depth: int) -> np.ndarray:
    """Generation-``depth`` Koch polyline from (0, 0) to (3, 0), bumps pointing up.

    Returns ``(4**depth + 1, 2)`` vertices.
    """
    if not 0 <= depth <= KOCH_MAX_DEPTH:
        raise ValueError(f"depth must be in [0, {KOCH_MAX_DEPTH}]")
    pts = np.array([0.0 + 0.0j, 3.0 + 0.0j])
    turn = np.exp(1j * np.pi / 3)
    for _ in range(depth):
        a, b = pts[:-1], pts[1:]
        third = (b - a) / 3
        out = np.empty(4 * len(a) + 1, dtype=complex)
        out[0:-1:4] = a
        out[1::4] = a + third
        out[2::4] = a + third + third * turn
        out[3::4] = a + 2 * third
        out[-1] = pts[-1]
        pts = out
    return np.column_stack([pts.real, pts.imag])


def koch_curve(depth: int = 6) -> PlaneSetApprox:
    """Koch curve covered by boxes around the generation-g polyline.

    Each box contains the ``3**(1-g)``-neighbourhood of one segment, which is
    also the advertised Hausdorff bound. The bound is an engineering choice
    (the limit curve stays within one segment length of the polyline), not
    something derived here.
    """
    def cover(g):
        return Boxes.around_segments(koch_polyline(g), 3.0 ** (1 - g))

    height = math.sqrt(3) / 2 * (1 + 1 / 3)
    return PlaneSetApprox(Kind.KOCH_CURVE, cover, lambda g: 3.0 ** (1 - g),
                          (0.0, -0.1, 3.0, height), max_depth=KOCH_MAX_DEPTH,
                          default_depth=depth, name="koch")


# -- last crossing with the graph of the extended Cantor function ---------------------


class NoSignChange(ValueError):
    """Segment endpoints are not strictly on opposite sides of the graph."""


@dataclass(frozen=True)
class GraphCrossing:
    """Rightmost crossing of a segment with the staircase graph.

    ``point`` lies on the segment; the true rightmost crossing has its
    x-coordinate inside ``x_bracket``. ``residual`` bounds ``|y - H(x)|`` at
    ``point``.
    """

    point: Point2
    x_bracket: tuple[Fraction, Fraction]
    residual: Fraction
    nodes: int


def _sign(lo: Fraction, hi: Fraction) -> int:
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    return 0


def last_graph_crossing(seg, depth: int = 20, max_levels: int | None = None) -> GraphCrossing:
    """Locate the crossing with the largest x between a segment and graph(H).

    ``H`` is the Cantor function, extended by 0 on the left and 1 on the
    right. The search bisects the segment parameter (never x, so steep
    segments are fine), visiting the right half first and discarding pieces
    on which ``y - H(x)`` provably keeps one sign.
    """
    a, b = seg
    ax, ay, bx, by = (as_fraction(v) for v in (a[0], a[1], b[0], b[1]))
    if ax == bx:
        raise ValueError("vertical segments are not supported")
    if ax > bx:
        ax, ay, bx, by = bx, by, ax, ay
    dx, dy = bx - ax, by - ay
    h_depth = depth + 3
    x_tol = Fraction(1, 2 ** depth)
    phi_tol = 2 * x_tol
    max_levels = max_levels or 4 * depth + 40

    cache: dict[Fraction, tuple[Fraction, Fraction, Fraction]] = {}

    def at(t: Fraction):
        hit = cache.get(t)
        if hit is None:
            x = ax + t * dx
            lo, hi = extended_cantor_bounds(x, h_depth)
            hit = cache[t] = (ay + t * dy, lo, hi)
        return hit

    def end_sign(t):
        for extra in (0, 20, 60, 200):
            x = ax + t * dx
            y = ay + t * dy
            lo, hi = extended_cantor_bounds(x, h_depth + extra)
            s = _sign(y - hi, y - lo)
            if s:
                return s
            if lo == hi:
                break
        raise NoSignChange("segment endpoint lies on the graph")

    s_left, s_right = end_sign(Fraction(0)), end_sign(Fraction(1))
    if s_left == s_right:
        raise NoSignChange("both endpoints on the same side of the graph")

    def bounds(t0, t1):
        y0, lo0, _ = at(t0)
        y1, _, hi1 = at(t1)
        return min(y0, y1) - hi1, max(y0, y1) - lo0

    stack = [(Fraction(0), Fraction(1), 0)]
    leaf = None
    nodes = 0
    while stack:
        t0, t1, level = stack.pop()
        nodes += 1
        lo, hi = bounds(t0, t1)
        if lo > 0 or hi < 0:
            continue
        if ((t1 - t0) * dx <= x_tol and hi - lo <= phi_tol) or level >= max_levels:
            leaf = (t0, t1)
            break
        mid = (t0 + t1) / 2
        stack.append((t0, mid, level + 1))
        stack.append((mid, t1, level + 1))
    if leaf is None:
        raise ArithmeticError("no crossing found despite a sign change")  # pragma: no cover

    # find a point left of the leaf with the opposite sign to close the bracket
    t_right = leaf[1]
    t_opp = None
    y, lo, hi = at(leaf[0])
    if _sign(y - hi, y - lo) == s_left:
        t_opp = leaf[0]
    while t_opp is None and stack:
        t0, t1, level = stack.pop()
        nodes += 1
        lo, hi = bounds(t0, t1)
        s = _sign(lo, hi)
        if s:
            if s == s_left:
                t_opp = t1
            continue
        y, plo, phi = at(t0)
        if _sign(y - phi, y - plo) == s_left:
            t_opp = t0
            continue
        if level < max_levels:
            mid = (t0 + t1) / 2
            stack.append((t0, mid, level + 1))
            stack.append((mid, t1, level + 1))
    if t_opp is None:
        t_opp = Fraction(0)

    tm = (leaf[0] + leaf[1]) / 2
    y, lo, hi = at(tm)
    residual = max(abs(y - lo), abs(y - hi))
    x = ax + tm * dx
    return GraphCrossing(Point2(float(x), float(y)), (ax + t_opp * dx, ax + t_right * dx),
                         residual, nodes)


# -- CSV export --------------------------------------------------------------------


def write_rects_csv(path, S: PlaneSetApprox, depth: int | None = None) -> None:
    rects = S.rects(depth)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xmin", "ymin", "xmax", "ymax"])
        for row in rects:
            w.writerow([repr(float(v)) for v in row])


def write_polyline_csv(path, vertices) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in np.asarray(vertices, dtype=float):
            w.writerow([repr(float(x)), repr(float(y))])
