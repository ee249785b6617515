"""Numerical continuous extension across a thin obstacle.

A :class:`PartialFn` is only ever evaluated at points whose distance from an
outer cover of the obstacle is certified positive. The value at an obstacle
point is read off from shrinking balls around it.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convexity import MidpointScan
from .plane import CLEARANCE_EPS, Direction, PlaneSetApprox, direction, point_clearance
from .report import INCONCLUSIVE, PASS, VIOLATION, Report

__all__ = [
    "PartialFn",
    "Extension",
    "ExtensionFailed",
    "extend_at",
    "extended_values",
    "extension_report",
    "cover_depth_for_radius",
]

PRECONDITION_NOTE = "local convexity of the input off the obstacle is assumed, not verified"


@dataclass(frozen=True)
class PartialFn:
    """``fn`` defined off ``obstacle``; ``fn(x, y)`` must accept numpy arrays."""

    fn: Callable
    obstacle: PlaneSetApprox | None = None
    v: Direction = Direction(1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "v", direction(*self.v))


@dataclass(frozen=True)
class Extension:
    value: float
    radius: float
    oscillation: float
    levels: int
    samples: int


class ExtensionFailed(RuntimeError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


def cover_depth_for_radius(S: PlaneSetApprox, radius: float) -> int:
    """Smallest depth whose Hausdorff bound is below an eighth of ``radius`` (capped)."""
    for g in range(0, S.max_depth + 1):
        if S.haus_bound(g) <= radius / 8:
            return g
    return S.max_depth


def _free_mask(S: PlaneSetApprox, depth: int, pts: np.ndarray) -> np.ndarray:
    """Points certified to be farther than the clearance threshold from ``cover(depth)``."""
    pad = 4 * CLEARANCE_EPS
    window = (float(pts[:, 0].min() - pad), float(pts[:, 1].min() - pad),
              float(pts[:, 0].max() + pad), float(pts[:, 1].max() + pad))
    boxes = S.cover_near(depth, window)
    if len(boxes) == 0:
        return np.ones(len(pts), dtype=bool)
    d = pts[:, None, :] - boxes.center[None, :, :]
    loc = np.stack([np.sum(d * boxes.axis, axis=-1), np.sum(d * boxes.perp, axis=-1)], axis=-1)
    excess = np.maximum(np.abs(loc) - boxes.half, 0.0)
    dist = np.hypot(excess[..., 0], excess[..., 1]).min(axis=1)
    return dist > CLEARANCE_EPS


def _clear_of(S: PlaneSetApprox, x: np.ndarray, depth: int = 16) -> bool:
    """Certified clear of the obstacle; points very close to it count as not clear.

    Treating near points as obstacle points is harmless: the extension of a
    continuous function agrees with the function there.
    """
    for g in (min(4, depth), min(depth, S.max_depth)):
        if point_clearance(x, S, g) > CLEARANCE_EPS:
            return True
    return False


def extend_at(pf: PartialFn, x, tol: float = 1e-6, budget: int = 20000, seed: int = 0,
              r0: float = 0.25, per_level: int = 32, max_levels: int = 60) -> Extension:
    """Value of the continuous extension of ``pf`` at ``x``.

    Ball ``n`` has radius ``r0 * 2**-n``; levels are skipped when the
    observed spread is far above ``tol``. In each ball, offsets ``d`` are
    drawn (half along the privileged direction, half uniformly in the disk)
    and pairs ``x +- d`` that are certified clear of the obstacle are
    evaluated. Once the spread of the sampled values drops below ``tol`` the
    mean of the pair averages is returned. Pair averages cancel the linear
    part of a smooth function, so the error is second order in the radius.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float).reshape(2)
    S = pf.obstacle
    if S is None or _clear_of(S, x):
        return Extension(float(pf.fn(x[:1], x[1:])[0]), 0.0, 0.0, 0, 1)
    rng = np.random.default_rng([seed, *np.frombuffer(x.tobytes(), dtype=np.uint32).tolist()])
    v = np.array(pf.v)
    used = 0
    prev_osc = math.inf
    stalled = 0
    last_free = 0
    n = 0
    while n < max_levels:
        r = r0 * 2.0 ** -n
        depth = cover_depth_for_radius(S, r)
        if S.haus_bound(depth) > r / 8:
            raise ExtensionFailed("OscillationStalled", f"cover resolution exhausted at radius {r:.3g}")
        if used + 2 * per_level > budget:
            break
        half = per_level // 2
        along = (rng.uniform(-1, 1, half) * r)[:, None] * v
        ang = rng.uniform(0, 2 * np.pi, per_level - half)
        rad = r * np.sqrt(rng.uniform(0, 1, per_level - half))
        disk = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        d = np.concatenate([along, disk])
        plus, minus = x + d, x - d
        pts = np.concatenate([plus, minus])
        used += len(pts)
        free = _free_mask(S, depth, pts)
        fp, fm = free[:per_level], free[per_level:]
        both = fp & fm
        last_free = int(free.sum())
        if not free.any():
            n += 1
            continue
        vals = np.full(len(pts), np.nan)
        vals[free] = pf.fn(pts[free, 0], pts[free, 1])
        osc = float(np.nanmax(vals) - np.nanmin(vals))
        if osc < tol:
            if both.any():
                value = float(np.mean((vals[:per_level][both] + vals[per_level:][both]) / 2))
            else:
                value = float((np.nanmax(vals) + np.nanmin(vals)) / 2)
            return Extension(value, r, osc, n + 1, used)
        stalled = stalled + 1 if osc >= prev_osc else 0
        prev_osc = osc
        if stalled >= 8:
            raise ExtensionFailed("OscillationStalled", f"oscillation {osc:.3g} not shrinking")
        # skip levels assuming the spread scales at least linearly with the radius
        n += max(1, int(math.log2(osc / tol)))
    if last_free == 0:
        raise ExtensionFailed("NoNearbyFreePoints", f"no certified free sample near {tuple(x)}")
    raise ExtensionFailed("OscillationStalled", f"budget {budget} exhausted before oscillation < {tol}")


def extended_values(pf: PartialFn, pts, tol: float = 1e-6, seed: int = 0, **kw) -> np.ndarray:
    """Evaluate the extension at many points, calling ``pf`` directly where allowed."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    return np.array([extend_at(pf, p, tol=tol, seed=seed, **kw).value for p in pts])


def extension_report(pf: PartialFn, sample_points, tol: float = 1e-6, seeds=(0, 1),
                     n_segments: int = 100, segments=(), seed: int = 0,
                     midpoint_tol: float = 1e-9) -> Report:
    """Consistency of :func:`extend_at` across seeds, plus a midpoint scan of the extension.

    Scan triples are centred on the sample points (so the midpoint needs the
    extension) with random directions and half-lengths; explicit
    ``segments`` are scanned as well.
    """
    start = time.perf_counter()
    pts = np.asarray(sample_points, dtype=float).reshape(-1, 2)
    values, spreads, failures = [], [], []
    for p in pts:
        runs = []
        for s in seeds:
            try:
                runs.append(extend_at(pf, p, tol=tol, seed=s).value)
            except ExtensionFailed as exc:
                failures.append({"point": tuple(p), "seed": s, "reason": exc.reason})
        if runs:
            values.append(runs[0])
            spreads.append(max(runs) - min(runs))
    consistent = not failures and all(sp <= 3 * tol for sp in spreads)

    rng = np.random.default_rng(seed)
    triples = []
    if len(pts):
        centers = pts[rng.integers(0, len(pts), n_segments)]
        ang = rng.uniform(0, 2 * np.pi, n_segments)
        half = rng.uniform(0.05, 0.5, n_segments)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)]) * half[:, None]
        triples += [(c - d, c + d) for c, d in zip(centers, dirs)]
    triples += [(np.asarray(a, float), np.asarray(b, float)) for a, b in segments]
    worst = None
    for p, q in triples:
        m = (p + q) / 2
        ev = extended_values(pf, np.stack([p, q, m]), tol=tol, seed=seed)
        viol = float(ev[2] - (ev[0] + ev[1]) / 2)
        if worst is None or viol > worst.worst:
            worst = MidpointScan(viol, tuple(map(float, p)), tuple(map(float, q)), 0)
    worst_val = worst.worst if worst else float("-inf")

    witnesses = []
    if worst is not None and worst_val > midpoint_tol:
        verdict = VIOLATION
        witnesses.append({"p": worst.p, "q": worst.q, "midpoint": worst.midpoint, "violation": worst_val})
    elif consistent and len(pts):
        verdict = PASS
    else:
        verdict = INCONCLUSIVE
    return Report(
        command="extend",
        verdict=verdict,
        inputs={"points": len(pts), "segments": len(triples)},
        witnesses=witnesses,
        metrics={
            "consistency": "UNIQUE-CONSISTENT" if consistent else "INCONSISTENT",
            "max_seed_spread": max(spreads, default=0.0),
            "failures": failures,
            "worst_midpoint_violation": worst_val,
            "assumed_locally_convex": True,
            "values": values,
        },
        seed=seed,
        settings={"tol": tol, "seeds": list(seeds), "midpoint_tol": midpoint_tol},
        notes=[PRECONDITION_NOTE],
        wall_time=time.perf_counter() - start,
    )
