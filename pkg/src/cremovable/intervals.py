"""Cantor-type subsets of the line as finite unions of closed intervals.

Endpoints are exact :class:`~fractions.Fraction` values throughout. Queries
accept floats and convert them bit-exactly, so a classification answer is
about the binary number actually passed in.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from ._rational import as_fraction, frac_str, parse_frac

__all__ = [
    "Interval",
    "IntervalSet",
    "TernaryCantorSet",
    "GapList",
    "Classification",
    "ternary_cantor",
    "fat_cantor",
    "cantor_function",
    "point_classify",
    "MAX_TERNARY_DEPTH",
    "FAT_CANTOR_MAX_BUDGET",
]

MAX_TERNARY_DEPTH = 40
# A larger budget would allow sum(eps) >= 1/24 and break the counterexample.
FAT_CANTOR_MAX_BUDGET = Fraction(1, 12)


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class Classification:
    """Result of :func:`point_classify`.

    ``distance`` is the distance to the complement when ``inside`` and to the
    set otherwise. For an inside point the complement is taken inside the
    convex hull of the set whenever that relative complement is nonempty, so
    the ambient interval of a Cantor set does not count as "outside".
    """

    inside: bool
    distance: Fraction

    def __str__(self):
        return f"{'Inside' if self.inside else 'Outside'}({self.distance})"


def _inside_distance(x: Fraction, lo: Fraction, hi: Fraction,
                     hull_lo: Fraction, hull_hi: Fraction) -> Fraction:
    left = x - lo if lo > hull_lo else None
    right = hi - x if hi < hull_hi else None
    candidates = [d for d in (left, right) if d is not None]
    if not candidates:
        # single interval: the only complement is outside the hull
        return min(x - lo, hi - x)
    return min(candidates)


class IntervalSet:
    """Finite union of pairwise disjoint closed intervals, sorted left to right.

    Touching intervals (``hi_k == lo_{k+1}``) are rejected; use
    :meth:`from_intervals` to merge them.
    """

    def __init__(self, intervals: Iterable[Interval | tuple] = ()):
        ivs = tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals)
        for left, right in zip(ivs, ivs[1:]):
            if not left.hi < right.lo:
                raise ValueError(f"intervals not strictly increasing: {left} then {right}")
        self._intervals = ivs
        self._los = [iv.lo for iv in ivs]

    @classmethod
    def from_intervals(cls, intervals: Iterable[Interval | tuple]) -> "IntervalSet":
        """Sort and merge overlapping or touching intervals."""
        ivs = sorted(iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals)
        merged: list[Interval] = []
        for iv in ivs:
            if merged and iv.lo <= merged[-1].hi:
                top = merged[-1]
                merged[-1] = Interval(top.lo, max(top.hi, iv.hi))
            else:
                merged.append(iv)
        return cls(merged)

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._intervals

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return tuple(self) == tuple(other)

    def __hash__(self):
        return hash(tuple(self))

    def __repr__(self):
        body = ", ".join(f"[{iv.lo}, {iv.hi}]" for iv in self.intervals[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"{type(self).__name__}({{{body}{more}}})"

    def is_empty(self) -> bool:
        return len(self) == 0

    def measure(self) -> Fraction:
        return sum((iv.length for iv in self), Fraction(0))

    def hull(self) -> Interval:
        if self.is_empty():
            raise ValueError("empty set has no hull")
        return Interval(self.intervals[0].lo, self.intervals[-1].hi)

    def gaps(self) -> list[Interval]:
        """Closures of the bounded open gaps between consecutive intervals."""
        ivs = self.intervals
        return [Interval(a.hi, b.lo) for a, b in zip(ivs, ivs[1:])]

    def classify(self, x) -> Classification:
        if self.is_empty():
            raise ValueError("cannot classify against an empty set")
        x = as_fraction(x)
        ivs = self.intervals
        k = bisect.bisect_right(self._los, x) - 1
        if k >= 0 and x <= ivs[k].hi:
            hull = self.hull()
            return Classification(True, _inside_distance(x, ivs[k].lo, ivs[k].hi, hull.lo, hull.hi))
        dists = []
        if k >= 0:
            dists.append(x - ivs[k].hi)
        if k + 1 < len(ivs):
            dists.append(ivs[k + 1].lo - x)
        return Classification(False, min(dists))

    def __contains__(self, x) -> bool:
        return self.classify(x).inside

    def intervals_meeting(self, a, b) -> list[Interval]:
        """Intervals that intersect the closed window [a, b]."""
        a, b = as_fraction(a), as_fraction(b)
        ivs = self.intervals
        start = max(bisect.bisect_right(self._los, a) - 1, 0)
        out = []
        for iv in ivs[start:]:
            if iv.lo > b:
                break
            if iv.hi >= a:
                out.append(iv)
        return out

    def is_subset_of(self, other: "IntervalSet") -> bool:
        """Interval-wise containment: every interval lies inside one of ``other``."""
        olos = [iv.lo for iv in other]
        oivs = other.intervals
        for iv in self:
            k = bisect.bisect_right(olos, iv.lo) - 1
            if k < 0 or not oivs[k].contains_interval(iv):
                return False
        return True

    def to_json(self) -> list[list[str]]:
        return [[frac_str(iv.lo), frac_str(iv.hi)] for iv in self]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "IntervalSet":
        return cls(Interval(parse_frac(lo), parse_frac(hi)) for lo, hi in data)


class TernaryCantorSet(IntervalSet):
    """Generation-``depth`` approximation of the middle-thirds Cantor set.

    Intervals are produced lazily; membership and distances come from the
    ternary expansion, so depths up to 40 are cheap to query even though
    there are ``2**depth`` intervals.
    """

    _MATERIALIZE_LIMIT = 1 << 20

    def __init__(self, depth: int):
        if not 0 <= depth <= MAX_TERNARY_DEPTH:
            raise ValueError(f"depth must be in [0, {MAX_TERNARY_DEPTH}], got {depth}")
        self.depth = depth
        self._cache: tuple[Interval, ...] | None = None

    @property
    def intervals(self) -> tuple[Interval, ...]:
        if self._cache is None:
            if len(self) > self._MATERIALIZE_LIMIT:
                raise MemoryError(
                    f"refusing to materialize {len(self)} intervals; use classify() or iter_intervals()")
            self._cache = tuple(self.iter_intervals())
        return self._cache

    def __iter__(self):
        return self.iter_intervals()

    def iter_intervals(self) -> Iterator[Interval]:
        width = Fraction(1, 3 ** self.depth)
        for k in range(len(self)):
            lo = self.left_endpoint(k)
            yield Interval(lo, lo + width)

    def intervals_meeting(self, a, b) -> list[Interval]:
        a, b = as_fraction(a), as_fraction(b)
        out = []
        stack = [(Fraction(0), 0)]
        while stack:
            lo, level = stack.pop()
            width = Fraction(1, 3 ** level)
            if lo > b or lo + width < a:
                continue
            if level == self.depth:
                out.append(Interval(lo, lo + width))
                continue
            third = width / 3
            stack.append((lo + 2 * third, level + 1))
            stack.append((lo, level + 1))
        return out

    def left_endpoint(self, k: int) -> Fraction:
        """Left end of the k-th interval: binary digits of k read as ternary 0/2 digits."""
        num = 0
        for j in range(self.depth):
            num = 3 * num + 2 * ((k >> (self.depth - 1 - j)) & 1)
        return Fraction(num, 3 ** self.depth)

    def __len__(self) -> int:
        return 1 << self.depth

    def __eq__(self, other):
        if isinstance(other, TernaryCantorSet):
            return self.depth == other.depth
        return IntervalSet.__eq__(self, other)

    def __hash__(self):
        return hash(("ternary", self.depth))

    def __repr__(self):
        return f"TernaryCantorSet(depth={self.depth})"

    def is_empty(self) -> bool:
        return False

    def measure(self) -> Fraction:
        return Fraction(2, 3) ** self.depth

    def hull(self) -> Interval:
        return Interval(0, 1)

    def classify(self, x) -> Classification:
        x = as_fraction(x)
        if x < 0:
            return Classification(False, -x)
        if x > 1:
            return Classification(False, x - 1)
        lo, hi = self._containing_interval(x)
        if lo is None:
            return Classification(False, hi)  # hi carries the gap distance
        return Classification(True, _inside_distance(x, lo, hi, Fraction(0), Fraction(1)))

    def _containing_interval(self, x: Fraction):
        """Return ``(lo, hi)`` of the generation-depth interval holding x, or
        ``(None, distance)`` when x sits in an open gap."""
        num, den = x.numerator, x.denominator
        base = Fraction(0)
        scale = Fraction(1)
        tail = Fraction(1, 3 ** self.depth)
        for _ in range(self.depth):
            d = 3 * num // den
            rem = 3 * num - d * den
            third = scale / 3
            if d == 3:
                return base + scale - tail, base + scale
            if d == 1:
                gap_lo = base + third
                if rem == 0:
                    return gap_lo - tail, gap_lo
                gap_hi = base + 2 * third
                return None, min(x - gap_lo, gap_hi - x)
            base += d * third
            scale = third
            num = rem
        return base, base + scale


def ternary_cantor(depth: int) -> TernaryCantorSet:
    """Generation-``depth`` ternary Cantor approximation (``2**depth`` intervals)."""
    return TernaryCantorSet(depth)


@dataclass(frozen=True)
class GapList:
    """Removed open gaps ``(w - eps, w + eps)`` inside [-1, 1].

    Gaps never contain 0 (``|w| >= eps``); the closed-form midpoint gap of
    the counterexample relies on it.
    """

    gaps: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        gaps = tuple((as_fraction(w), as_fraction(e)) for w, e in self.gaps)
        object.__setattr__(self, "gaps", gaps)
        for w, e in gaps:
            if e <= 0:
                raise ValueError(f"gap half-length must be positive, got {e}")
            if w - e < -1 or w + e > 1:
                raise ValueError(f"gap ({w - e}, {w + e}) leaves [-1, 1]")
            if abs(w) < e:
                raise ValueError(f"gap ({w - e}, {w + e}) contains 0")
        ordered = sorted(gaps)
        for (w1, e1), (w2, e2) in zip(ordered, ordered[1:]):
            if w1 + e1 > w2 - e2:
                raise ValueError(f"gaps around {w1} and {w2} overlap")
        order = sorted(range(len(gaps)), key=lambda i: gaps[i][0])
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_lefts", [gaps[i][0] - gaps[i][1] for i in order])

    def __len__(self):
        return len(self.gaps)

    def __iter__(self):
        return iter(self.gaps)

    @property
    def centers(self) -> tuple[Fraction, ...]:
        return tuple(w for w, _ in self.gaps)

    @property
    def half_lengths(self) -> tuple[Fraction, ...]:
        return tuple(e for _, e in self.gaps)

    def eps_sum(self) -> Fraction:
        return sum(self.half_lengths, Fraction(0))

    def total_length(self) -> Fraction:
        return 2 * self.eps_sum()

    def open_intervals(self) -> list[tuple[Fraction, Fraction]]:
        return [(w - e, w + e) for w, e in self.gaps]

    def complement(self) -> IntervalSet:
        """[-1, 1] minus the union of gaps, as a closed interval union."""
        pieces = []
        cursor = Fraction(-1)
        # a == cursor leaves a single point (gaps are open)
        for a, b in sorted(self.open_intervals()):
            pieces.append(Interval(cursor, a))
            cursor = b
        pieces.append(Interval(cursor, Fraction(1)))
        return IntervalSet.from_intervals(pieces)

    def gap_index_containing(self, x) -> int | None:
        x = as_fraction(x)
        j = bisect.bisect_left(self._lefts, x) - 1
        if j < 0:
            return None
        i = self._order[j]
        w, e = self.gaps[i]
        return i if x < w + e else None

    def to_json(self) -> list[list[str]]:
        return [[frac_str(w), frac_str(e)] for w, e in self.gaps]

    @classmethod
    def from_json(cls, data) -> "GapList":
        return cls(tuple((parse_frac(w), parse_frac(e)) for w, e in data))


def fat_cantor(gap_budget, depth: int) -> tuple[IntervalSet, GapList]:
    """Symmetric Smith-Volterra-Cantor set on [-1, 1].

    The one-sided construction on [0, 1] removes, at generation ``n``, an
    open gap of length ``gap_budget / 4**n`` from the middle of each of the
    ``2**(n-1)`` surviving intervals; the result is mirrored onto [-1, 0].
    Total removed length is ``gap_budget * (1 - 2**-depth) < gap_budget``.

    Gaps are listed by generation, then left to right.
    """
    budget = as_fraction(gap_budget)
    if budget <= 0:
        raise ValueError("gap_budget must be positive")
    if budget > FAT_CANTOR_MAX_BUDGET:
        raise ValueError(f"gap_budget {budget} exceeds {FAT_CANTOR_MAX_BUDGET}")
    if depth < 1:
        raise ValueError("depth must be at least 1")

    survivors = [Interval(0, 1)]
    by_generation: list[list[tuple[Fraction, Fraction]]] = []
    for n in range(1, depth + 1):
        half = budget / 4 ** n / 2
        generation = []
        nxt = []
        for iv in survivors:
            w = (iv.lo + iv.hi) / 2
            generation.append((w, half))
            nxt.append(Interval(iv.lo, w - half))
            nxt.append(Interval(w + half, iv.hi))
        by_generation.append(generation)
        survivors = nxt

    gaps = []
    for generation in by_generation:
        gaps.extend((-w, e) for w, e in reversed(generation))
        gaps.extend(generation)
    mirrored = [Interval(-iv.hi, -iv.lo) for iv in survivors]
    return IntervalSet.from_intervals(mirrored + survivors), GapList(tuple(gaps))


def cantor_function(x, depth: int) -> tuple[Fraction, Fraction]:
    """Devil's staircase value from the ternary expansion of ``x``.

    Returns ``(value, err)`` with the true value in ``[value, value + err]``
    and ``err <= 2**-depth``. The expansion stops at the first digit 1 (the
    value is then exact) or after ``depth`` digits.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    x = as_fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"cantor_function is defined on [0, 1], got {x}")
    if x == 1:
        return Fraction(1), Fraction(0)
    num, den = x.numerator, x.denominator
    acc = 0
    for k in range(1, depth + 1):
        d = 3 * num // den
        num = 3 * num - d * den
        if d == 1:
            acc = 2 * acc + 1
            return Fraction(acc, 1 << k), Fraction(0)
        acc = 2 * acc + d // 2
        if num == 0:
            return Fraction(acc, 1 << k), Fraction(0)
    return Fraction(acc, 1 << depth), Fraction(1, 1 << depth)


def point_classify(S: IntervalSet, x) -> Classification:
    """Exact inside/outside test with the distance to the nearest boundary."""
    return S.classify(x)
