"""Exact closed regions: finite unions of intervals, circle arcs or boxes.

Continuous images of the whole space under our map kinds are always one of
these, so word images can be tracked exactly instead of through a net.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .spaces import Circle, Cube, ModelSpace, ZERO


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint, sorted, closed intervals on a line."""

    parts: tuple

    @classmethod
    def of(cls, intervals):
        ivs = sorted((min(a, b), max(a, b)) for a, b in intervals)
        merged = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        return cls(tuple(merged))

    def diameter(self):
        return self.parts[-1][1] - self.parts[0][0]

    def is_point(self):
        return len(self.parts) == 1 and self.parts[0][0] == self.parts[0][1]

    def point(self):
        return self.parts[0][0]

    def bounds(self):
        return self.parts[0][0], self.parts[-1][1]

    def contains(self, x):
        return any(a <= x <= b for a, b in self.parts)

    def domain_intervals(self):
        return self.parts

    def sample(self):
        return self.parts[0][0]


@dataclass(frozen=True)
class ArcSet:
    """Closed arcs ``(start, length)`` on a circle of circumference ``period``.

    Normalized so equal sets compare equal; the full circle is ``((0, L),)``.
    """

    period: Fraction
    arcs: tuple

    @classmethod
    def of(cls, period, arcs):
        L = period
        flat = []
        for s, ln in arcs:
            if ln >= L:
                return cls(L, ((ZERO, L),))
            s %= L
            e = s + ln
            if e <= L:
                flat.append((s, e))
            else:
                flat.append((s, L))
                flat.append((ZERO, e - L))
        flat.sort()
        merged = []
        for a, b in flat:
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        if len(merged) == 1 and merged[0] == (ZERO, L):
            return cls(L, ((ZERO, L),))
        if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == L:
            first = merged.pop(0)
            last = merged.pop()
            merged.append((last[0], last[1] + first[1]))
        return cls(L, tuple(sorted((a, b - a) for a, b in merged)))

    def is_full(self):
        return len(self.arcs) == 1 and self.arcs[0][1] >= self.period

    def is_point(self):
        return len(self.arcs) == 1 and self.arcs[0][1] == 0

    def point(self):
        return self.arcs[0][0]

    def domain_intervals(self):
        """The set as closed intervals inside [0, L]."""
        L = self.period
        if self.is_full():
            return ((ZERO, L),)
        out = []
        for s, ln in self.arcs:
            e = s + ln
            if e <= L:
                out.append((s, e))
            else:
                out.append((s, L))
                out.append((ZERO, e - L))
        return tuple(out)

    def contains(self, x):
        L = self.period
        x %= L
        for s, ln in self.arcs:
            if (x - s) % L <= ln:
                return True
        return False

    def total_length(self):
        return min(self.period, sum(ln for _, ln in self.arcs))

    def has_antipodal_pair(self):
        half = self.period / 2
        shifted = ArcSet(self.period, tuple(((s + half) % self.period, ln) for s, ln in self.arcs))
        return self.intersection_point(shifted) is not None

    def intersection_point(self, other):
        """Some point common to both sets, or None."""
        for a0, a1 in self.domain_intervals():
            for b0, b1 in other.domain_intervals():
                lo, hi = max(a0, b0), min(a1, b1)
                if lo <= hi:
                    return lo % self.period
        return None

    def diameter(self):
        L = self.period
        half = L / 2
        if self.is_full():
            return half
        if len(self.arcs) == 1:
            return min(self.arcs[0][1], half)
        if self.has_antipodal_pair():
            return half
        ends = []
        for s, ln in self.arcs:
            ends.extend((s, (s + ln) % L))
        best = ZERO
        for x in ends:
            for y in ends:
                t = abs(x - y) % L
                best = max(best, min(t, L - t))
        return best

    def sample(self):
        return self.arcs[0][0]


@dataclass(frozen=True)
class BoxSet:
    """Finite union of axis-parallel closed boxes in a cube (max metric)."""

    boxes: tuple

    @classmethod
    def of(cls, boxes):
        return cls(tuple(sorted(set(tuple(tuple(side) for side in b) for b in boxes))))

    def diameter(self):
        dim = len(self.boxes[0])
        return max(
            max(b[k][1] for b in self.boxes) - min(b[k][0] for b in self.boxes) for k in range(dim)
        )

    def is_point(self):
        return all(lo == hi for b in self.boxes for lo, hi in b) and len(self.boxes) == 1

    def point(self):
        return tuple(lo for lo, _ in self.boxes[0])

    def contains(self, x):
        return any(all(lo <= c <= hi for c, (lo, hi) in zip(x, b)) for b in self.boxes)

    def sample(self):
        return self.point()


def full_region(space: ModelSpace):
    if isinstance(space, Cube):
        return BoxSet.of([tuple((ZERO, Fraction(1)) for _ in range(space.dim))])
    if isinstance(space, Circle):
        return ArcSet.of(space.length, [(ZERO, space.length)])
    return IntervalSet.of([(space.lo, space.hi)])


def point_region(space: ModelSpace, x):
    if isinstance(space, Cube):
        return BoxSet.of([tuple((c, c) for c in x)])
    if isinstance(space, Circle):
        return ArcSet.of(space.length, [(x, ZERO)])
    return IntervalSet.of([(x, x)])


def region_from_lifted(space: ModelSpace, intervals):
    """Region from value intervals; on circles the values are lifts (unreduced)."""
    if isinstance(space, Circle):
        return ArcSet.of(space.length, [(a, b - a) for a, b in intervals])
    return IntervalSet.of(intervals)


def arc_region(space: Circle, start, end):
    """The arc running counterclockwise from ``start`` to ``end``."""
    L = space.length
    return ArcSet.of(L, [(start % L, (end - start) % L)])


def region_diameter(space: ModelSpace, region):
    d = region.diameter()
    if isinstance(space, Circle) and space.metric == "chordal":
        import math

        return 2.0 * math.sin(math.pi * float(d / space.length))
    return d
