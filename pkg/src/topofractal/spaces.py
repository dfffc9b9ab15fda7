"""Model spaces with exact metrics, nets, diameters and Cantor primitives.

Every coordinate is a :class:`fractions.Fraction`.  One-dimensional spaces
(intervals, circles, the structured interval, blown-up circles) use bare
fractions as points; the cube uses tuples of fractions.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, an int or a Fraction.

    Binary floats and anything non-rational are rejected.
    """
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            r = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"not a rational: {value!r}") from None
        return r
    raise DomainError(f"not a rational: {value!r} ({type(value).__name__})")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# spaces


class ModelSpace:
    """Base class.  Subclasses are frozen dataclasses."""

    kind = "abstract"
    dim = 1

    def validate(self, x):
        raise NotImplementedError

    def contains(self, x) -> bool:
        try:
            self.validate(x)
        except DomainError:
            return False
        return True

    def distance(self, x, y) -> Fraction:
        raise NotImplementedError

    def diameter(self) -> Fraction:
        raise NotImplementedError

    def landmarks(self) -> tuple:
        return ()

    def grid(self, resolution: Fraction) -> list:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Interval(ModelSpace):
    lo: Fraction = ZERO
    hi: Fraction = ONE
    kind = "interval"

    def __post_init__(self):
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if not self.lo < self.hi:
            raise DomainError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    def validate(self, x):
        x = _as_fraction(x)
        if not self.lo <= x <= self.hi:
            raise DomainError(f"{x} outside [{self.lo}, {self.hi}]")
        return x

    def distance(self, x, y):
        return abs(self.validate(x) - self.validate(y))

    def diameter(self):
        return self.hi - self.lo

    def landmarks(self):
        return (self.lo, self.hi)

    def grid(self, resolution):
        n = max(1, math.ceil((self.hi - self.lo) / resolution))
        step = (self.hi - self.lo) / n
        return [self.lo + i * step for i in range(n + 1)]

    def to_json(self):
        return {"kind": "interval", "lo": format_rational(self.lo), "hi": format_rational(self.hi)}


@dataclass(frozen=True)
class StructuredInterval(Interval):
    """[0, 1] split as L = [0,1/3], C (middle-thirds copy in [1/3,2/3]), R = [2/3,1].

    The gaps of C are the arcs X_s = [l(s), r(s)]; ``gap_depth`` bounds how many
    gap endpoints are offered as net landmarks.
    """

    lo: Fraction = ZERO
    hi: Fraction = ONE
    gap_depth: int = 6
    kind = "structured_interval"

    def __post_init__(self):
        super().__post_init__()
        if (self.lo, self.hi) != (ZERO, ONE):
            raise DomainError("the structured interval is fixed to [0, 1]")

    def landmarks(self):
        pts = {ZERO, Fraction(1, 3), Fraction(2, 3), ONE}
        for s in all_addresses(self.gap_depth):
            l, r = gap_endpoints(s)
            pts.update((l, r, (l + r) / 2))
        return tuple(sorted(pts))

    def to_json(self):
        return {"kind": "structured_interval"}


@dataclass(frozen=True)
class Circle(ModelSpace):
    """Circle of circumference ``length``; points are coordinates in [0, length).

    ``metric`` is ``"arc"`` (exact) or ``"chordal"`` (the circle drawn with
    radius length/(2 pi), distances as floats).
    """

    length: Fraction = Fraction(1)
    metric: str = "arc"
    kind = "circle"

    def __post_init__(self):
        object.__setattr__(self, "length", parse_rational(self.length))
        if self.length <= 0:
            raise DomainError("circle length must be positive")
        if self.metric not in ("arc", "chordal"):
            raise DomainError(f"unknown circle metric {self.metric!r}")

    def validate(self, x):
        x = _as_fraction(x)
        if not ZERO <= x <= self.length:
            raise DomainError(f"{x} outside [0, {self.length}]")
        return x % self.length

    def wrap(self, x) -> Fraction:
        return _as_fraction(x) % self.length

    def arc_distance(self, x, y) -> Fraction:
        t = abs(self.validate(x) - self.validate(y)) % self.length
        return min(t, self.length - t)

    def chordal_distance(self, x, y) -> float:
        """Chord length for the circle scaled to unit radius (antipodes at 2)."""
        t = self.arc_distance(x, y) / self.length
        return 2.0 * math.sin(math.pi * float(t))

    def distance(self, x, y):
        if self.metric == "chordal":
            return self.chordal_distance(x, y)
        return self.arc_distance(x, y)

    def diameter(self):
        return self.length / 2 if self.metric == "arc" else 2.0

    def landmarks(self):
        return (ZERO,)

    def grid(self, resolution):
        n = max(1, math.ceil(self.length / resolution))
        step = self.length / n
        return [i * step for i in range(n)]

    def to_json(self):
        d = {"kind": "circle", "length": format_rational(self.length)}
        if self.metric != "arc":
            d["metric"] = self.metric
        return d


@dataclass(frozen=True)
class Cube(ModelSpace):
    """[0,1]^dim with the max metric."""

    dim: int = 1
    kind = "cube"

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise DomainError("cube dimension must be a positive integer")

    def validate(self, x):
        if not isinstance(x, (tuple, list)) or len(x) != self.dim:
            raise DomainError(f"expected a {self.dim}-tuple, got {x!r}")
        x = tuple(_as_fraction(c) for c in x)
        if any(c < 0 or c > 1 for c in x):
            raise DomainError(f"{x} outside [0,1]^{self.dim}")
        return x

    def distance(self, x, y):
        x, y = self.validate(x), self.validate(y)
        return max(abs(a - b) for a, b in zip(x, y))

    def diameter(self):
        return ONE

    def axis(self, resolution) -> list:
        # spacing 2*resolution puts every point within resolution in the max metric
        n = max(1, math.ceil(1 / (2 * resolution)))
        return [Fraction(i, n) for i in range(n + 1)]

    def landmarks(self):
        return tuple(itertools.product((ZERO, ONE), repeat=self.dim))

    def grid(self, resolution):
        return list(itertools.product(self.axis(resolution), repeat=self.dim))

    def to_json(self):
        return {"kind": "cube", "dim": self.dim}


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    raise DomainError(f"not an exact rational point: {x!r}")


# ---------------------------------------------------------------------------
# nets


@dataclass
class EpsilonNet:
    """Finite point set within ``resolution`` of every point of ``space``.

    Uniform grid plus landmarks (and any ``extra`` points supplied by the
    caller, e.g. map breakpoints).  Cube nets are generated lazily since a
    4-cube at resolution 2^-6 has over a million points.
    """

    space: ModelSpace
    resolution: Fraction
    extra: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.resolution = parse_rational(self.resolution)
        if self.resolution <= 0:
            raise DomainError("net resolution must be positive")

    @cached_property
    def points(self) -> tuple:
        sp = self.space
        if isinstance(sp, Cube):
            pts = set(sp.grid(self.resolution))
            pts.update(sp.landmarks())
            pts.update(sp.validate(p) for p in self.extra)
            return tuple(sorted(pts))
        pts = set(sp.grid(self.resolution))
        pts.update(sp.landmarks())
        for p in self.extra:
            if isinstance(sp, Circle):
                p = sp.wrap(p)
            pts.add(sp.validate(p))
        return tuple(sorted(pts))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_array(self) -> np.ndarray:
        """Float copy of the points, shape (n, dim)."""
        sp = self.space
        if isinstance(sp, Cube) and not self.extra:
            axis = np.array([float(a) for a in sp.axis(self.resolution)])
            mesh = np.meshgrid(*([axis] * sp.dim), indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=1)
        pts = self.points
        if isinstance(sp, Cube):
            return np.array([[float(c) for c in p] for p in pts])
        return np.array([[float(p)] for p in pts])


def build_net(space: ModelSpace, resolution, extra: Iterable = ()) -> EpsilonNet:
    return EpsilonNet(space, parse_rational(resolution), tuple(extra))


# ---------------------------------------------------------------------------
# distances on finite sets


def distance(space: ModelSpace, x, y):
    return space.distance(x, y)


def set_diameter(space: ModelSpace, pts: Iterable):
    """Largest pairwise distance of a finite point set (0 for a singleton)."""
    pts = list(pts)
    if not pts:
        raise DomainError("diameter of an empty set")
    if isinstance(space, Cube):
        pts = [space.validate(p) for p in pts]
        return max(max(c) - min(c) for c in zip(*pts))
    if isinstance(space, Circle):
        pts = sorted({space.validate(p) for p in pts})
        return _circle_diameter(space, pts)
    pts = [space.validate(p) for p in pts]
    return max(pts) - min(pts)


def _circle_diameter(space: Circle, pts: Sequence[Fraction]):
    L = space.length
    half = L / 2
    best = ZERO
    n = len(pts)
    for x in pts:
        target = (x + half) % L
        i = bisect.bisect_left(pts, target)
        for j in (i - 1, i, i + 1):
            y = pts[j % n]
            t = abs(x - y)
            d = min(t, L - t)
            if d > best:
                best = d
        if best == half:
            break
    if space.metric == "chordal":
        return 2.0 * math.sin(math.pi * float(best / L))
    return best


def _nearest_1d(sorted_pts: Sequence[Fraction], x: Fraction, period=None) -> Fraction:
    i = bisect.bisect_left(sorted_pts, x)
    n = len(sorted_pts)
    best = None
    for j in (i - 1, i):
        if period is None and not 0 <= j < n:
            continue
        y = sorted_pts[j % n]
        t = abs(x - y)
        if period is not None:
            t %= period
            t = min(t, period - t)
        if best is None or t < best:
            best = t
    return best


def nearest_distances(space: ModelSpace, targets: Sequence, pts: Sequence) -> list:
    """Distance from each target point to the nearest point of ``pts``."""
    if not pts:
        raise DomainError("nearest point in an empty set")
    if isinstance(space, Cube):
        return _nearest_cube(space, targets, pts)
    period = space.length if isinstance(space, Circle) else None
    srt = sorted(set(pts))
    out = [_nearest_1d(srt, x, period) for x in targets]
    if isinstance(space, Circle) and space.metric == "chordal":
        L = space.length
        out = [2.0 * math.sin(math.pi * float(d / L)) for d in out]
    return out


def _nearest_cube(space: Cube, targets, pts) -> list:
    from scipy.spatial import cKDTree

    pts = list(pts)
    tree = cKDTree(np.array([[float(c) for c in p] for p in pts]))
    q = np.array([[float(c) for c in t] for t in targets])
    _, idx = tree.query(q, p=np.inf)
    # exact recomputation on the float-nearest candidate
    return [space.distance(t, pts[i]) for t, i in zip(targets, idx)]


def hausdorff_distance(space: ModelSpace, a: Iterable, b: Iterable):
    """Two-sided Hausdorff distance between finite point sets."""
    a, b = list(a), list(b)
    if not a or not b:
        raise DomainError("Hausdorff distance needs nonempty sets")
    if not isinstance(space, Cube):
        a = [space.validate(x) for x in a]
        b = [space.validate(x) for x in b]
    da = max(nearest_distances(space, a, b))
    db = max(nearest_distances(space, b, a))
    return max(da, db)


# ---------------------------------------------------------------------------
# Cantor addressing

_TAILS = {"0": (0,), "1": (1,), "01": (0, 1), "10": (1, 0)}
_OP_TAIL = {"0": "1", "1": "0", "01": "10", "10": "01"}


@dataclass(frozen=True, order=False)
class CantorAddress:
    """Eventually periodic 0/1 sequence: ``digits`` then ``tail`` repeated."""

    digits: tuple = ()
    tail: str = "0"

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if any(d not in (0, 1) for d in self.digits):
            raise DomainError(f"address digits must be 0/1: {self.digits}")
        if self.tail not in _TAILS:
            raise DomainError(f"unknown periodic tail {self.tail!r}")

    def expand(self, n: int) -> tuple:
        tail = _TAILS[self.tail]
        out = list(self.digits[:n])
        i = 0
        while len(out) < n:
            out.append(tail[i % len(tail)])
            i += 1
        return tuple(out)

    def op(self) -> "CantorAddress":
        return CantorAddress(tuple(1 - d for d in self.digits), _OP_TAIL[self.tail])

    def prepend(self, digit: int) -> "CantorAddress":
        return CantorAddress((digit,) + self.digits, self.tail)

    def drop_first(self) -> tuple:
        """(first digit, rest of the address)."""
        if self.digits:
            return self.digits[0], CantorAddress(self.digits[1:], self.tail)
        t = _TAILS[self.tail]
        rest = self.tail if len(t) == 1 else self.tail[1] + self.tail[0]
        return t[0], CantorAddress((), rest)

    def _key(self, other) -> int:
        return max(len(self.digits), len(other.digits)) + 4

    def __lt__(self, other):
        n = self._key(other)
        return self.expand(n) < other.expand(n)

    def same_sequence(self, other) -> bool:
        n = self._key(other)
        return self.expand(n) == other.expand(n)

    def __str__(self):
        head = "".join(map(str, self.digits))
        return f"{head}({self.tail})"


def _periodic_sum(digits: Sequence[int], tail: Sequence[int], base: int, weight: int) -> Fraction:
    """Sum of weight*d_i*base^-i over digits followed by the repeated tail."""
    b = Fraction(1, base)
    head = sum((weight * d * b ** (i + 1) for i, d in enumerate(digits)), ZERO)
    m = len(tail)
    block = sum((weight * d * b ** (j + 1) for j, d in enumerate(tail)), ZERO)
    return head + b ** len(digits) * block / (1 - b**m)


def cantor_coordinate(addr: CantorAddress) -> Fraction:
    """Point of the middle-thirds copy C in [1/3, 2/3] with this address."""
    s = _periodic_sum(addr.digits, _TAILS[addr.tail], 3, 2)
    return Fraction(1, 3) + s / 3


def binary_value(addr: CantorAddress) -> Fraction:
    """sum t_i 2^-i: the Cantor stairs read off an address."""
    return _periodic_sum(addr.digits, _TAILS[addr.tail], 2, 1)


def gap_endpoints(s: Sequence[int]) -> tuple:
    """(l(s), r(s)): the gap X_s is bounded by h(s 0 1...) and h(s 1 0...)."""
    s = tuple(s)
    return (
        cantor_coordinate(CantorAddress(s + (0,), "1")),
        cantor_coordinate(CantorAddress(s + (1,), "0")),
    )


def all_addresses(max_len: int):
    """Every finite 0/1 word of length <= max_len, shortest first."""
    for n in range(max_len + 1):
        yield from itertools.product((0, 1), repeat=n)


STAIRS_DEPTH = 40


def cantor_stairs(x, depth: int = STAIRS_DEPTH) -> Fraction:
    """Cantor function on [0, 1].

    Exact whenever the ternary expansion of ``x`` hits a digit 1, terminates,
    or becomes periodic within ``depth`` digits; otherwise truncated, with
    error at most 2^-depth.
    """
    x = _as_fraction(x)
    if not ZERO <= x <= ONE:
        raise DomainError(f"Cantor stairs argument {x} outside [0, 1]")
    if x == ONE:
        return ONE
    bits = []
    seen = {x: 0}
    r = x
    for i in range(1, depth + 1):
        r *= 3
        d = r.numerator // r.denominator
        r -= d
        if d == 1:
            return _bits_value(bits) + Fraction(1, 2**i)
        bits.append(d // 2)
        if r == 0:
            return _bits_value(bits)
        if r in seen:
            j = seen[r]
            head, block = bits[:j], bits[j:]
            period = len(block)
            return _bits_value(head) + Fraction(1, 2**j) * _bits_value(block) / (1 - Fraction(1, 2**period))
        seen[r] = i
    return _bits_value(bits)


def _bits_value(bits) -> Fraction:
    v = 0
    for b in bits:
        v = 2 * v + b
    return Fraction(v, 2 ** len(bits))


# ---------------------------------------------------------------------------
# JSON


def space_from_json(d: dict) -> ModelSpace:
    kind = d.get("kind")
    if kind == "interval":
        return Interval(parse_rational(d["lo"]), parse_rational(d["hi"]))
    if kind == "circle":
        return Circle(parse_rational(d["length"]), d.get("metric", "arc"))
    if kind == "cube":
        return Cube(int(d["dim"]))
    if kind == "structured_interval":
        return StructuredInterval()
    if kind == "blown_up_circle":
        from .denjoy import build_blowup

        return build_blowup(int(d["depth"]), parse_rational(d.get("lambda_base", "1")))
    raise DomainError(f"unknown space kind {kind!r}")


def space_to_json(space: ModelSpace) -> dict:
    return space.to_json()
