"""Closed-form continuous self-maps, words over a function system, and checks.

A word is a tuple of map indices applied right to left: ``(0, 1)`` means
``maps[0] o maps[1]``.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DomainError
from .regions import BoxSet, IntervalSet, full_region, point_region, region_from_lifted
from .spaces import (
    CantorAddress,
    Circle,
    Cube,
    EpsilonNet,
    ModelSpace,
    ONE,
    ZERO,
    binary_value,
    build_net,
    cantor_stairs,
    format_rational,
    parse_rational,
    set_diameter,
)

# region images use a generous stairs depth so dyadic/periodic inputs stay exact
REGION_STAIRS_DEPTH = 400


# ---------------------------------------------------------------------------
# pieces


@dataclass(frozen=True)
class Linear:
    """Affine on [lo, hi] with the given endpoint values (lifted on circles)."""

    lo: Fraction
    hi: Fraction
    v_lo: Fraction
    v_hi: Fraction
    kind = "linear"

    @property
    def slope(self):
        return (self.v_hi - self.v_lo) / (self.hi - self.lo)

    def value(self, x, depth=None):
        if x == self.lo:
            return self.v_lo
        if x == self.hi:
            return self.v_hi
        return self.v_lo + self.slope * (x - self.lo)

    def solve(self, y):
        """x in [lo, hi] with value y: a list of points, or the whole piece."""
        if self.v_lo == self.v_hi:
            return "all" if y == self.v_lo else []
        lo_v, hi_v = sorted((self.v_lo, self.v_hi))
        if not lo_v <= y <= hi_v:
            return []
        return [self.lo + (y - self.v_lo) / self.slope]

    def reflected(self, length):
        return Linear(length - self.hi, length - self.lo, self.v_hi, self.v_lo)

    def to_json(self):
        return {
            "from": format_rational(self.lo),
            "to": format_rational(self.hi),
            "f_from": format_rational(self.v_lo),
            "f_to": format_rational(self.v_hi),
        }


@dataclass(frozen=True)
class Stairs:
    """v_lo + (v_hi - v_lo) * stairs((x - lo)/(hi - lo)) on [lo, hi]."""

    lo: Fraction
    hi: Fraction
    v_lo: Fraction
    v_hi: Fraction
    depth: int = 40
    kind = "stairs"

    def value(self, x, depth=None):
        t = (x - self.lo) / (self.hi - self.lo)
        return self.v_lo + (self.v_hi - self.v_lo) * cantor_stairs(t, depth or self.depth)

    def solve(self, y):
        if self.v_lo == self.v_hi:
            return "all" if y == self.v_lo else []
        u = (y - self.v_lo) / (self.v_hi - self.v_lo)
        if not ZERO <= u <= ONE:
            return []
        lo_t, hi_t = stairs_preimage(u)
        w = self.hi - self.lo
        if lo_t == hi_t:
            return [self.lo + w * lo_t]
        return [("interval", self.lo + w * lo_t, self.lo + w * hi_t)]

    def reflected(self, length):
        raise DomainError("reflection of staircase pieces is not supported")

    def to_json(self):
        return {
            "kind": "stairs",
            "from": format_rational(self.lo),
            "to": format_rational(self.hi),
            "f_from": format_rational(self.v_lo),
            "f_to": format_rational(self.v_hi),
        }


def stairs_preimage(u: Fraction):
    """Closed interval [a, b] of t in [0,1] with stairs(t) = u (a == b off dyadics)."""
    if u == 0:
        return ZERO, ZERO
    if u == 1:
        return ONE, ONE
    den = u.denominator
    if den & (den - 1) == 0:
        # dyadic k/2^n: a level-n gap
        n = den.bit_length() - 1
        k = u.numerator
        bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
        base = sum((Fraction(2 * b, 3 ** (i + 1)) for i, b in enumerate(bits[:-1])), ZERO)
        return base + Fraction(1, 3**n), base + Fraction(2, 3**n)
    # binary digits of u are eventually periodic; read them as ternary 0/2 digits
    bits, seen, r = [], {u: 0}, u
    while True:
        r *= 2
        b = r.numerator // r.denominator
        r -= b
        bits.append(b)
        if r in seen:
            j = seen[r]
            head, block = bits[:j], bits[j:]
            break
        seen[r] = len(bits)
    val = sum((Fraction(2 * b, 3 ** (i + 1)) for i, b in enumerate(head)), ZERO)
    blk = sum((Fraction(2 * b, 3 ** (i + 1)) for i, b in enumerate(block)), ZERO)
    val += Fraction(1, 3 ** len(head)) * blk / (1 - Fraction(1, 3 ** len(block)))
    return val, val


# ---------------------------------------------------------------------------
# maps


class MapExpr:
    """A continuous self-map of ``domain`` (into ``codomain``, default domain)."""

    kind = "abstract"
    domain: ModelSpace
    codomain: ModelSpace

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        raise NotImplementedError

    def image(self, region):
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        return ()

    def preimage(self, y):
        """Preimage of a point as (points, intervals)."""
        raise NotImplementedError(f"{self.kind} maps do not support preimages")

    def is_lipschitz(self) -> bool:
        return True

    def to_json(self) -> dict:
        raise NotImplementedError


class Piecewise(MapExpr):
    """Continuous map of a 1-d space given by contiguous monotone pieces.

    Pieces store endpoint values, not slopes.  On circles values are lifts and
    outputs are reduced mod the circumference.
    """

    kind = "pl"

    def __init__(self, domain, pieces, codomain=None, name=""):
        self.domain = domain
        self.codomain = codomain if codomain is not None else domain
        self.pieces = tuple(pieces)
        self.name = name
        if not self.pieces:
            raise DomainError("a piecewise map needs at least one piece")
        lo, hi = _domain_range(domain)
        if self.pieces[0].lo != lo or self.pieces[-1].hi != hi:
            raise DomainError(f"pieces must cover [{lo}, {hi}]")
        for p, q in zip(self.pieces, self.pieces[1:]):
            if p.hi != q.lo:
                raise DomainError(f"pieces not contiguous at {p.hi} / {q.lo}")
        for p in self.pieces:
            if not p.lo < p.hi:
                raise DomainError(f"empty piece [{p.lo}, {p.hi}]")
        if not isinstance(self.codomain, Circle):
            for p in self.pieces:
                for v in (p.v_lo, p.v_hi):
                    self.codomain.validate(v)
        self._his = [p.hi for p in self.pieces]

    def __repr__(self):
        return f"Piecewise({self.name or len(self.pieces)})"

    def piece_at(self, x):
        return self.pieces[min(bisect.bisect_left(self._his, x), len(self.pieces) - 1)]

    def _reduce(self, v):
        if isinstance(self.codomain, Circle):
            return v % self.codomain.length
        return v

    def evaluate(self, x, depth=None):
        x = self.domain.validate(x)
        return self._reduce(self.piece_at(x).value(x, depth))

    def breakpoints(self):
        return tuple(p.lo for p in self.pieces) + (self.pieces[-1].hi,)

    def image(self, region):
        out = []
        for a, b in region.domain_intervals():
            i = min(bisect.bisect_left(self._his, a), len(self.pieces) - 1)
            for p in self.pieces[i:]:
                if p.lo > b:
                    break
                s0, s1 = max(a, p.lo), min(b, p.hi)
                if s0 > s1:
                    continue
                v0 = p.value(s0, REGION_STAIRS_DEPTH)
                v1 = p.value(s1, REGION_STAIRS_DEPTH)
                out.append((min(v0, v1), max(v0, v1)))
        return region_from_lifted(self.codomain, out)

    def preimage(self, y):
        pts, ivs = set(), []
        period = self.codomain.length if isinstance(self.codomain, Circle) else None
        for p in self.pieces:
            lifts = [y]
            if period is not None:
                lo_v, hi_v = sorted((p.v_lo, p.v_hi))
                k0 = (lo_v - y) // period
                lifts = [y + k * period for k in range(k0, k0 + 3) if lo_v <= y + k * period <= hi_v]
            for yy in lifts:
                sol = p.solve(yy)
                if sol == "all":
                    ivs.append((p.lo, p.hi))
                    continue
                for s in sol:
                    if isinstance(s, tuple):
                        ivs.append(s[1:])
                    else:
                        pts.add(s)
        ivs = list(IntervalSet.of(ivs).parts) if ivs else []
        pts = {x for x in pts if not any(a <= x <= b for a, b in ivs)}
        if isinstance(self.domain, Circle):
            pts = {x % self.domain.length for x in pts}
        return sorted(pts), ivs

    def slopes(self):
        return [p.slope for p in self.pieces if isinstance(p, Linear)]

    def is_lipschitz(self):
        return all(isinstance(p, Linear) for p in self.pieces)

    def to_json(self):
        return {"kind": "pl", "pieces": [p.to_json() for p in self.pieces]}


def _domain_range(space):
    if isinstance(space, Circle):
        return ZERO, space.length
    return space.lo, space.hi


class Constant(MapExpr):
    kind = "constant"

    def __init__(self, space, value, name=""):
        self.domain = self.codomain = space
        self.value = space.validate(value)
        self.name = name

    def __repr__(self):
        return f"Constant({self.value})"

    def evaluate(self, x):
        self.domain.validate(x)
        return self.value

    def image(self, region):
        return point_region(self.codomain, self.value)

    def preimage(self, y):
        if y == self.value:
            lo, hi = _domain_range(self.domain)
            return [], [(lo, hi)]
        return [], []

    def to_json(self):
        v = self.value
        val = [format_rational(c) for c in v] if isinstance(v, tuple) else format_rational(v)
        return {"kind": "constant", "value": val}


class ReflectCompose(MapExpr):
    """x -> inner(reflect(x)); the reflection is x -> L - x on a circle of length L
    and x -> lo + hi - x on an interval."""

    kind = "reflect"

    def __init__(self, inner, name=""):
        self.inner = inner
        self.domain = inner.domain
        self.codomain = inner.codomain
        self.name = name

    def _reflect(self, x):
        sp = self.domain
        if isinstance(sp, Circle):
            return (sp.length - x) % sp.length
        return sp.lo + sp.hi - x

    def evaluate(self, x):
        return self.inner.evaluate(self._reflect(self.domain.validate(x)))

    def image(self, region):
        return self.inner.image(reflect_region(self.domain, region))

    def breakpoints(self):
        return tuple(sorted({self._reflect(b) for b in self.inner.breakpoints()}))

    def preimage(self, y):
        pts, ivs = self.inner.preimage(y)
        return sorted(self._reflect(p) for p in pts), [
            tuple(sorted((self._reflect(a), self._reflect(b)))) for a, b in ivs
        ]

    def is_lipschitz(self):
        return self.inner.is_lipschitz()

    def to_json(self):
        return {"kind": "reflect", "inner": self.inner.to_json()}


def reflect_region(space, region):
    if isinstance(space, Circle):
        L = space.length
        return type(region).of(L, [((L - s - ln) % L, ln) for s, ln in region.arcs])
    return IntervalSet.of([(space.lo + space.hi - b, space.lo + space.hi - a) for a, b in region.parts])


class Composite(MapExpr):
    """maps[0] o maps[1] o ... (rightmost applied first)."""

    kind = "compose"

    def __init__(self, maps, name=""):
        self.maps = tuple(maps)
        if not self.maps:
            raise DomainError("empty composite")
        self.domain = self.maps[-1].domain
        self.codomain = self.maps[0].codomain
        self.name = name

    def __repr__(self):
        return f"Composite({self.name or len(self.maps)})"

    def evaluate(self, x):
        for m in reversed(self.maps):
            x = m.evaluate(x)
        return x

    def image(self, region):
        for m in reversed(self.maps):
            region = m.image(region)
        return region

    def breakpoints(self):
        lo, hi = _domain_range(self.domain)
        return composite_breakpoints(self.maps, lo, hi)

    def preimage(self, y):
        return chain_preimage(self.maps, y)

    def is_lipschitz(self):
        return all(m.is_lipschitz() for m in self.maps)

    def to_json(self):
        return {"kind": "compose", "maps": [m.to_json() for m in self.maps]}


class CubeAffine(MapExpr):
    """(x_1..x_n) -> (shift + x_2/2, x_3, ..., x_n, x_1)."""

    kind = "cube_affine"

    def __init__(self, space: Cube, shift=ZERO, name=""):
        if not isinstance(space, Cube):
            raise DomainError("cube_affine needs a cube space")
        self.domain = self.codomain = space
        self.shift = parse_rational(shift)
        if not ZERO <= self.shift <= Fraction(1, 2):
            raise DomainError("cube_affine shift must lie in [0, 1/2]")
        self.name = name

    def __repr__(self):
        return f"CubeAffine(shift={self.shift})"

    def evaluate(self, x):
        x = self.domain.validate(x)
        rot = x[1:] + x[:1]
        return (self.shift + rot[0] / 2,) + rot[1:]

    def image(self, region):
        out = []
        for box in region.boxes:
            rot = box[1:] + box[:1]
            lo, hi = rot[0]
            out.append(((self.shift + lo / 2, self.shift + hi / 2),) + rot[1:])
        return BoxSet.of(out)

    def evaluate_array(self, arr):
        import numpy as np

        rot = np.roll(arr, -1, axis=1)
        rot[:, 0] = float(self.shift) + rot[:, 0] / 2
        return rot

    def to_json(self):
        return {"kind": "cube_affine", "shift": format_rational(self.shift)}


class CubeHomothety(MapExpr):
    """x -> ratio * x + offset on a cube (ratio in (0, 1])."""

    kind = "cube_homothety"

    def __init__(self, space: Cube, ratio, offset, name=""):
        self.domain = self.codomain = space
        self.ratio = parse_rational(ratio)
        self.offset = tuple(parse_rational(c) for c in offset)
        if len(self.offset) != space.dim:
            raise DomainError("offset dimension mismatch")
        if not ZERO < self.ratio <= ONE or any(c < 0 or c + self.ratio > 1 for c in self.offset):
            raise DomainError("homothety does not map the cube into itself")
        self.name = name

    def __repr__(self):
        return f"CubeHomothety({self.ratio}, {self.offset})"

    def evaluate(self, x):
        x = self.domain.validate(x)
        return tuple(self.ratio * c + o for c, o in zip(x, self.offset))

    def image(self, region):
        r = self.ratio
        return BoxSet.of(
            [tuple((r * lo + o, r * hi + o) for (lo, hi), o in zip(b, self.offset)) for b in region.boxes]
        )

    def evaluate_array(self, arr):
        import numpy as np

        return float(self.ratio) * arr + np.array([float(o) for o in self.offset])

    def to_json(self):
        return {
            "kind": "cube_homothety",
            "ratio": format_rational(self.ratio),
            "offset": [format_rational(c) for c in self.offset],
        }


class CantorSymbolic:
    """Symbolic action on Cantor addresses.

    prepend0_op: t -> 0 t^op;  prepend1: t -> 1 t;  stairs_then_affine:
    t -> 2/3 + c(t)/3 with c the binary reading of t.
    """

    kind = "cantor_symbolic"
    RULES = ("prepend0_op", "prepend1", "stairs_then_affine")

    def __init__(self, rule):
        if rule not in self.RULES:
            raise DomainError(f"unknown cantor rule {rule!r}")
        self.rule = rule

    def __call__(self, addr: CantorAddress):
        return self.evaluate(addr)

    def evaluate(self, addr: CantorAddress):
        if self.rule == "prepend0_op":
            return addr.op().prepend(0)
        if self.rule == "prepend1":
            return addr.prepend(1)
        return Fraction(2, 3) + binary_value(addr) / 3

    def to_json(self):
        return {"kind": "cantor_symbolic", "rule": self.rule}


def staircase_map(domain, src_lo, src_hi, dst_lo, dst_hi, name=""):
    """Staircase on [src_lo, src_hi] onto [dst_lo, dst_hi], constant outside."""
    lo, hi = _domain_range(domain)
    src_lo, src_hi = parse_rational(src_lo), parse_rational(src_hi)
    dst_lo, dst_hi = parse_rational(dst_lo), parse_rational(dst_hi)
    pieces = []
    if lo < src_lo:
        pieces.append(Linear(lo, src_lo, dst_lo, dst_lo))
    pieces.append(Stairs(src_lo, src_hi, dst_lo, dst_hi))
    if src_hi < hi:
        pieces.append(Linear(src_hi, hi, dst_hi, dst_hi))
    return Piecewise(domain, pieces, name=name)


def pl_map(domain, table, codomain=None, name=""):
    """Piecewise-linear map from rows (from, to, f_from, f_to)."""
    pieces = [Linear(*(parse_rational(v) for v in row)) for row in table]
    return Piecewise(domain, pieces, codomain=codomain, name=name)


def mirror_extend(length, half_pieces, name="", codomain=None, domain=None):
    """Circle map on [0, L] given on [0, L/2] and extended by f(x) = f(L - x)."""
    length = parse_rational(length)
    pieces = list(half_pieces)
    pieces += [p.reflected(length) for p in reversed(half_pieces)]
    dom = domain if domain is not None else Circle(length)
    return Piecewise(dom, pieces, codomain=codomain, name=name)


def post_reflect(m: Piecewise, name=""):
    """pi o m for the circle reflection pi(x) = L - x."""
    L = m.codomain.length
    pieces = [type(p)(p.lo, p.hi, L - p.v_lo, L - p.v_hi) for p in m.pieces]
    return Piecewise(m.domain, pieces, codomain=m.codomain, name=name)


def identity_map(space, name="id"):
    lo, hi = _domain_range(space)
    return Piecewise(space, [Linear(lo, hi, lo, hi)], name=name)


# ---------------------------------------------------------------------------
# preimages and breakpoint refinement


def chain_preimage(maps, y):
    """Preimage of y under maps[0] o ... o maps[-1] as (points, intervals)."""
    pts, ivs = [y], []
    for m in maps:
        new_pts, new_ivs = set(), []
        for q in pts:
            a, b = m.preimage(q)
            new_pts.update(a)
            new_ivs.extend(b)
        for a, b in ivs:
            # preimage of an interval: endpoints only matter for breakpoints
            for q in (a, b):
                pa, pb = m.preimage(q)
                new_pts.update(pa)
                new_ivs.extend(pb)
        pts, ivs = sorted(new_pts), new_ivs
    return pts, ivs


def composite_breakpoints(maps, lo, hi):
    """Points splitting [lo, hi] into segments where the composite is affine."""
    pts = {lo, hi}
    for j, m in enumerate(maps):
        inner = maps[j + 1:]
        for b in m.breakpoints():
            if inner:
                p, ivs = chain_preimage(inner, b)
                pts.update(p)
                for a, c in ivs:
                    pts.update((a, c))
            else:
                pts.add(b)
    return tuple(sorted(x for x in pts if lo <= x <= hi))


def _compose_eval(maps, x):
    for m in reversed(maps):
        x = m.evaluate(x)
    return x


def lipschitz_bound(m) -> Fraction:
    """Upper bound on the Lipschitz constant (lifted) of a PL expression."""
    if isinstance(m, Piecewise):
        return max(abs(p.slope) for p in m.pieces)
    if isinstance(m, Constant):
        return ZERO
    if isinstance(m, ReflectCompose):
        return lipschitz_bound(m.inner)
    if isinstance(m, Composite):
        out = ONE
        for sub in m.maps:
            out *= lipschitz_bound(sub)
        return out
    raise DomainError(f"no Lipschitz bound for {m!r}")


def functions_equal(lhs, rhs, lo, hi):
    """Exact identity check of two PL composites on [lo, hi].

    Both sides are affine between the merged breakpoints, so agreement at the
    ends of each segment proves equality on it.  On circles values only agree
    mod the circumference; segments are split until both sides together move
    less than one circumference, which rules out a full extra wind.
    Returns None on success, else a witness coordinate.
    """
    lhs, rhs = list(lhs), list(rhs)
    for side in (lhs, rhs):
        if not all(m.is_lipschitz() for m in side):
            raise DomainError("symbolic identity checks need piecewise-linear maps")
    bps = sorted(set(composite_breakpoints(lhs, lo, hi)) | set(composite_breakpoints(rhs, lo, hi)))
    cod = lhs[0].codomain
    period = cod.length if isinstance(cod, Circle) else None
    lip = ONE
    if period is not None:
        for side in (lhs, rhs):
            b = ONE
            for m in side:
                b *= lipschitz_bound(m)
            lip += b
    for a, b in zip(bps, bps[1:]):
        cuts = [a, b]
        if period is not None and lip * (b - a) >= period:
            n = int(lip * (b - a) / period) + 1
            cuts = [a + (b - a) * Fraction(i, n) for i in range(n + 1)]
        for x in cuts:
            u, v = _compose_eval(lhs, x), _compose_eval(rhs, x)
            if period is not None:
                u, v = u % period, v % period
            if u != v:
                return x
    return None


# ---------------------------------------------------------------------------
# systems and words


@dataclass
class FunctionSystem:
    space: ModelSpace
    maps: tuple
    labels: tuple = ()

    def __post_init__(self):
        self.maps = tuple(self.maps)
        if not self.maps:
            raise DomainError("a function system needs at least one map")
        if not self.labels:
            self.labels = tuple(getattr(m, "name", "") or f"f{i}" for i, m in enumerate(self.maps))
        self.labels = tuple(self.labels)
        for m in self.maps:
            if getattr(m, "domain", self.space) != self.space:
                raise DomainError(f"map {m!r} is not a self-map of {self.space}")

    def __len__(self):
        return len(self.maps)

    def word(self, letters) -> "Word":
        return Word(self, tuple(letters))

    def full_region(self):
        return full_region(self.space)

    def breakpoints(self):
        pts = set()
        for m in self.maps:
            pts.update(m.breakpoints())
        return pts

    def net(self, resolution, word_len: int = 2) -> EpsilonNet:
        """Grid plus breakpoints and their images under words up to ``word_len``."""
        extra = set()
        if not isinstance(self.space, Cube):
            layer = set(self.breakpoints())
            extra |= layer
            for _ in range(word_len):
                layer = {m.evaluate(self.space.validate(x)) for m in self.maps for x in layer}
                extra |= layer
        return build_net(self.space, resolution, extra)

    def to_json(self):
        return {
            "space": self.space.to_json(),
            "maps": [m.to_json() for m in self.maps],
            "labels": list(self.labels),
        }


@dataclass(frozen=True)
class Word:
    system: FunctionSystem = field(repr=False)
    letters: tuple = ()

    def __post_init__(self):
        n = len(self.system.maps)
        for i in self.letters:
            if not 0 <= i < n:
                raise DomainError(f"letter {i} does not index a map of the system")

    def __len__(self):
        return len(self.letters)

    def __add__(self, other: "Word"):
        return Word(self.system, self.letters + other.letters)

    def evaluate(self, x):
        x = self.system.space.validate(x)
        for i in reversed(self.letters):
            x = self.system.maps[i].evaluate(x)
        return x

    __call__ = evaluate

    def image(self, region=None):
        if region is None:
            region = full_region(self.system.space)
        for i in reversed(self.letters):
            region = self.system.maps[i].image(region)
        return region

    def label(self):
        return "".join(self.system.labels[i] for i in self.letters) or "id"


def evaluate(m, x):
    return m.evaluate(x)


def word_image_diameter(word: Word, net: EpsilonNet):
    """Diameter of the word's image of the net (a lower bound on diam w(X))."""
    return set_diameter(net.space, {word.evaluate(x) for x in net.points})


# ---------------------------------------------------------------------------
# gluing and weak contraction


@dataclass
class GluingResult:
    ok: bool
    breakpoint: Fraction | None = None
    left: Fraction | None = None
    right: Fraction | None = None
    level_diameters: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_gluing(m: Piecewise, family=None) -> GluingResult:
    """Check a map assembled from closed pieces is continuous.

    Adjacent pieces must agree at shared breakpoints (mod the circumference on
    circles, including the wrap at 0).  ``family`` optionally lists levels of
    further closed pieces (e.g. the gap arcs X_s grouped by |s|); their
    diameters and image diameters must shrink to zero level by level.
    """
    period = m.codomain.length if isinstance(m.codomain, Circle) else None

    def same(u, v):
        return (u - v) % period == 0 if period is not None else u == v

    for p, q in zip(m.pieces, m.pieces[1:]):
        if not same(p.v_hi, q.v_lo):
            return GluingResult(False, p.hi, m._reduce(p.v_hi), m._reduce(q.v_lo), reason="junction")
    if isinstance(m.domain, Circle):
        first, last = m.pieces[0], m.pieces[-1]
        if not same(last.v_hi, first.v_lo):
            return GluingResult(False, ZERO, m._reduce(last.v_hi), m._reduce(first.v_lo), reason="wrap")
    levels = []
    if family is not None:
        for level in family:
            dx = max((b - a for a, b in level), default=ZERO)
            dfx = max((m.image(IntervalSet.of([(a, b)])).diameter() for a, b in level), default=ZERO)
            levels.append((dx, dfx))
        dxs = [dx for dx, _ in levels]
        dfs = [df for _, df in levels]
        half = len(levels) // 2
        shrinking = all(b < a for a, b in zip(dxs, dxs[1:]))
        if half and not (max(dfs[half:]) == 0 or max(dfs[half:]) < max(dfs[:half])):
            shrinking = False
        if not shrinking:
            return GluingResult(False, level_diameters=levels, reason="family diameters do not shrink")
    return GluingResult(True, level_diameters=levels)


@dataclass
class WeakContractionResult:
    ok: bool
    witness: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_weak_contraction(m: MapExpr, net: EpsilonNet) -> WeakContractionResult:
    """d(f x, f y) < d(x, y) for all distinct net pairs (plus a slope check for PL maps).

    A failing pair with the largest d(x, y) is returned as the witness.
    """
    space = net.space
    pts = list(net.points)
    vals = [m.evaluate(x) for x in pts]
    worst = None
    for (i, x), (j, y) in itertools.combinations(enumerate(pts), 2):
        dxy = space.distance(x, y)
        if space.distance(vals[i], vals[j]) >= dxy:
            if worst is None or dxy > worst[0]:
                worst = (dxy, x, y)
    if worst is not None:
        return WeakContractionResult(False, (worst[1], worst[2]), "pair not contracted")
    if isinstance(m, Piecewise):
        for p in m.pieces:
            if isinstance(p, Linear) and abs(p.slope) > 1:
                return WeakContractionResult(False, (p.lo, p.hi), f"slope {p.slope} on [{p.lo}, {p.hi}]")
    return WeakContractionResult(True)


# ---------------------------------------------------------------------------
# JSON


def _piece_from_json(d):
    vals = [parse_rational(d[k]) for k in ("from", "to", "f_from", "f_to")]
    if d.get("kind", "linear") == "stairs":
        return Stairs(*vals)
    return Linear(*vals)


def map_from_json(d: dict, space: ModelSpace) -> MapExpr:
    kind = d.get("kind")
    if kind == "pl":
        return Piecewise(space, [_piece_from_json(p) for p in d["pieces"]], name=d.get("name", ""))
    if kind == "constant":
        v = d["value"]
        v = tuple(parse_rational(c) for c in v) if isinstance(v, list) else parse_rational(v)
        return Constant(space, v)
    if kind == "staircase":
        return staircase_map(space, d["src_lo"], d["src_hi"], d["dst_lo"], d["dst_hi"])
    if kind == "reflect":
        return ReflectCompose(map_from_json(d["inner"], space))
    if kind == "compose":
        return Composite([map_from_json(x, space) for x in d["maps"]])
    if kind == "cube_affine":
        return CubeAffine(space, d.get("shift", "0"))
    if kind == "cube_homothety":
        return CubeHomothety(space, d["ratio"], d["offset"])
    raise DomainError(f"unknown map kind {kind!r}")


def system_from_json(d: dict) -> FunctionSystem:
    from .spaces import space_from_json

    space = space_from_json(d["space"])
    maps = [map_from_json(m, space) for m in d["maps"]]
    return FunctionSystem(space, maps, tuple(d.get("labels", ())))


def region_points(region) -> list:
    """Endpoints of a region (useful as sample points)."""
    if isinstance(region, BoxSet):
        return [tuple(lo for lo, _ in b) for b in region.boxes]
    out = []
    for a, b in region.domain_intervals():
        out.extend((a, b))
    return out
