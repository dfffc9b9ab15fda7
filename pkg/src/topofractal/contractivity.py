"""Certifying topological contractivity and covering of function systems.

The depth search walks the word tree by right extension.  Appending letters on
the right only shrinks a word's image (``w o r (X)`` lies in ``w(X)``), so a
branch whose image is already below epsilon is closed for good.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, InconsistencyError
from .maps import Composite, FunctionSystem
from .regions import ArcSet, full_region, region_diameter
from .spaces import (
    Circle,
    Cube,
    EpsilonNet,
    ZERO,
    format_rational,
    parse_rational,
    set_diameter,
)


# ---------------------------------------------------------------------------
# image backends


class RegionImages:
    """Exact images of the whole space, memoized by word."""

    method = "exact regions"

    def __init__(self, system: FunctionSystem):
        self.system = system
        self.space = system.space
        self._cache = {(): full_region(system.space)}

    def image(self, word):
        cache = self._cache
        hit = cache.get(word)
        if hit is not None:
            return hit
        # walk down to the longest cached suffix, then back up
        k = 1
        while word[k:] not in cache:
            k += 1
        region = cache[word[k:]]
        for j in range(k - 1, -1, -1):
            region = self.system.maps[word[j]].image(region)
            cache[word[j:]] = region
        return region

    def diameter(self, word):
        return region_diameter(self.space, self.image(word))


class NetImages:
    """Images of a finite net (lower bounds for the true diameters)."""

    method = "net"

    def __init__(self, system: FunctionSystem, net: EpsilonNet):
        self.system = system
        self.space = system.space
        self.net = net
        self._cache = {(): frozenset(net.points)}

    def image(self, word):
        cache = self._cache
        if word in cache:
            return cache[word]
        k = 1
        while word[k:] not in cache:
            k += 1
        pts = cache[word[k:]]
        for j in range(k - 1, -1, -1):
            m = self.system.maps[word[j]]
            pts = frozenset(m.evaluate(x) for x in pts)
            cache[word[j:]] = pts
        return pts

    def diameter(self, word):
        return set_diameter(self.space, self.image(word))


def _backend(system, net, method):
    if method == "net" or (method is None and net is not None):
        if net is None:
            raise DomainError("net method needs a net")
        return NetImages(system, net)
    return RegionImages(system)


# ---------------------------------------------------------------------------
# depth search


@dataclass
class ContractionCertificate:
    epsilon: Fraction
    k: int | None
    frontier: list
    visited: int
    pruned: int
    k_max: int
    method: str = "exact regions"
    resolution: Fraction | None = None
    witness: tuple | None = None

    @property
    def exhausted(self) -> bool:
        return self.k is None

    def __bool__(self):
        return self.k is not None

    def statement(self) -> str:
        if self.k is None:
            return f"no certificate up to k_max={self.k_max} (not a refutation)"
        where = "exactly" if self.resolution is None else f"at resolution {format_rational(self.resolution)}"
        return f"every word of length {self.k} has image diameter < {format_rational(self.epsilon)}, certified {where}"

    def to_json(self):
        return {
            "epsilon": format_rational(self.epsilon),
            "k": self.k,
            "frontier": [list(w) for w in self.frontier],
            "visited": self.visited,
            "pruned": self.pruned,
            "k_max": self.k_max,
            "method": self.method,
            "resolution": None if self.resolution is None else format_rational(self.resolution),
            "statement": self.statement(),
        }


def _check_args(epsilon, k_max):
    epsilon = parse_rational(epsilon)
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    return epsilon


def min_contraction_depth(
    system: FunctionSystem,
    epsilon,
    k_max: int,
    net: EpsilonNet | None = None,
    prune: bool = True,
    method: str | None = None,
) -> ContractionCertificate:
    """Least k <= k_max with every length-k word image of diameter < epsilon.

    Images are exact regions unless a net is given (or ``method="net"``), in
    which case diameters are net lower bounds.  The returned frontier is the
    prefix code of words where the image first drops below epsilon, sorted.
    """
    epsilon = _check_args(epsilon, k_max)
    images = _backend(system, net, method)
    resolution = net.resolution if isinstance(images, NetImages) else None
    if not prune:
        return _levelwise(system, images, epsilon, k_max, resolution)
    n = len(system.maps)
    frontier, visited, pruned = [], 0, 0
    stack = [()]
    while stack:
        w = stack.pop()
        visited += 1
        if images.diameter(w) < epsilon:
            frontier.append(w)
            pruned += 1
            continue
        if len(w) == k_max:
            return ContractionCertificate(
                epsilon, None, [], visited, pruned, k_max, images.method, resolution, witness=w
            )
        # push in reverse so words pop in lexicographic order
        stack.extend(w + (i,) for i in range(n - 1, -1, -1))
    frontier.sort()
    k = max(1, max(len(w) for w in frontier))
    return ContractionCertificate(epsilon, k, frontier, visited, pruned, k_max, images.method, resolution)


def _levelwise(system, images, epsilon, k_max, resolution):
    n = len(system.maps)
    visited = 0
    for k in range(1, k_max + 1):
        level = list(itertools.product(range(n), repeat=k))
        visited += len(level)
        if all(images.diameter(w) < epsilon for w in level):
            return ContractionCertificate(epsilon, k, level, visited, 0, k_max, images.method, resolution)
    return ContractionCertificate(epsilon, None, [], visited, 0, k_max, images.method, resolution)


# ---------------------------------------------------------------------------
# covering


@dataclass
class CoveringResult:
    ok: bool
    max_gap: Fraction | float
    witness: object = None
    resolution: Fraction | None = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        w = self.witness
        if isinstance(w, tuple):
            w = [format_rational(c) for c in w]
        elif w is not None:
            w = format_rational(w)
        gap = self.max_gap
        return {
            "ok": self.ok,
            "max_gap": format_rational(gap) if isinstance(gap, Fraction) else gap,
            "witness": w,
        }


def _dist_to_intervals(x, parts, period=None):
    best = None
    for a, b in parts:
        if a <= x <= b:
            return ZERO
        for e in (a, b):
            t = abs(x - e)
            if period is not None:
                t %= period
                t = min(t, period - t)
            if best is None or t < best:
                best = t
    return best


def check_covering(system: FunctionSystem, net: EpsilonNet) -> CoveringResult:
    """Every net point must lie within the net resolution of the union of images.

    Images are exact regions, so the reported gap is the true distance from
    each net point to f_1(X) u ... u f_n(X).
    """
    space = system.space
    regions = [m.image(full_region(space)) for m in system.maps]
    if isinstance(space, Cube):
        return _cube_covering(space, regions, net)
    period = space.length if isinstance(space, Circle) else None
    parts = [iv for r in regions for iv in r.domain_intervals()]
    worst, witness = ZERO, None
    for x in net.points:
        d = _dist_to_intervals(x, parts, period)
        if d > worst:
            worst, witness = d, x
    if isinstance(space, Circle) and space.metric == "chordal":
        worst = 2.0 * math.sin(math.pi * float(worst / space.length))
    return CoveringResult(worst <= net.resolution, worst, witness, net.resolution)


def _cube_covering(space, regions, net):
    pts = net.as_array()
    best = np.full(len(pts), np.inf)
    for r in regions:
        for box in r.boxes:
            lo = np.array([float(a) for a, _ in box])
            hi = np.array([float(b) for _, b in box])
            d = np.maximum(np.maximum(lo - pts, pts - hi), 0.0).max(axis=1)
            best = np.minimum(best, d)
    i = int(np.argmax(best))
    witness = tuple(Fraction(float(c)) for c in pts[i])
    exact = min(_box_distance(witness, b) for r in regions for b in r.boxes)
    return CoveringResult(exact <= net.resolution, exact, witness if exact > 0 else None, net.resolution)


def _box_distance(x, box):
    return max(max(lo - c, c - hi, ZERO) for c, (lo, hi) in zip(x, box))


@dataclass
class FractalReport:
    covering: CoveringResult
    certificates: list
    resolution: Fraction

    @property
    def ok(self):
        return self.covering.ok and all(c.k is not None for c in self.certificates)

    def to_json(self):
        return {
            "covering": self.covering.to_json(),
            "certificates": [c.to_json() for c in self.certificates],
            "resolution": format_rational(self.resolution),
        }


def verify_topological_fractal(system, epsilon_list, k_max, net=None, method=None) -> FractalReport:
    if net is None:
        net = system.net(Fraction(1, 64))
    cov = check_covering(system, net)
    certs = [
        min_contraction_depth(system, e, k_max, net if method == "net" else None, method=method)
        for e in epsilon_list
    ]
    return FractalReport(cov, certs, net.resolution)


# ---------------------------------------------------------------------------
# regrouping


@dataclass
class RegroupResult:
    k_three: int | None
    derived_bound: int | None
    k_direct: int | None
    three: ContractionCertificate
    direct: ContractionCertificate | None = None

    def to_json(self):
        return {"k_three": self.k_three, "derived_bound": self.derived_bound, "k_direct": self.k_direct}


def regroup_three_to_two(f, g, epsilon, k_max, net=None) -> RegroupResult:
    """Certify {f, g o f, g o g}; a depth k there gives depth <= 2k for {f, g}.

    Any word over {f, g} of length 2k factors (after dropping at most one
    trailing letter) into k blocks f, gf, gg, so its image sits inside a
    length-k image of the regrouped system.  The bound is then re-checked
    directly on {f, g}.
    """
    space = f.domain
    three = FunctionSystem(space, [f, Composite([g, f]), Composite([g, g])], ("f", "gf", "gg"))
    c3 = min_contraction_depth(three, epsilon, k_max, net)
    if c3.k is None:
        return RegroupResult(None, None, None, c3)
    bound = 2 * c3.k
    direct = min_contraction_depth(FunctionSystem(space, [f, g], ("f", "g")), epsilon, bound, net)
    if direct.k is None or direct.k > bound:
        raise InconsistencyError(
            f"{{f, g}} not certified at the derived depth {bound}; the net is probably too coarse"
        )
    return RegroupResult(c3.k, bound, direct.k, c3, direct)


def regroup_word(letters, blocks: dict):
    """Greedy left-to-right parse of ``letters`` into the keys of ``blocks``.

    Returns (indices, remainder): ``letters`` equals the concatenation of the
    parsed blocks followed by ``remainder``, which is shorter than the longest
    block.  Every key must be prefix-free with respect to the others.
    """
    out, i = [], 0
    longest = max(len(b) for b in blocks)
    letters = tuple(letters)
    while i < len(letters):
        for n in range(1, longest + 1):
            blk = letters[i:i + n]
            if blk in blocks:
                out.append(blocks[blk])
                i += n
                break
        else:
            return out, letters[i:]
    return out, ()


# ---------------------------------------------------------------------------
# constant composites g_i o f o g_j


@dataclass
class FractalMapsResult:
    ok: bool
    words_checked: int = 0
    violation: dict | None = None
    k_contractive: int | None = None
    k_tail: int | None = None
    derived_depth: int | None = None
    direct: ContractionCertificate | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        v = self.violation
        if v is not None:
            v = {
                "outer": v["outer"],
                "word": list(v["word"]),
                "inner": v["inner"],
                "points": [format_rational(p) if isinstance(p, Fraction) else p for p in v["points"]],
            }
        return {
            "ok": self.ok,
            "words_checked": self.words_checked,
            "violation": v,
            "k_contractive": self.k_contractive,
            "k_tail": self.k_tail,
            "derived_depth": self.derived_depth,
            "direct_k": None if self.direct is None else self.direct.k,
            "reason": self.reason,
        }


def _apply_word(maps, word, x):
    for i in reversed(word):
        x = maps[i].evaluate(x)
    return x


def constant_composites(contractive, constant, word_budget, net=None):
    """Check g_i o w o g_j is constant for all words w with |w| <= word_budget.

    Returns (number of distinct inner images checked, violation or None).
    Images are tracked as exact regions and deduplicated.
    """
    space = constant[0].domain
    full = full_region(space)
    seen = {}
    level = {}
    for j, g in enumerate(constant):
        level.setdefault(g.image(full), ((), j))
    checked = 0
    for depth in range(word_budget + 1):
        fresh = {r: v for r, v in level.items() if r not in seen}
        for region, (word, j) in fresh.items():
            seen[region] = (word, j)
            for i, g in enumerate(constant):
                checked += 1
                if not g.image(region).is_point():
                    return checked, _violation(contractive, constant, i, word, j, net)
        if depth == word_budget:
            break
        level = {}
        for region, (word, j) in fresh.items():
            for k, f in enumerate(contractive):
                level.setdefault(f.image(region), ((k,) + word, j))
    return checked, None


def _violation(contractive, constant, i, word, j, net):
    space = constant[0].domain
    if net is None:
        net = FunctionSystem(space, list(contractive) + list(constant)).net(Fraction(1, 64))
    values = {}
    pts = []
    for x in net.points:
        y = constant[i].evaluate(_apply_word(contractive, word, constant[j].evaluate(x)))
        values.setdefault(y, x)
        if len(values) == 2:
            pts = list(values.values())
            break
    return {"outer": i, "word": word, "inner": j, "points": pts}


def fractalmaps_certificate(contractive, constant, word_budget, epsilon, k_max, net=None):
    """Certify F u G given that F is contractive and every g_i o f o g_j is constant.

    A word over F u G with two letters from G collapses to a point.  With at
    most one such letter it is either long in F on the outside (depth k1 of F)
    or ends in a long F-word under some u o g with |u| < k1 (depth k2 below).
    So depth k1 + k2 suffices, and that is checked directly.
    """
    epsilon = _check_args(epsilon, k_max)
    contractive, constant = list(contractive), list(constant)
    checked, violation = constant_composites(contractive, constant, word_budget, net)
    if violation is not None:
        return FractalMapsResult(False, checked, violation, reason="non-constant composite")
    space = constant[0].domain
    f_sys = FunctionSystem(space, contractive)
    cf = min_contraction_depth(f_sys, epsilon, k_max)
    if cf.k is None:
        return FractalMapsResult(False, checked, reason="contractive part not certified", direct=cf)
    k1 = cf.k
    k2 = _tail_depth(contractive, constant, k1, epsilon, k_max)
    if k2 is None:
        return FractalMapsResult(False, checked, k_contractive=k1, reason="tail depth not found")
    depth = max(1, k1 + k2)
    union = FunctionSystem(space, contractive + constant)
    direct = min_contraction_depth(union, epsilon, depth)
    ok = direct.k is not None
    return FractalMapsResult(
        ok, checked, None, k1, k2, depth, direct, "" if ok else "direct check failed at derived depth"
    )


def _tail_depth(contractive, constant, k1, epsilon, k_max):
    """Least m: every u o g o v with |v| = m, |u| < k1 has image diameter < epsilon."""
    space = constant[0].domain
    level = {full_region(space)}
    for m in range(k_max + 1):
        images = {g.image(r) for r in level for g in constant}
        ok = True
        layer = images
        for _ in range(k1):
            if any(region_diameter(space, r) >= epsilon for r in layer):
                ok = False
                break
            layer = {f.image(r) for r in layer for f in contractive}
        if ok:
            return m
        level = {f.image(r) for r in level for f in contractive}
    return None


# ---------------------------------------------------------------------------
# antipodal witnesses on the circle


@dataclass
class AntipodalResult:
    kind: str  # "witness" or "coverage_gap"
    map_index: int | None = None
    a: Fraction | None = None
    b: Fraction | None = None
    images: tuple | None = None
    image_distance: float | None = None
    preimage_distance: float | None = None
    gap_point: Fraction | None = None
    gap_arc: tuple | None = None

    def verify(self, system) -> bool:
        """Re-check the result from scratch."""
        space = system.space
        if self.kind == "witness":
            m = system.maps[self.map_index]
            fa, fb = m.evaluate(self.a), m.evaluate(self.b)
            d_img = space.chordal_distance(fa, fb)
            d_pre = space.chordal_distance(self.a, self.b)
            return d_img >= 2 - 1e-6 and d_img >= d_pre
        full = full_region(space)
        return not any(m.image(full).contains(self.gap_point) for m in system.maps)

    def to_json(self):
        def r(v):
            return None if v is None else format_rational(v)

        out = {"kind": self.kind}
        if self.kind == "witness":
            out.update(
                map_index=self.map_index,
                a=r(self.a),
                b=r(self.b),
                images=[r(v) for v in self.images],
                image_distance=self.image_distance,
                preimage_distance=self.preimage_distance,
            )
        else:
            out.update(gap_point=r(self.gap_point), gap_arc=[r(v) for v in self.gap_arc])
        return out


def _uncovered_arcs(period, regions):
    parts = sorted(iv for r in regions for iv in r.domain_intervals())
    gaps, reach = [], ZERO
    for a, b in parts:
        if a > reach:
            gaps.append((reach, a))
        reach = max(reach, b)
    if reach < period:
        gaps.append((reach, period))
    if len(gaps) > 1 and gaps[0][0] == 0 and gaps[-1][1] == period:
        last = gaps.pop()
        first = gaps.pop(0)
        gaps.append((last[0], first[1] + period))
    return [(a, b) for a, b in gaps if a < b]


def _some_preimage(m, y):
    pts, ivs = m.preimage(y)
    if pts:
        return pts[0]
    if ivs:
        return ivs[0][0]
    raise InconsistencyError(f"{y} is in the image of {m!r} but has no preimage")


def antipodal_witness(system: FunctionSystem, net: EpsilonNet | None = None) -> AntipodalResult:
    """On a circle, a 2-map cover forces one image to contain antipodes.

    Returns a pair a, b with f_i(a), f_i(b) antipodal (chordal distance 2 on
    the unit circle), so f_i is not a weak contraction; or a point the images
    miss.
    """
    space = system.space
    if not isinstance(space, Circle):
        raise DomainError("antipodal witnesses live on a circle")
    L = space.length
    half = L / 2
    full = full_region(space)
    regions = [m.image(full) for m in system.maps]
    gaps = _uncovered_arcs(L, regions)
    if gaps:
        a, b = max(gaps, key=lambda g: g[1] - g[0])
        mid = ((a + b) / 2) % L
        return AntipodalResult("coverage_gap", gap_point=mid, gap_arc=(a % L, b % L))
    for i, (m, reg) in enumerate(zip(system.maps, regions)):
        shifted = ArcSet.of(L, [(s + half, ln) for s, ln in reg.arcs])
        y = reg.intersection_point(shifted)
        if y is None:
            continue
        y2 = (y + half) % L
        a, b = _some_preimage(m, y), _some_preimage(m, y2)
        fa, fb = m.evaluate(a), m.evaluate(b)
        return AntipodalResult(
            "witness",
            i,
            a,
            b,
            (fa, fb),
            space.chordal_distance(fa, fb),
            space.chordal_distance(a, b),
        )
    raise InconsistencyError("images cover the circle but none contains an antipodal pair")


__all__ = [
    "AntipodalResult",
    "ContractionCertificate",
    "CoveringResult",
    "FractalMapsResult",
    "FractalReport",
    "RegroupResult",
    "antipodal_witness",
    "check_covering",
    "constant_composites",
    "fractalmaps_certificate",
    "min_contraction_depth",
    "regroup_three_to_two",
    "regroup_word",
    "verify_topological_fractal",
]
