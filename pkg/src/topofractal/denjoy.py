"""Denjoy blow-up of the length-23 circle at orbit points of a, and lifted maps.

Each blown-up point q becomes an inserted arc (a blob) of length
``lambda_base * 4**-gen(q)``.  The result is again a circle, of length
T = 23 + sum of blob lengths, with coordinates

    pos(y) = y + (total blob length strictly before y)

so blob(q) = [pos(q), pos(q) + lambda(q)].  The quotient ``p`` collapses each
blob back to its point and has slope 1 elsewhere.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConstructionError, UsageError
from .maps import Composite, FunctionSystem, Linear, Piecewise, check_gluing
from .regions import ArcSet, full_region
from .spaces import Circle, ZERO, build_net, format_rational, parse_rational
from .systems import (
    A_PT,
    B_PT,
    D_PT,
    LENGTH,
    CheckReport,
    CircleWitnessSystem,
    build_circle_system,
    generation,
    nine_maps,
    orbit_Q,
)

BLOWUP_GUARD = 8
F = Fraction


@dataclass(frozen=True)
class BlownUpCircle(Circle):
    """Circle of length 23 + sum(lambda) with blobs at ``blob_points``."""

    depth: int = 0
    lambda_base: Fraction = Fraction(1)
    blob_points: tuple = ()
    blob_lengths: tuple = ()
    blob_gens: tuple = ()
    kind = "blown_up_circle"

    @property
    def base(self) -> Circle:
        return Circle(LENGTH)

    def lam(self, q):
        i = bisect.bisect_left(self.blob_points, q)
        if i < len(self.blob_points) and self.blob_points[i] == q:
            return self.blob_lengths[i]
        return ZERO

    def is_blob(self, q) -> bool:
        i = bisect.bisect_left(self.blob_points, q)
        return i < len(self.blob_points) and self.blob_points[i] == q

    def pos(self, y) -> Fraction:
        """Big coordinate of a base point (the start of its blob if it has one)."""
        i = bisect.bisect_left(self.blob_points, y)
        before = sum(self.blob_lengths[:i], ZERO)
        return y + before

    def after(self, y) -> Fraction:
        """pos(y) + lambda(y): the end of the blob at y, or pos(y)."""
        return self.pos(y) + self.lam(y)

    def blob(self, q):
        if not self.is_blob(q):
            raise UsageError(f"{q} carries no blob")
        s = self.pos(q)
        return s, s + self.lam(q)

    def blob_containing(self, x):
        """(q, start, end) for the closed blob containing big coordinate x, or None."""
        x = x % self.length
        for q, ln in zip(self.blob_points, self.blob_lengths):
            s = self.pos(q)
            if s <= x <= s + ln:
                return q, s, s + ln
        return None

    def landmarks(self):
        pts = {ZERO}
        for q in self.blob_points:
            s, e = self.blob(q)
            pts.update((s, e))
        return tuple(sorted(pts))

    def blob_table(self):
        return [
            {"q": format_rational(q), "gen": g, "lambda": format_rational(ln)}
            for q, g, ln in zip(self.blob_points, self.blob_gens, self.blob_lengths)
        ]

    def to_json(self):
        return {
            "kind": "blown_up_circle",
            "depth": self.depth,
            "lambda_base": format_rational(self.lambda_base),
        }


# ---------------------------------------------------------------------------
# the blob set


def _slopes_at(m: Piecewise, y):
    """Slopes of the pieces just left and just right of y (cyclically)."""
    L = m.domain.length
    y = y % L
    right = next(p for p in m.pieces if p.lo <= y < p.hi)
    left = m.pieces[-1] if y == 0 else next(p for p in m.pieces if p.lo < y <= p.hi)
    return left.slope, right.slope


def _gamma_flat(y):
    """Where the lifted gamma factors through a tent onto a single blob."""
    return B_PT <= y <= A_PT or y >= 21 or y <= 2


def blob_closure(circle: CircleWitnessSystem, seeds) -> set:
    """Close a point set under the preimage branches along which the map is monotone.

    A point y with phi(y) blown up must itself be blown up unless phi turns
    at y or the lift is defined there by a tent (gamma's flat regions);
    otherwise the lift would jump between the two ends of the target blob.
    """
    out = set(seeds)
    todo = list(out)
    flats = (None, None, _gamma_flat)
    while todo:
        q = todo.pop()
        for m, flat in zip(circle.maps, flats):
            pts, _ = m.preimage(q)
            for y in pts:
                if flat is not None and flat(y):
                    continue
                sl, sr = _slopes_at(m, y)
                if sl * sr <= 0:
                    continue
                if y not in out:
                    out.add(y)
                    todo.append(y)
        if len(out) > 20000:
            raise ConstructionError("blob set does not close up")
    return out


def build_blowup(depth: int, lambda_base=Fraction(1), circle: CircleWitnessSystem | None = None) -> BlownUpCircle:
    if not isinstance(depth, int) or depth < 0:
        raise UsageError("blow-up depth must be a nonnegative integer")
    if depth > BLOWUP_GUARD:
        raise UsageError(f"blow-up depth {depth} exceeds the guard {BLOWUP_GUARD}")
    lambda_base = parse_rational(lambda_base)
    if lambda_base <= 0:
        raise UsageError("lambda_base must be positive")
    circle = circle or build_circle_system()
    Q = orbit_Q(depth, circle)
    pts = sorted(blob_closure(circle, Q.points))
    if ZERO in pts:
        raise ConstructionError("c carries no blob", ZERO)
    gens = [Q.gen[q] if q in Q.gen else generation(q, circle) for q in pts]
    lens = [lambda_base / F(4) ** g for g in gens]
    T = LENGTH + sum(lens, ZERO)
    return BlownUpCircle(T, "arc", depth, lambda_base, tuple(pts), tuple(lens), tuple(gens))


# ---------------------------------------------------------------------------
# the quotient p


def quotient_map(space: BlownUpCircle) -> Piecewise:
    pieces = []
    prev = ZERO
    for q in space.blob_points:
        s, e = space.blob(q)
        a = space.after(prev) if space.is_blob(prev) else space.pos(prev)
        if a < s:
            pieces.append(Linear(a, s, prev, q))
        pieces.append(Linear(s, e, q, q))
        prev = q
    a = space.after(prev) if space.is_blob(prev) else space.pos(prev)
    pieces.append(Linear(a, space.length, prev, LENGTH))
    return Piecewise(space, pieces, codomain=space.base, name="p")


def project_p(space: BlownUpCircle, x):
    return quotient_map(space).evaluate(x)


# ---------------------------------------------------------------------------
# lifting


@dataclass(frozen=True)
class Tent:
    """PL map of a base arc [lo, hi] (hi may exceed 23) onto a blob."""

    lo: Fraction
    hi: Fraction
    apex: Fraction
    v_ends: Fraction
    v_apex: Fraction

    def contains(self, y):
        L = LENGTH
        return any(self.lo <= y + k * L <= self.hi for k in (0, 1))

    def value(self, y):
        if not self.lo <= y <= self.hi:
            y += LENGTH
        if y <= self.apex:
            t = (y - self.lo) / (self.apex - self.lo)
        else:
            t = (self.hi - y) / (self.hi - self.apex)
        return self.v_ends + (self.v_apex - self.v_ends) * t

    def cuts(self):
        return {self.lo % LENGTH, self.hi % LENGTH, self.apex % LENGTH}


def gamma_tents(space: BlownUpCircle):
    """s_b on C onto blob(b) and s_a on [21, 2] onto blob(a)."""
    if space.is_blob(B_PT):
        s, e = space.blob(B_PT)
    else:
        s = e = space.pos(B_PT)
    s_b = Tent(B_PT, A_PT, D_PT, e, s)
    sa, ea = space.blob(A_PT)
    s_a = Tent(F(21), F(25), LENGTH, sa, ea)
    return s_b, s_a


def _endpoint_value(space, w, from_above):
    if space.is_blob(w):
        s, e = space.blob(w)
        return e if from_above else s
    return space.pos(w)


def lift_map(phi: Piecewise, space: BlownUpCircle, tents=(), name="") -> Piecewise:
    """Lift a base circle map to the blown-up circle (p o lift = phi o p).

    Between cut points phi is affine and its image avoids blobs, so the lift
    has the same slope there; endpoints landing on a blob go to the end the
    values approach from.  A blob whose image is a blob is mapped affinely
    onto it; otherwise it collapses.  Inside ``tents`` the lift is tent o p.
    """
    T = space.length
    blobs = set(space.blob_points)
    cuts = {ZERO, LENGTH} | blobs | set(phi.breakpoints())
    for t in tents:
        cuts |= t.cuts()
    for q in space.blob_points:
        pts, ivs = phi.preimage(q)
        cuts.update(pts)
        for a, b in ivs:
            cuts.update((a, b))
    cuts = sorted(c for c in cuts if ZERO <= c <= LENGTH)

    def tent_at(y):
        for t in tents:
            if t.contains(y):
                return t
        return None

    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        if a in blobs:
            s, e = space.blob(a)
            t = tent_at(a)
            if t is not None:
                v = t.value(a)
                pieces.append(Linear(s, e, v, v))
            else:
                w = phi.evaluate(a)
                if space.is_blob(w):
                    sl, sr = _slopes_at(phi, a)
                    if sl * sr <= 0:
                        raise ConstructionError("blob sits on a turning point", a)
                    ws, we = space.blob(w)
                    pieces.append(Linear(s, e, ws, we) if sr > 0 else Linear(s, e, we, ws))
                else:
                    v = space.pos(w)
                    pieces.append(Linear(s, e, v, v))
        lo = space.after(a)
        hi = space.pos(b) if b < LENGTH else T
        mid = (a + b) / 2
        t = tent_at(mid)
        if t is not None:
            pieces.append(Linear(lo, hi, t.value(a), t.value(b)))
            continue
        piece = phi.piece_at(mid)
        slope = piece.slope
        if slope == 0:
            w = phi.evaluate(mid)
            if space.is_blob(w):
                raise ConstructionError("flat piece onto a blob outside the tents", mid)
            v = space.pos(w)
            pieces.append(Linear(lo, hi, v, v))
            continue
        v0 = _endpoint_value(space, phi.evaluate(a), slope > 0)
        v1 = v0 + slope * (b - a)
        expect = _endpoint_value(space, phi.evaluate(b % LENGTH), slope < 0)
        if (v1 - expect) % T != 0:
            raise ConstructionError("lifted segment does not land on its endpoint", b)
        pieces.append(Linear(lo, hi, v0, v1))
    m = Piecewise(space, pieces, name=name)
    glue = check_gluing(m)
    if not glue.ok:
        raise ConstructionError("lifted map is not continuous", glue.breakpoint)
    return m


@dataclass
class LiftedSystem:
    space: BlownUpCircle
    base: CircleWitnessSystem
    p: Piecewise
    alpha: Piecewise
    beta: Piecewise
    gamma: Piecewise
    s_b: Tent = field(repr=False, default=None)
    s_a: Tent = field(repr=False, default=None)

    @property
    def maps(self):
        return (self.alpha, self.beta, self.gamma)

    @property
    def system(self):
        return FunctionSystem(self.space, list(self.maps), ("alpha^", "beta^", "gamma^"))

    def nine(self):
        return nine_maps(self.alpha, self.beta, self.gamma, self.space, tuple(n + "^" for n in
                         ("f1", "f2", "f3", "f4", "f5", "f6", "g1", "g2", "g3")))

    def semiconjugacy_residual(self, points) -> Fraction:
        """max over points and maps of the arc distance between p(phi^(x)) and phi(p(x))."""
        base = self.space.base
        worst = ZERO
        for lifted, phi in zip(self.maps, self.base.maps):
            for x in points:
                d = base.arc_distance(self.p(lifted(x)), phi(self.p(x)))
                if d > worst:
                    worst = d
        return worst


def lift_maps(space: BlownUpCircle, circle: CircleWitnessSystem | None = None) -> LiftedSystem:
    circle = circle or build_circle_system()
    s_b, s_a = gamma_tents(space)
    return LiftedSystem(
        space,
        circle,
        quotient_map(space),
        lift_map(circle.alpha, space, name="alpha^"),
        lift_map(circle.beta, space, name="beta^"),
        lift_map(circle.gamma, space, (s_b, s_a), name="gamma^"),
        s_b,
        s_a,
    )


# ---------------------------------------------------------------------------
# small preimages


@dataclass
class Partition:
    epsilon: Fraction
    points: list
    diameters: list

    @property
    def max_diameter(self):
        return max(self.diameters)

    @property
    def ok(self):
        return self.max_diameter < self.epsilon

    def to_json(self):
        return {
            "epsilon": format_rational(self.epsilon),
            "K": [format_rational(k) for k in self.points],
            "max_component_diameter": format_rational(self.max_diameter),
            "ok": self.ok,
        }


def component_diameters(space: BlownUpCircle, K) -> list:
    """Diameter of p^-1 of every component of S minus K, exactly."""
    T = space.length
    K = sorted(set(K))
    out = []
    for i, k in enumerate(K):
        nxt = K[(i + 1) % len(K)]
        length = (space.pos(nxt) - space.after(k)) % T
        if len(K) == 1:
            length = T - space.lam(k)
        out.append(min(length, T / 2))
    return out


def small_preimage_partition(space: BlownUpCircle, epsilon) -> Partition:
    """Finite K in the base circle with diam p^-1(J) < epsilon for each component J of S - K."""
    epsilon = parse_rational(epsilon)
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    if space.length / 2 < epsilon:
        K = [ZERO]
    else:
        step = epsilon / 3
        K = {ZERO} | {q for q, ln in zip(space.blob_points, space.blob_lengths) if ln >= step}
        n = int(LENGTH / step) + 1
        K |= {step * i for i in range(n) if step * i < LENGTH}
        K = sorted(K)
    while True:
        diams = component_diameters(space, K)
        bad = [i for i, d in enumerate(diams) if d >= epsilon]
        if not bad:
            return Partition(epsilon, K, diams)
        extra = set()
        for i in bad:
            a, b = K[i], K[(i + 1) % len(K)]
            if b <= a:
                b += LENGTH
            extra.add(((a + b) / 2) % LENGTH)
        K = sorted(set(K) | extra)


# ---------------------------------------------------------------------------
# degenerate ends


def has_degenerate_ends(space: BlownUpCircle, region: ArcSet) -> bool:
    """Y = closure of p^-1(interior of p(Y)) for a closed arc Y."""
    if region.is_full():
        return True
    if len(region.arcs) != 1:
        return False
    start, length = region.arcs[0]
    end = (start + length) % space.length
    p = quotient_map(space)
    u, v = p(start), p(end)
    if u == v and length < space.length / 2:
        return False
    want_start, want_end = space.after(u) % space.length, space.pos(v) % space.length
    return start == want_start and end == want_end


def degenerate_ends_check(lifted: LiftedSystem, word) -> bool:
    """Image of the whole space under a word over the lifted f1..f6 (indices 0..5)."""
    nine = lifted.nine()
    if any(not 0 <= i < 6 for i in word):
        raise UsageError("degenerate ends are checked for words over f1..f6 only")
    region = full_region(lifted.space)
    for i in reversed(tuple(word)):
        region = nine.maps[i].image(region)
    return has_degenerate_ends(lifted.space, region)


# ---------------------------------------------------------------------------
# report


def denjoy_report(depth, lambda_base, epsilons=(), net_size=10_000) -> tuple:
    """Build, lift and verify; returns (report dict, ok)."""
    circle = build_circle_system()
    space = build_blowup(depth, lambda_base, circle)
    lifted = lift_maps(space, circle)
    res = space.length / net_size
    net = build_net(space, res)
    residual = lifted.semiconjugacy_residual(net.points)
    rep = CheckReport()
    rep.add("semiconjugacy residual is 0", residual == 0, residual)
    rep.add("p^-1(c) is a point", not space.is_blob(ZERO))
    parts = []
    for e in epsilons:
        part = small_preimage_partition(space, e)
        parts.append(part.to_json())
        rep.add(f"small preimages at epsilon {format_rational(part.epsilon)}", part.ok)
    out = {
        "depth": depth,
        "lambda_base": format_rational(space.lambda_base),
        "total_length": format_rational(space.length),
        "blobs": space.blob_table(),
        "net_points": len(net),
        "residual_max": format_rational(residual),
        "partitions": parts,
        "checks": rep.to_json(),
    }
    return out, rep.ok
