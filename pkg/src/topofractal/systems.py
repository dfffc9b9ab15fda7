"""Concrete witnessing systems with exact self-verification.

* the two-map system on the structured interval (Cantor set C in [1/3, 2/3]),
* the three-map system on the circle of length 23 and its nine derived maps,
* the two-map rotation/halving system on the cube,
* small classical IFSs used as baselines.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .contractivity import check_covering, constant_composites, regroup_word
from .errors import ConstructionError, UsageError
from .maps import (
    CantorSymbolic,
    Composite,
    CubeAffine,
    CubeHomothety,
    FunctionSystem,
    Linear,
    Piecewise,
    Stairs,
    functions_equal,
    identity_map,
    mirror_extend,
    pl_map,
    post_reflect,
)
from .regions import ArcSet, IntervalSet, arc_region, full_region
from .spaces import (
    CantorAddress,
    Circle,
    Cube,
    Interval,
    StructuredInterval,
    ONE,
    ZERO,
    all_addresses,
    build_net,
    cantor_coordinate,
    binary_value,
    format_rational,
    gap_endpoints,
)

F = Fraction


@dataclass
class Check:
    """One named condition with its outcome and, on failure, a witness."""

    name: str
    ok: bool
    witness: object = None

    def to_json(self):
        w = self.witness
        if isinstance(w, Fraction):
            w = format_rational(w)
        elif isinstance(w, (tuple, list)):
            w = [format_rational(x) if isinstance(x, Fraction) else str(x) for x in w]
        elif w is not None:
            w = str(w)
        return {"name": self.name, "ok": self.ok, "witness": w}


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)

    def add(self, name, ok, witness=None):
        self.checks.append(Check(name, bool(ok), None if ok else witness))

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.ok]

    def __len__(self):
        return len(self.checks)

    def raise_on_failure(self):
        if self.failures:
            c = self.failures[0]
            raise ConstructionError(c.name, c.witness)

    def to_json(self):
        return {
            "ok": self.ok,
            "passed": sum(c.ok for c in self.checks),
            "total": len(self.checks),
            "checks": [c.to_json() for c in self.checks],
        }


# ---------------------------------------------------------------------------
# structured interval


THIRD, TWO_THIRDS = F(1, 3), F(2, 3)
TABLE_DEPTH = 8


@dataclass
class StructuredIntervalSystem:
    space: StructuredInterval
    f: Piecewise
    g: Piecewise
    table: CheckReport

    @property
    def system(self):
        return FunctionSystem(self.space, [self.f, self.g], ("f", "g"))

    @staticmethod
    def gap(s):
        """X_s as (l(s), r(s))."""
        return gap_endpoints(s)

    @staticmethod
    def p(u):
        """[0,1] onto R = [2/3, 1]; p(0) is the right end r = 2/3 of C."""
        return TWO_THIRDS + u / 3


def structured_f(space):
    return pl_map(space, [(0, TWO_THIRDS, F(5, 9), THIRD), (TWO_THIRDS, 1, THIRD, 0)], name="f")


def structured_g(space):
    pieces = [
        Linear(ZERO, THIRD, F(5, 9), F(5, 9)),
        Linear(THIRD, F(4, 9), F(5, 9), TWO_THIRDS),
        Linear(F(4, 9), F(5, 9), TWO_THIRDS, TWO_THIRDS),
        Stairs(F(5, 9), TWO_THIRDS, TWO_THIRDS, ONE),
        Linear(TWO_THIRDS, ONE, ONE, ONE),
    ]
    return Piecewise(space, pieces, name="g")


def _iv(a, b):
    return IntervalSet.of([(a, b)])


def verify_structured_tables(f, g, depth: int = TABLE_DEPTH) -> CheckReport:
    """Every row of the f and g image tables, exactly, for gap words |s| <= depth."""
    rep = CheckReport()
    h = cantor_coordinate
    l, r = THIRD, TWO_THIRDS
    L_set, R_set = _iv(0, THIRD), _iv(TWO_THIRDS, 1)
    l0, r0 = gap_endpoints(())
    p = StructuredIntervalSystem.p
    f_on_c = CantorSymbolic("prepend0_op")
    g_on_0c = CantorSymbolic("prepend1")
    g_on_1c = CantorSymbolic("stairs_then_affine")

    full = _iv(0, 1)
    rep.add("f(X) = [0, 5/9]", f.image(full) == _iv(0, F(5, 9)), f.image(full).parts)
    rep.add("g(X) = [5/9, 1]", g.image(full) == _iv(F(5, 9), 1), g.image(full).parts)
    rep.add("f(X) u g(X) = X", IntervalSet.of(f.image(full).parts + g.image(full).parts) == full)
    rep.add("f(R) = L", f.image(R_set) == L_set, f.image(R_set).parts)
    rep.add("f(r) = l", f(r) == l, f(r))
    rep.add("f(L) = X_empty", f.image(L_set) == _iv(l0, r0), f.image(L_set).parts)
    rep.add("f(l) = l(empty)", f(l) == l0, f(l))
    rep.add("g(L) = {r(empty)}", g.image(L_set) == _iv(r0, r0), g.image(L_set).parts)
    rep.add("g(X_empty) = {r}", g.image(_iv(l0, r0)) == _iv(r, r), g.image(_iv(l0, r0)).parts)
    rep.add("g(R) = {p(1)} = {1}", g.image(R_set) == _iv(1, 1) and p(ONE) == 1)
    rep.add("p(0) = r", p(ZERO) == r)

    for s in all_addresses(depth):
        ls, rs = gap_endpoints(s)
        op = tuple(1 - d for d in s)
        lt, rt = gap_endpoints((0,) + op)
        name = "".join(map(str, s)) or "empty"
        rep.add(f"f(X_{name}) = X_0{name}^op", f.image(_iv(ls, rs)) == _iv(lt, rt), s)
        rep.add(f"f swaps ends of X_{name}", f(ls) == rt and f(rs) == lt, s)
        for tail in ("0", "1", "01", "10"):
            t = CantorAddress(s, tail)
            rep.add(f"f(h({t})) = h(0 {t}^op)", f(h(t)) == h(f_on_c(t)), t)
            rep.add(f"g(h(0{t})) = h(1{t})", g(h(t.prepend(0))) == h(g_on_0c(t)), t)
            rep.add(f"g(h(1{t})) = q({t})", g(h(t.prepend(1))) == g_on_1c(t), t)
        if s and s[0] == 0:
            rest = s[1:]
            tl, tr = gap_endpoints((1,) + rest)
            rep.add(
                f"g(X_{name}) = X_1{name[1:]} keeping ends",
                g.image(_iv(ls, rs)) == _iv(tl, tr) and g(ls) == tl and g(rs) == tr,
                s,
            )
        elif s:
            rest = s[1:]
            ql = p(binary_value(CantorAddress(rest + (0,), "1")))
            qr = p(binary_value(CantorAddress(rest + (1,), "0")))
            rep.add(f"g(X_{name}) = {{q(l)}} = {{q(r)}}", ql == qr and g.image(_iv(ls, rs)) == _iv(ql, ql), s)
    return rep


def build_cantor_interval_system(depth: int = TABLE_DEPTH) -> StructuredIntervalSystem:
    space = StructuredInterval()
    f, g = structured_f(space), structured_g(space)
    table = verify_structured_tables(f, g, depth)
    table.raise_on_failure()
    return StructuredIntervalSystem(space, f, g, table)


# ---------------------------------------------------------------------------
# circle of length 23


LENGTH = F(23)
C_PT, B_PT, D_PT, A_PT = ZERO, F(9), F(23, 2), F(14)


@dataclass
class CircleWitnessSystem:
    space: Circle
    pi: Piecewise
    alpha: Piecewise
    beta: Piecewise
    gamma: Piecewise
    constraints: CheckReport
    fix_alpha: Fraction
    fix_beta: Fraction

    landmarks = {"c": C_PT, "b": B_PT, "d": D_PT, "a": A_PT}

    @property
    def system(self):
        return FunctionSystem(self.space, [self.alpha, self.beta, self.gamma], ("alpha", "beta", "gamma"))

    @property
    def maps(self):
        return (self.alpha, self.beta, self.gamma)

    def arc(self, name):
        a, b = _ARCS[name]
        return arc_region(self.space, a, b)


_ARCS = {
    "A": (ZERO, B_PT),
    "C": (B_PT, A_PT),
    "B": (A_PT, LENGTH),
    "L": (ZERO, D_PT),
    "R": (D_PT, LENGTH),
    "E": (F(5), B_PT),
}


def _alpha_half():
    return [
        Linear(F(0), F(5), F(9), F(5)),
        Linear(F(5), F(9), F(5), F(2)),
        Linear(F(9), D_PT, F(2), F(0)),
    ]


def _gamma_half():
    return [
        Linear(F(0), F(2), A_PT, A_PT),
        Linear(F(2), F(5), A_PT, D_PT),
        Linear(F(5), F(9), D_PT, B_PT),
        Linear(F(9), D_PT, B_PT, B_PT),
    ]


def fixed_points(m: Piecewise):
    """Fixed points of a circle PL map (lifts may differ by a multiple of L)."""
    L = m.domain.length
    out = set()
    for p in m.pieces:
        s = p.slope
        if s == 1:
            continue
        for k in range(-2, 3):
            # v_lo + s (x - lo) = x + kL
            x = (p.v_lo - s * p.lo - k * L) / (1 - s)
            if p.lo <= x <= p.hi:
                out.add(x % L)
    return sorted(out)


def _monotone_bijection(m, lo, hi, target_lo, target_hi):
    """m restricted to [lo, hi] is strictly monotone with the given end values."""
    slopes = [p.slope for p in m.pieces if p.lo >= lo and p.hi <= hi]
    if not slopes or not (all(s > 0 for s in slopes) or all(s < 0 for s in slopes)):
        return False
    ends = {m(lo), m(hi)}
    return ends == {target_lo % LENGTH, target_hi % LENGTH}


def verify_circle_constraints(space, pi, alpha, beta, gamma) -> CheckReport:
    rep = CheckReport()
    arc = lambda n: arc_region(space, *_ARCS[n])  # noqa: E731
    full = full_region(space)
    ident = identity_map(space)
    L = LENGTH

    pi_ok = (
        functions_equal([pi, pi], [ident], ZERO, L) is None
        and pi(C_PT) == C_PT
        and pi(D_PT) == D_PT
        and pi(A_PT) == B_PT
        and pi(B_PT) == A_PT
        and pi.image(arc("A")) == arc("B")
        and pi.image(arc("L")) == arc("R")
    )
    rep.add("pi is an involution fixing c, d and swapping a/b, A/B, L/R", pi_ok)
    rep.add("alpha maps S onto A", alpha.image(full) == arc("A"), alpha.image(full).arcs)
    rep.add("alpha = alpha o pi", (w := functions_equal([alpha], [alpha, pi], ZERO, L)) is None, w)
    rep.add("alpha|L is a monotone bijection onto A", _monotone_bijection(alpha, ZERO, D_PT, B_PT, ZERO))
    rep.add("alpha(c) = b", alpha(C_PT) == B_PT, alpha(C_PT))
    rep.add("beta = pi o alpha", (w := functions_equal([beta], [pi, alpha], ZERO, L)) is None, w)
    rep.add("gamma maps S onto C", gamma.image(full) == arc("C"), gamma.image(full).arcs)
    rep.add("gamma = gamma o pi", (w := functions_equal([gamma], [gamma, pi], ZERO, L)) is None, w)

    pts, ivs = gamma.preimage(B_PT)
    pre_b = ArcSet.of(L, [(a, b - a) for a, b in ivs] + [(x, ZERO) for x in pts])
    rep.add("gamma^-1(b) = C", pre_b == arc("C"), pre_b.arcs)

    pts, ivs = gamma.preimage(A_PT)
    pre_a = ArcSet.of(L, [(a, b - a) for a, b in ivs] + [(x, ZERO) for x in pts])
    ac, bc = alpha.image(arc("C")), beta.image(arc("C"))
    union = ArcSet.of(L, ac.arcs + bc.arcs)
    expected = ArcSet.of(L, [(F(21), F(4))])
    rep.add(
        "gamma^-1(a) = alpha(C) u beta(C) = [21, 2]",
        pre_a == union == expected,
        pre_a.arcs,
    )

    aA, bA = alpha.image(arc("A")), beta.image(arc("A"))
    mono = (
        aA == arc_region(space, F(2), B_PT)
        and bA == arc_region(space, A_PT, F(21))
        and _monotone_bijection(gamma, F(2), B_PT, A_PT, B_PT)
        and _monotone_bijection(gamma, A_PT, F(21), B_PT, A_PT)
    )
    rep.add("gamma maps alpha(A) and beta(A) monotonically onto C", mono)

    fa = fixed_points(alpha)
    rep.add("gamma(fix(alpha)) = d", fa == [F(5)] and gamma(fa[0]) == D_PT, fa)
    w = functions_equal([gamma], [pi, gamma, alpha], F(5), B_PT)
    rep.add("gamma|E = pi o gamma o alpha|E", w is None, w)
    metric = (
        alpha.image(arc("A")).total_length() == 7
        and space.arc_distance(F(5), alpha(A_PT)) == 3
        and arc("A").total_length() == 9
        and arc("B").total_length() == 9
        and arc("C").total_length() == 5
    )
    rep.add("|alpha(A)| = 7 and dist(fix(alpha), alpha(a)) = 3", metric)
    return rep


def circle_maps(space=None):
    space = space or Circle(LENGTH)
    pi = pl_map(space, [(0, LENGTH, LENGTH, 0)], name="pi")
    alpha = mirror_extend(LENGTH, _alpha_half(), name="alpha", domain=space)
    beta = post_reflect(alpha, name="beta")
    gamma = mirror_extend(LENGTH, _gamma_half(), name="gamma", domain=space)
    return space, pi, alpha, beta, gamma


def build_circle_system() -> CircleWitnessSystem:
    space, pi, alpha, beta, gamma = circle_maps()
    rep = verify_circle_constraints(space, pi, alpha, beta, gamma)
    rep.raise_on_failure()
    fa, fb = fixed_points(alpha), fixed_points(beta)
    if fb != [F(18)]:
        raise ConstructionError("fix(beta) = 18", fb)
    return CircleWitnessSystem(space, pi, alpha, beta, gamma, rep, fa[0], fb[0])


# ---------------------------------------------------------------------------
# the orbit Q of a


ORBIT_GUARD = 12


@dataclass
class OrbitSetQ:
    depth: int
    points: frozenset
    gen: dict

    def __contains__(self, x):
        return x in self.points

    def __len__(self):
        return len(self.points)

    def sorted(self):
        return sorted(self.points)

    def to_json(self):
        return {
            "depth": self.depth,
            "size": len(self.points),
            "points": [{"q": format_rational(q), "gen": self.gen[q]} for q in sorted(self.points)],
        }


def _orbit(maps, depth, start=A_PT):
    gen = {start: 0}
    level = {start}
    for n in range(1, depth + 1):
        level = {m(x) for x in level for m in maps}
        for x in level:
            gen.setdefault(x, n)
    return OrbitSetQ(depth, frozenset(gen), gen)


def orbit_Q(depth: int, circle: CircleWitnessSystem | None = None) -> OrbitSetQ:
    """Images of a = 14 under all words of length <= depth."""
    if not isinstance(depth, int) or depth < 0:
        raise UsageError("orbit depth must be a nonnegative integer")
    if depth > ORBIT_GUARD:
        raise UsageError(f"orbit depth {depth} exceeds the guard {ORBIT_GUARD}")
    circle = circle or build_circle_system()
    return _orbit(circle.maps, depth)


def generation(q, circle, limit=40):
    """First word length producing q from a (searching past the usual guard)."""
    level, seen = {A_PT}, {A_PT}
    if q == A_PT:
        return 0
    for n in range(1, limit + 1):
        level = {m(x) for x in level for m in circle.maps} - seen
        if q in level:
            return n
        seen |= level
    raise UsageError(f"{q} not reached from a within {limit} steps")


C_PREIMAGES = frozenset({ZERO, D_PT, F(5), F(18)})


def check_circle_claims(Q: OrbitSetQ, circle: CircleWitnessSystem | None = None) -> CheckReport:
    circle = circle or build_circle_system()
    rep = CheckReport()
    nxt = _orbit(circle.maps, Q.depth + 1)
    rep.add("c not in Q", C_PT not in Q.points, C_PT)

    missing = sorted(circle.pi(q) for q in Q.points if circle.pi(q) not in nxt.points)
    rep.add("pi(Q_d) in Q_(d+1)", not missing, missing[:1])

    bad = None
    for q in sorted(Q.points - {A_PT, B_PT}):
        for name, m in zip(("alpha", "beta", "gamma"), circle.maps):
            pts, ivs = m.preimage(q)
            off = [x for x in pts if x not in nxt.points]
            if ivs or off:
                bad = (q, name)
                break
        if bad:
            break
    rep.add("phi^-1(q) in Q_(d+1) for q in Q_d minus {a, b}", bad is None, bad)

    acc, layer = {C_PT}, {C_PT}
    for _ in range(max(Q.depth, 1)):
        new = set()
        for y in layer:
            for m in circle.maps:
                pts, ivs = m.preimage(y)
                new.update(pts)
                for a, b in ivs:
                    new.update((a, b))
        layer = new - acc
        acc |= new
    rep.add("preimages of c = {c, d, fix(alpha), fix(beta)}", frozenset(acc) == C_PREIMAGES, sorted(acc))
    return rep


# ---------------------------------------------------------------------------
# nine derived maps


NINE_LABELS = ("f1", "f2", "f3", "f4", "f5", "f6", "g1", "g2", "g3")

# letters 0, 1, 2 stand for alpha, beta, gamma
NINE_BLOCKS = {
    (0,): 0,
    (1,): 1,
    (2, 0, 0): 2,
    (2, 0, 1): 3,
    (2, 1, 0): 4,
    (2, 1, 1): 5,
    (2, 2): 6,
    (2, 0, 2): 7,
    (2, 1, 2): 8,
}


@dataclass
class NineMapSystem:
    system: FunctionSystem
    contractive: tuple
    constant: tuple
    words_checked: int

    def regroup(self, letters):
        """Parse an alpha/beta/gamma word into nine-map letters plus a remainder."""
        return regroup_word(letters, NINE_BLOCKS)


def nine_maps(alpha, beta, gamma, space, labels=NINE_LABELS):
    base = (alpha, beta, gamma)
    maps = []
    for block in NINE_BLOCKS:
        parts = [base[i] for i in block]
        maps.append(parts[0] if len(parts) == 1 else Composite(parts, name=""))
    return FunctionSystem(space, maps, labels)


def derived_nine_maps(circle: CircleWitnessSystem, word_budget: int = 4, check_equal: bool = True):
    sys9 = nine_maps(circle.alpha, circle.beta, circle.gamma, circle.space)
    f3 = sys9.maps[2]
    if check_equal:
        for k in (3, 4, 5):
            w = functions_equal(f3.maps, sys9.maps[k].maps, ZERO, circle.space.length)
            if w is not None:
                raise ConstructionError(f"f3 = {NINE_LABELS[k]}", w)
    contractive, constant = sys9.maps[:6], sys9.maps[6:]
    checked, violation = constant_composites(contractive, constant, word_budget)
    if violation is not None:
        raise ConstructionError("g_i o f o g_j constant", violation)
    return NineMapSystem(sys9, contractive, constant, checked)


# ---------------------------------------------------------------------------
# cube


@dataclass
class CubeSystem:
    system: FunctionSystem
    checks: CheckReport


def build_cube_system(n: int, verify: bool = True) -> CubeSystem:
    if not isinstance(n, int) or n < 1:
        raise UsageError("cube dimension must be a positive integer")
    space = Cube(n)
    f = CubeAffine(space, ZERO, name="f")
    g = CubeAffine(space, F(1, 2), name="g")
    system = FunctionSystem(space, [f, g], ("f", "g"))
    rep = CheckReport()
    if verify:
        cov = check_covering(system, build_net(space, F(1, 64)))
        rep.add("f(X) u g(X) covers the cube at resolution 1/64", cov.ok, cov.witness)
        rep.add("word diameters <= 2^-floor(m/n) for m <= 4n", *_cube_bound(system, 4 * n))
    return CubeSystem(system, rep)


def _cube_bound(system, m_max):
    n = system.space.dim
    level = {full_region(system.space)}
    for m in range(1, m_max + 1):
        level = {f.image(b) for b in level for f in system.maps}
        bound = F(1, 2 ** (m // n))
        worst = max(b.diameter() for b in level)
        if worst > bound:
            return False, (m, worst)
    return True, None


# ---------------------------------------------------------------------------
# baseline IFSs and builtins


def cantor_ifs():
    sp = Interval(0, 1)
    return FunctionSystem(
        sp, [pl_map(sp, [(0, 1, 0, F(1, 3))]), pl_map(sp, [(0, 1, F(2, 3), 1)])], ("f0", "f1")
    )


def binary_ifs():
    sp = Interval(0, 1)
    return FunctionSystem(
        sp, [pl_map(sp, [(0, 1, 0, F(1, 2))]), pl_map(sp, [(0, 1, F(1, 2), 1)])], ("h0", "h1")
    )


def sierpinski_ifs():
    sp = Cube(2)
    half = F(1, 2)
    corners = [(0, 0), (half, 0), (0, half)]
    return FunctionSystem(sp, [CubeHomothety(sp, half, v) for v in corners], ("s0", "s1", "s2"))


def builtin_names():
    return [
        "builtin:cantor-interval",
        "builtin:circle23",
        "builtin:cube-N",
        "builtin:cantor-ifs",
        "builtin:binary-ifs",
        "builtin:sierpinski",
    ]


def builtin_system(name: str) -> FunctionSystem:
    key = name.removeprefix("builtin:")
    if key == "cantor-interval":
        return build_cantor_interval_system().system
    if key == "circle23":
        return build_circle_system().system
    if key == "cantor-ifs":
        return cantor_ifs()
    if key == "binary-ifs":
        return binary_ifs()
    if key == "sierpinski":
        return sierpinski_ifs()
    if key.startswith("cube-"):
        try:
            n = int(key[5:])
        except ValueError:
            raise UsageError(f"bad cube dimension in {name!r}") from None
        return build_cube_system(n, verify=False).system
    raise UsageError(f"unknown builtin {name!r}; available: {', '.join(builtin_names())}")


# ---------------------------------------------------------------------------
# random two-map circle systems


def _tent(space, start, length, apex):
    L = space.length
    return Piecewise(space, [Linear(ZERO, apex, start, start + length), Linear(apex, L, start + length, start)])


def _wrap(space, shift):
    L = space.length
    return Piecewise(space, [Linear(ZERO, L, shift, shift + L)])


def random_circle_pair(rng: random.Random, length=ONE, metric="chordal") -> FunctionSystem:
    """Two PL self-maps of the circle; their images usually, not always, cover."""
    space = Circle(F(length), metric)
    L = space.length

    def frac(lo, hi):
        return L * F(rng.randint(lo, hi), 1000)

    maps = []
    if rng.random() < 0.2:
        maps.append(_wrap(space, frac(0, 999)))
        s, ln = frac(0, 999), frac(100, 900)
        maps.append(_tent(space, s, ln, frac(1, 999)))
    else:
        s1, l1 = frac(0, 999), frac(250, 900)
        slack = frac(0, 150) - L * F(1, 20)
        s2 = s1 + l1 - max(slack, ZERO)
        l2 = L - l1 + slack + max(slack, ZERO) + frac(0, 50)
        l2 = min(l2, L)
        maps.append(_tent(space, s1, l1, frac(1, 999)))
        maps.append(_tent(space, s2, l2, frac(1, 999)))
    return FunctionSystem(space, maps, ("m0", "m1"))
