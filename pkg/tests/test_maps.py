import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topofractal.errors import DomainError
from topofractal.maps import (
    CantorSymbolic,
    Composite,
    Constant,
    CubeAffine,
    FunctionSystem,
    Linear,
    Piecewise,
    ReflectCompose,
    check_gluing,
    check_weak_contraction,
    evaluate,
    functions_equal,
    identity_map,
    map_from_json,
    pl_map,
    staircase_map,
    system_from_json,
    word_image_diameter,
)
from topofractal.regions import IntervalSet, arc_region, full_region
from topofractal.spaces import (
    CantorAddress,
    Circle,
    Cube,
    Interval,
    StructuredInterval,
    binary_value,
    build_net,
    cantor_coordinate,
    distance,
    set_diameter,
)
from topofractal.systems import cantor_ifs, circle_maps, structured_f, structured_g

UNIT = Interval(F(0), F(1))
S23 = Circle(F(23))
SPACE, PI, ALPHA, BETA, GAMMA = circle_maps()
F_MAP, G_MAP = structured_f(StructuredInterval()), structured_g(StructuredInterval())
circle_pts = st.fractions(min_value=0, max_value=23, max_denominator=200)


class TestEvaluate:
    def test_cube_shift(self):
        cube = Cube(2)
        f = CubeAffine(cube, 0)
        assert evaluate(f, (F(2, 5), F(4, 5))) == (F(2, 5), F(2, 5))

    def test_structured_f_at_one(self, structured):
        assert evaluate(structured.f, F(1)) == 0

    def test_alpha_at_c(self):
        assert evaluate(ALPHA, F(0)) == 9

    def test_domain_error(self):
        with pytest.raises(DomainError):
            evaluate(identity_map(UNIT), F(3, 2))

    def test_circle_wraps_input(self):
        # 23 and 0 are the same circle point
        assert ALPHA(F(23)) == ALPHA(F(0))

    def test_constant(self):
        c = Constant(UNIT, F(1, 3))
        assert c(F(0)) == c(F(1)) == F(1, 3)

    def test_staircase_constant_outside(self):
        m = staircase_map(UNIT, F(1, 3), F(2, 3), F(0), F(1))
        assert m(F(0)) == 0 and m(F(1)) == 1
        assert m(F(1, 2)) == F(1, 2)

    def test_reflect_compose(self):
        m = ReflectCompose(ALPHA)
        for x in (F(0), F(3), F(17, 2)):
            assert m(x) == ALPHA(PI(x))


class TestWords:
    def test_cantor_word_diameter(self):
        sysm = cantor_ifs()
        net = sysm.net(F(1, 81))
        assert word_image_diameter(sysm.word([0, 0]), net) == F(1, 9)

    def test_empty_word_is_identity(self):
        sysm = cantor_ifs()
        net = sysm.net(F(1, 81))
        assert word_image_diameter(sysm.word([]), net) == 1

    def test_gamma_image_diameter(self):
        sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA])
        net = sysm.net(F(1, 4))
        assert word_image_diameter(sysm.word([2]), net) == 5

    def test_bad_letter(self):
        with pytest.raises(DomainError):
            cantor_ifs().word([2])

    @given(st.lists(st.integers(0, 2), max_size=5), st.lists(st.integers(0, 2), max_size=5), circle_pts)
    def test_associativity(self, w1, w2, x):
        sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA])
        a, b = sysm.word(w1), sysm.word(w2)
        assert (a + b).evaluate(x) == a.evaluate(b.evaluate(x))

    @given(st.lists(st.integers(0, 2), max_size=4), st.lists(st.integers(0, 2), min_size=1, max_size=3))
    def test_suffix_monotonicity(self, h, r):
        sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA])
        net = sysm.net(F(1, 2))
        hw, hr = sysm.word(h), sysm.word(list(h) + list(r))
        image_net = {sysm.word(r).evaluate(x) for x in net.points}
        # h r (X) = h(r(X)) is contained in h(X)
        assert {hr.evaluate(x) for x in net.points} == {hw.evaluate(y) for y in image_net}
        assert hr.image().diameter() <= hw.image().diameter()
        assert word_image_diameter(hr, net) <= hw.image().diameter()

    def test_region_image_matches_net(self):
        sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA])
        net = sysm.net(F(1, 8))
        for w in itertools.product(range(3), repeat=3):
            word = sysm.word(w)
            region = word.image()
            for x in net.points[::7]:
                assert region.contains(word.evaluate(x))


class TestCircleSymmetries:
    @given(circle_pts)
    def test_identities(self, x):
        assert ALPHA(PI(x)) == ALPHA(x)
        assert GAMMA(PI(x)) == GAMMA(x)
        assert BETA(x) == PI(ALPHA(x))
        assert PI(PI(x)) == x % 23

    def test_identities_symbolic(self):
        assert functions_equal([ALPHA, PI], [ALPHA], F(0), F(23)) is None
        assert functions_equal([GAMMA, PI], [GAMMA], F(0), F(23)) is None
        assert functions_equal([BETA], [PI, ALPHA], F(0), F(23)) is None

    def test_functions_equal_finds_difference(self):
        assert functions_equal([ALPHA], [BETA], F(0), F(23)) is not None

    def test_full_wind_is_detected(self):
        # x -> x and x -> 2x - ... differ by a full turn somewhere inside
        wind = pl_map(S23, [(0, 23, 0, 46)], codomain=S23)
        ident = identity_map(S23)
        assert functions_equal([wind], [ident], F(0), F(23)) is not None


class TestGluing:
    def test_structured_g_glues(self, structured):
        res = check_gluing(structured.g)
        assert res.ok
        assert structured.g(F(1, 3)) == F(5, 9)

    def test_step_map_fails(self):
        m = Piecewise(UNIT, [Linear(F(0), F(1, 2), F(0), F(0)), Linear(F(1, 2), F(1), F(3, 10), F(3, 10))])
        res = check_gluing(m)
        assert not res.ok
        assert (res.breakpoint, res.left, res.right) == (F(1, 2), 0, F(3, 10))

    def test_structured_f_junction(self, structured):
        f = structured.f
        left = f.pieces[0].value(F(2, 3))
        right = f.pieces[1].value(F(2, 3))
        assert left == right == F(1, 3)
        assert check_gluing(f).ok

    def test_circle_wrap_checked(self):
        bad = pl_map(S23, [(0, 23, 0, 5)], codomain=S23)
        assert check_gluing(bad).reason == "wrap"
        for m in (ALPHA, BETA, GAMMA, PI):
            assert check_gluing(m).ok

    def test_gap_family_shrinks(self, structured):
        from topofractal.spaces import all_addresses, gap_endpoints

        family = [[gap_endpoints(s) for s in all_addresses(n) if len(s) == n] for n in range(6)]
        res = check_gluing(structured.g, family)
        assert res.ok
        assert [dx for dx, _ in res.level_diameters] == [F(1, 3 ** (n + 2)) for n in range(6)]

    def test_non_shrinking_family_fails(self, structured):
        family = [[(F(0), F(1, 3))], [(F(0), F(1, 3))]]
        assert not check_gluing(structured.g, family).ok

    def test_noncontiguous_pieces_rejected(self):
        with pytest.raises(DomainError):
            Piecewise(UNIT, [Linear(F(0), F(1, 3), F(0), F(0)), Linear(F(1, 2), F(1), F(0), F(0))])


class TestWeakContraction:
    def test_third(self):
        m = pl_map(UNIT, [(0, 1, 0, F(1, 3))])
        assert check_weak_contraction(m, build_net(UNIT, F(1, 16))).ok

    def test_identity_fails_with_widest_pair(self):
        res = check_weak_contraction(identity_map(UNIT), build_net(UNIT, F(1, 4)))
        assert not res.ok
        assert res.witness == (0, 1)

    def test_alpha_passes(self):
        slopes = sorted({abs(p.slope) for p in ALPHA.pieces})
        assert slopes == [F(3, 4), F(4, 5)]
        assert check_weak_contraction(ALPHA, build_net(S23, F(1, 2))).ok

    def test_steep_slope_reported(self):
        m = pl_map(UNIT, [(0, F(1, 2), 0, 1), (F(1, 2), 1, 1, 1)])
        assert not check_weak_contraction(m, build_net(UNIT, F(1, 8))).ok


class TestImages:
    def test_interval_images(self, structured):
        X = full_region(structured.space)
        assert structured.f.image(X) == IntervalSet.of([(0, F(5, 9))])
        assert structured.g.image(X) == IntervalSet.of([(F(5, 9), 1)])

    def test_circle_arc_images(self):
        X = full_region(S23)
        assert ALPHA.image(X) == arc_region(S23, 0, 9)
        assert BETA.image(X) == arc_region(S23, 14, 23)
        assert GAMMA.image(X) == arc_region(S23, 9, 14)

    @given(circle_pts, circle_pts)
    def test_arc_image_contains_point_images(self, a, b):
        region = arc_region(S23, a, b)
        for m in (ALPHA, BETA, GAMMA):
            img = m.image(region)
            for x in (a, b, (a + b) / 2):
                if region.contains(x):
                    assert img.contains(m(x))

    def test_preimage_solves(self):
        pts, ivs = ALPHA.preimage(F(2))
        assert sorted(pts) == [9, 14] and not ivs
        pts, ivs = GAMMA.preimage(F(9))
        assert ivs  # gamma collapses C onto b


class TestCantorSymbolic:
    @given(st.lists(st.integers(0, 1), max_size=8), st.sampled_from(["0", "1", "01", "10"]))
    def test_f_on_copy(self, digits, tail):
        t = CantorAddress(tuple(digits), tail)
        x = cantor_coordinate(t)
        assert F_MAP(x) == cantor_coordinate(CantorSymbolic("prepend0_op")(t))

    @given(st.lists(st.integers(0, 1), max_size=8), st.sampled_from(["0", "1", "01", "10"]))
    def test_g_on_zero_block(self, digits, tail):
        t = CantorAddress(tuple(digits), tail)
        x = cantor_coordinate(t.prepend(0))
        assert G_MAP(x) == cantor_coordinate(CantorSymbolic("prepend1")(t))

    @given(st.lists(st.integers(0, 1), max_size=8), st.sampled_from(["0", "1", "01", "10"]))
    def test_g_on_one_block(self, digits, tail):
        t = CantorAddress(tuple(digits), tail)
        x = cantor_coordinate(t.prepend(1))
        assert G_MAP(x) == CantorSymbolic("stairs_then_affine")(t) == F(2, 3) + binary_value(t) / 3

    def test_unknown_rule(self):
        with pytest.raises(DomainError):
            CantorSymbolic("shift")


class TestJson:
    def test_pl_roundtrip(self):
        d = {"kind": "pl", "pieces": [{"from": "0", "to": "5", "f_from": "9", "f_to": "5"},
                                      {"from": "5", "to": "23", "f_from": "5", "f_to": "9"}]}
        m = map_from_json(d, S23)
        assert m(F(0)) == 9 and m(F(5)) == 5
        assert map_from_json(m.to_json(), S23)(F(7)) == m(F(7))

    def test_system_roundtrip(self):
        sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA], ("a", "b", "g"))
        back = system_from_json(sysm.to_json())
        rng = random.Random(3)
        for _ in range(50):
            x = F(rng.randrange(0, 2300), 100)
            assert [m(x) for m in back.maps] == [m(x) for m in sysm.maps]
        assert back.labels == ("a", "b", "g")

    def test_staircase_and_compose(self):
        space = StructuredInterval()
        d = {"kind": "compose", "maps": [
            {"kind": "staircase", "src_lo": "0", "src_hi": "1", "dst_lo": "0", "dst_hi": "1"},
            {"kind": "constant", "value": "1/3"},
        ]}
        m = map_from_json(d, space)
        assert isinstance(m, Composite)
        assert m(F(0)) == F(1, 2)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            map_from_json({"kind": "smooth"}, UNIT)


def test_system_requires_self_maps():
    with pytest.raises(DomainError):
        FunctionSystem(UNIT, [ALPHA])
    with pytest.raises(DomainError):
        FunctionSystem(UNIT, [])


def test_net_diameter_bounded_by_region_diameter():
    sysm = FunctionSystem(S23, [ALPHA, BETA, GAMMA])
    net = sysm.net(F(1, 4))
    for w in itertools.product(range(3), repeat=2):
        word = sysm.word(w)
        assert word_image_diameter(word, net) <= word.image().diameter()
        assert set_diameter(S23, [word(x) for x in net.points]) == word_image_diameter(word, net)
    assert distance(S23, F(0), F(23, 2)) == F(23, 2)
