import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topofractal.errors import ConstructionError, UsageError
from topofractal.maps import Composite, functions_equal, pl_map
from topofractal.regions import IntervalSet, arc_region, full_region
from topofractal.spaces import CantorAddress, Cube, all_addresses, cantor_coordinate, gap_endpoints
from topofractal.systems import (
    C_PREIMAGES,
    CheckReport,
    OrbitSetQ,
    build_cube_system,
    builtin_names,
    builtin_system,
    check_circle_claims,
    derived_nine_maps,
    fixed_points,
    orbit_Q,
    verify_circle_constraints,
    verify_structured_tables,
)

L = F(23)


# Closed forms for the circle maps, written out independently of the library.
def alpha_ref(x):
    x %= L
    if x > L / 2:
        x = L - x
    if x <= 5:
        return 9 - F(4, 5) * x
    if x <= 9:
        return 5 - F(3, 4) * (x - 5)
    return 2 - F(4, 5) * (x - 9)


def gamma_ref(x):
    x %= L
    if x > L / 2:
        x = L - x
    if x <= 2:
        return F(14)
    if x <= 5:
        return 14 - F(5, 6) * (x - 2)
    if x <= 9:
        return 9 + F(5, 8) * (9 - x)
    return F(9)


def beta_ref(x):
    return (L - alpha_ref(x)) % L


def f_ref(x):
    return F(5, 9) - x / 3 if x <= F(2, 3) else 1 - x


circle_pts = st.fractions(min_value=0, max_value=23, max_denominator=300)
unit_pts = st.fractions(min_value=0, max_value=1, max_denominator=3**7)


class TestStructured:
    def test_examples(self, structured):
        assert structured.f(F(2, 3)) == F(1, 3)
        assert structured.g(F(2, 5)) == F(28, 45)
        X = full_region(structured.space)
        assert structured.f.image(X) == IntervalSet.of([(0, F(5, 9))])
        assert structured.g.image(X) == IntervalSet.of([(F(5, 9), 1)])

    @given(unit_pts)
    def test_f_closed_form(self, x):
        from topofractal.systems import structured_f
        from topofractal.spaces import StructuredInterval

        assert structured_f(StructuredInterval())(x) == f_ref(x)

    def test_table_rows(self, structured):
        assert structured.table.ok
        assert len(structured.table) >= 510
        assert not structured.table.failures

    def test_table_detects_tampering(self, structured):
        bad_f = pl_map(structured.space, [(0, F(2, 3), F(5, 9), F(1, 3)), (F(2, 3), 1, F(1, 3), F(1, 18))])
        rep = verify_structured_tables(bad_f, structured.g, 2)
        assert not rep.ok
        with pytest.raises(ConstructionError):
            rep.raise_on_failure()

    def test_staircase_equal_on_gap_ends(self, structured):
        for s in all_addresses(8):
            lo, hi = gap_endpoints((1,) + s)
            assert structured.g(lo) == structured.g(hi)

    def test_p_pins_right_end(self, structured):
        assert structured.p(F(0)) == F(2, 3)
        assert structured.g(F(1)) == structured.p(F(1)) == 1

    def test_f_on_gap_swaps_endpoints(self, structured):
        for s in all_addresses(6):
            lo, hi = gap_endpoints(s)
            op = tuple(1 - d for d in s)
            lo2, hi2 = gap_endpoints((0,) + op)
            assert (structured.f(lo), structured.f(hi)) == (hi2, lo2)

    @given(st.lists(st.integers(0, 1), max_size=10), st.sampled_from(["0", "1", "01", "10"]))
    def test_g_prepends_one(self, digits, tail, ):
        from topofractal.systems import structured_g
        from topofractal.spaces import StructuredInterval

        g = structured_g(StructuredInterval())
        t = CantorAddress(tuple(digits), tail)
        assert g(cantor_coordinate(t.prepend(0))) == cantor_coordinate(t.prepend(1))


class TestCircle:
    def test_constraints(self, circle):
        assert circle.constraints.ok
        assert len(circle.constraints) == 14
        rep = verify_circle_constraints(circle.space, circle.pi, circle.alpha, circle.beta, circle.gamma)
        assert rep.to_json()["passed"] == 14

    def test_examples(self, circle):
        assert circle.gamma(F(5)) == F(23, 2)
        assert circle.alpha(F(14)) == 2
        assert circle.space.distance(F(5), F(2)) == 3
        assert circle.gamma(F(7)) == F(41, 4) == L - circle.gamma(circle.alpha(F(7)))
        assert circle.alpha(F(7)) == F(7, 2)
        assert (circle.fix_alpha, circle.fix_beta) == (5, 18)

    @given(circle_pts)
    def test_maps_match_closed_forms(self, x):
        from topofractal.systems import circle_maps

        _, pi, alpha, beta, gamma = circle_maps()
        assert alpha(x) == alpha_ref(x)
        assert beta(x) == beta_ref(x)
        assert gamma(x) == gamma_ref(x)
        assert pi(x) == (L - x) % L

    @given(circle_pts)
    def test_pi_invariance(self, x):
        from topofractal.systems import circle_maps

        _, pi, alpha, _, gamma = circle_maps()
        assert alpha(pi(x)) == alpha(x)
        assert gamma(pi(x)) == gamma(x)

    def test_images_cover(self, circle):
        full = full_region(circle.space)
        images = [m.image(full) for m in circle.maps]
        assert images == [circle.arc("A"), circle.arc("B"), circle.arc("C")]
        assert sum(r.total_length() for r in images) == L

    def test_gamma_on_E_identity_symbolic(self, circle):
        assert functions_equal([circle.gamma], [circle.pi, circle.gamma, circle.alpha], F(5), F(9)) is None
        # outside E the identity fails, so the check is not vacuous
        assert functions_equal([circle.gamma], [circle.pi, circle.gamma, circle.alpha], F(0), F(5)) is not None

    def test_constraint_failure_named(self, circle):
        flat = pl_map(circle.space, [(0, L, 9, 9)], codomain=circle.space)
        rep = verify_circle_constraints(circle.space, circle.pi, flat, circle.beta, circle.gamma)
        assert not rep.ok
        assert "alpha maps S onto A" in {c.name for c in rep.failures}

    def test_fixed_points(self, circle):
        assert fixed_points(circle.alpha) == [5]
        assert fixed_points(circle.beta) == [18]


class TestOrbit:
    def test_small_depths(self, circle):
        assert orbit_Q(0, circle).points == {14}
        assert orbit_Q(1, circle).points == {14, 2, 21, 9}

    def test_sizes_regression(self, circle):
        assert [len(orbit_Q(d, circle)) for d in range(9)] == [1, 4, 6, 9, 14, 19, 27, 37, 50]

    def test_matches_brute_force(self, circle):
        brute = {F(14)}
        for n in range(1, 6):
            for w in itertools.product((alpha_ref, beta_ref, gamma_ref), repeat=n):
                x = F(14)
                for m in reversed(w):
                    x = m(x)
                brute.add(x)
        assert orbit_Q(5, circle).points == brute

    def test_c_not_in_Q(self, orbit8):
        assert 0 not in orbit8

    def test_guard(self, circle):
        with pytest.raises(UsageError):
            orbit_Q(13, circle)
        with pytest.raises(UsageError):
            orbit_Q(-1, circle)

    @pytest.mark.parametrize("d", [2, 5, 7])
    def test_invariance_truncated(self, circle, d):
        Q, nxt = orbit_Q(d, circle), orbit_Q(d + 1, circle)
        images = {m(q) for q in Q.points for m in circle.maps}
        assert images <= nxt.points
        assert nxt.points - {F(14)} <= images

    def test_claims(self, circle, orbit8):
        rep = check_circle_claims(orbit8, circle)
        assert rep.ok and len(rep) == 4

    def test_claim_examples(self, circle):
        q1 = orbit_Q(1, circle)
        assert {circle.pi(q) for q in q1.points} == {9, 21, 2, 14}
        pts, ivs = circle.alpha.preimage(F(2))
        assert sorted(pts) == [9, 14] and not ivs
        assert set(pts) <= q1.points

    def test_preimages_of_c(self, circle):
        assert C_PREIMAGES == {0, F(23, 2), 5, 18}
        rep = check_circle_claims(orbit_Q(6, circle), circle)
        assert rep.ok

    def test_claim_b_detects_missing_points(self, circle):
        fake = OrbitSetQ(1, frozenset({F(14), F(2), F(21), F(9), F(1, 7)}), {})
        rep = check_circle_claims(fake, circle)
        assert not rep.ok


class TestNineMaps:
    def test_build(self, circle):
        nine = derived_nine_maps(circle)
        assert nine.system.labels == ("f1", "f2", "f3", "f4", "f5", "f6", "g1", "g2", "g3")
        full = full_region(circle.space)
        f3 = nine.system.maps[2]
        assert f3.image(full) == arc_region(circle.space, 9, 14)
        assert f3.image(full).diameter() == 5
        assert nine.system.maps[6].image(full).point() == 9
        x = F(3)
        assert nine.system.maps[3](x) == f3(x) == circle.gamma(circle.alpha(circle.alpha(x)))

    def test_property_A(self, circle):
        nine = derived_nine_maps(circle)
        for w in itertools.product(range(3), repeat=7):
            parsed, rest = nine.regroup(w)
            assert len(rest) <= 2
            composite = nine.system.word(parsed)
            x = F(11, 3)
            y = x
            for i in reversed(rest):
                y = circle.maps[i](y)
            assert composite(y) == circle.system.word(w)(x)

    def test_g_composites_constant(self, circle):
        nine = derived_nine_maps(circle, word_budget=3)
        full = full_region(circle.space)
        for gi, gj in itertools.product(nine.constant, repeat=2):
            for f in nine.contractive:
                assert Composite([gi, f, gj]).image(full).is_point()


class TestCube:
    def test_n1_is_binary(self):
        sysm = build_cube_system(1).system
        f, g = sysm.maps
        for x in (F(0), F(1, 3), F(1)):
            assert f((x,)) == (x / 2,)
            assert g((x,)) == (F(1, 2) + x / 2,)

    def test_f_of_g(self):
        sysm = build_cube_system(2).system
        f, g = sysm.maps
        assert g((F(0), F(0))) == (F(1, 2), F(0))
        assert f(g((F(0), F(0)))) == (F(0), F(1, 2))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_checks(self, n):
        rep = build_cube_system(n).checks
        assert rep.ok and len(rep) == 2

    def test_word_length_nine(self):
        sysm = build_cube_system(3, verify=False).system
        worst = max(sysm.word(w).image().diameter() for w in itertools.product(range(2), repeat=9))
        assert worst <= F(1, 8)

    def test_bad_dimension(self):
        with pytest.raises(UsageError):
            build_cube_system(0)


class TestBuiltins:
    def test_names_resolve(self):
        for name in builtin_names():
            sysm = builtin_system(name.replace("cube-N", "cube-2"))
            assert len(sysm) >= 1
        assert isinstance(builtin_system("builtin:cube-3").space, Cube)

    def test_unknown(self):
        with pytest.raises(UsageError, match="available"):
            builtin_system("builtin:nosuch")


def test_check_report_json():
    rep = CheckReport()
    rep.add("a", True)
    rep.add("b", False, F(1, 2))
    d = rep.to_json()
    assert d["passed"] == 1 and d["total"] == 2
    assert d["checks"][1]["witness"] == "1/2"
