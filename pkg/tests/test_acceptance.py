"""Acceptance criteria 1-9, each with its tolerance and runtime budget.

Every test prints one ``CRITERION n: PASS|FAIL`` line (visible with or
without ``-s``) before asserting.
"""
import itertools
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from topofractal.attractor import invariance_residual, iterate_to_attractor
from topofractal.contractivity import (
    antipodal_witness,
    check_covering,
    fractalmaps_certificate,
    min_contraction_depth,
    regroup_three_to_two,
)
from topofractal.denjoy import build_blowup, lift_maps, small_preimage_partition
from topofractal.maps import word_image_diameter
from topofractal.regions import IntervalSet, full_region
from topofractal.spaces import Interval, build_net, hausdorff_distance
from topofractal.systems import (
    build_cantor_interval_system,
    build_circle_system,
    build_cube_system,
    binary_ifs,
    cantor_ifs,
    check_circle_claims,
    derived_nine_maps,
    orbit_Q,
    random_circle_pair,
    verify_structured_tables,
)

UNIT = Interval(F(0), F(1))
CIRCLE_K1_BASELINE = 10


@contextmanager
def criterion(n, budget, capsys):
    """Time the block, print the verdict line, then re-raise any failure."""
    start = time.perf_counter()
    error = None
    try:
        yield
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - start
    if error is None and elapsed >= budget:
        error = AssertionError(f"took {elapsed:.2f}s, budget {budget}s")
    verdict = "PASS" if error is None else "FAIL"
    detail = "" if error is None else f" ({error})"
    with capsys.disabled():
        print(f"\nCRITERION {n}: {verdict} in {elapsed:.2f}s (budget {budget}s){detail}")
    if error is not None:
        raise error


def cantor_endpoints(depth):
    intervals = [(F(0), F(1))]
    for _ in range(depth):
        intervals = [p for lo, hi in intervals for p in ((lo, lo + (hi - lo) / 3), (hi - (hi - lo) / 3, hi))]
    return {x for iv in intervals for x in iv}


def test_criterion_1_covering(capsys):
    with criterion(1, 5 * 6, capsys):
        timings = []
        t = time.perf_counter()
        si = build_cantor_interval_system(depth=0)
        X = full_region(si.space)
        assert si.f.image(X) == IntervalSet.of([(0, F(5, 9))])
        assert si.g.image(X) == IntervalSet.of([(F(5, 9), 1)])
        assert check_covering(si.system, si.system.net(F(1, 64))).max_gap == 0
        timings.append(time.perf_counter() - t)

        t = time.perf_counter()
        circle = build_circle_system()
        images = [m.image(full_region(circle.space)) for m in circle.maps]
        assert images == [circle.arc("A"), circle.arc("B"), circle.arc("C")]
        assert sum(r.total_length() for r in images) == 23
        assert check_covering(circle.system, circle.system.net(F(1, 64))).max_gap == 0
        timings.append(time.perf_counter() - t)

        for n in range(1, 5):
            t = time.perf_counter()
            sysm = build_cube_system(n, verify=False).system
            cov = check_covering(sysm, build_net(sysm.space, F(1, 64)))
            assert cov.ok and cov.max_gap == 0
            timings.append(time.perf_counter() - t)
        assert max(timings) < 5, f"slowest covering check took {max(timings):.2f}s"


def test_criterion_2_contractivity(capsys):
    with criterion(2, 60, capsys):
        assert min_contraction_depth(cantor_ifs(), F(1, 10), 10).k == 3

        si = build_cantor_interval_system(depth=0)
        cert = min_contraction_depth(si.system, F(1, 2), 16)
        assert cert.k == 2
        diams = [si.system.word(w).image().diameter() for w in itertools.product(range(2), repeat=2)]
        assert diams == [F(5, 27), F(10, 27), F(1, 9), F(1, 3)]

        cube = build_cube_system(3, verify=False).system
        worst = max(cube.word(w).image().diameter() for w in itertools.product(range(2), repeat=9))
        assert worst <= F(1, 8)

        circle = build_circle_system()
        cert = min_contraction_depth(circle.system, F(1), 40)
        assert cert.k == CIRCLE_K1_BASELINE
        net = circle.system.net(F(1, 8))
        rng = random.Random(2)
        for _ in range(50):
            word = circle.system.word([rng.randrange(3) for _ in range(cert.k)])
            assert word_image_diameter(word, net) < 1


def test_criterion_3_tables(capsys):
    with criterion(3, 10, capsys):
        si = build_cantor_interval_system(depth=0)
        rep = verify_structured_tables(si.f, si.g, 8)
        assert len(rep) >= 510
        assert rep.ok, rep.failures[:1]


def test_criterion_4_circle_constraints(capsys):
    with criterion(4, 1, capsys):
        circle = build_circle_system()
        rep = circle.constraints
        assert len(rep) == 14 and rep.ok
        names = {c.name for c in rep.checks}
        assert "gamma|E = pi o gamma o alpha|E" in names
        assert circle.alpha.image(circle.arc("A")).total_length() == 7
        assert circle.space.distance(circle.fix_alpha, circle.alpha(F(14))) == 3


def test_criterion_5_orbit_claims(capsys):
    with criterion(5, 30, capsys):
        circle = build_circle_system()
        Q = orbit_Q(8, circle)
        assert 0 not in Q
        rep = check_circle_claims(Q, circle)
        assert rep.ok, rep.failures
        assert next(c for c in rep.checks if c.name.startswith("preimages of c")).ok


def test_criterion_6_regrouping(capsys):
    with criterion(6, 120, capsys):
        si = build_cantor_interval_system(depth=0)
        cf, cg = cantor_ifs().maps
        for f, g in ((si.f, si.g), (cf, cg)):
            for eps in (F(1, 2), F(1, 10)):
                res = regroup_three_to_two(f, g, eps, 20)
                assert res.k_direct <= 2 * res.k_three
        circle = build_circle_system()
        nine = derived_nine_maps(circle)
        for eps in (F(2), F(1)):
            k3 = min_contraction_depth(circle.system, eps, 40).k
            k9 = min_contraction_depth(nine.system, eps, 40).k
            assert k3 <= 3 * k9 + 2, (eps, k3, k9)


def test_criterion_7_denjoy(capsys):
    with criterion(7, 120, capsys):
        circle = build_circle_system()
        lifted = lift_maps(build_blowup(4, F(1), circle), circle)
        net = build_net(lifted.space, lifted.space.length / 10_000)
        assert len(net) >= 10_000
        assert lifted.semiconjugacy_residual(net.points) == 0
        for eps in (F(1), F(1, 2), F(1, 10)):
            assert small_preimage_partition(lifted.space, eps).ok
        nine = lifted.nine()
        res = fractalmaps_certificate(nine.maps[:6], nine.maps[6:], 3, F(1), 40)
        assert res.ok, res.reason


def test_criterion_8_hutchinson(capsys):
    with criterion(8, 10, capsys):
        pts, _ = iterate_to_attractor(cantor_ifs(), [F(0)], 10)
        assert hausdorff_distance(UNIT, pts, cantor_endpoints(9)) <= F(1, 3**9)
        assert invariance_residual(cantor_ifs(), [F(0)]) == F(2, 3)
        a, _ = iterate_to_attractor(binary_ifs(), [F(0)], 10)
        b, _ = iterate_to_attractor(binary_ifs(), [F(1)], 10)
        assert hausdorff_distance(UNIT, a, b) <= 2 * F(1, 2**10)


def test_criterion_9_antipodal(capsys):
    with criterion(9, 30, capsys):
        rng = random.Random(20261015)
        kinds = {"witness": 0, "coverage_gap": 0}
        for _ in range(50):
            sysm = random_circle_pair(rng)
            res = antipodal_witness(sysm)
            assert res.verify(sysm)
            if res.kind == "witness":
                assert res.image_distance >= 2 - 1e-6
                assert res.image_distance >= res.preimage_distance
            kinds[res.kind] += 1
        assert sum(kinds.values()) == 50
