"""Hutchinson iteration A -> f_1(A) u ... u f_n(A) on finite exact point sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .maps import CubeHomothety, FunctionSystem, Piecewise
from .spaces import Circle, Cube, format_rational, hausdorff_distance

DEFAULT_BUDGET = 4096


@dataclass
class AttractorRun:
    system: FunctionSystem = field(repr=False)
    iterations: int
    point_budget: int
    distances: list
    sizes: list

    def to_json(self):
        return {
            "iterations": self.iterations,
            "point_budget": self.point_budget,
            "successive_hausdorff": [_fmt(d) for d in self.distances],
            "sizes": self.sizes,
        }


def _fmt(x):
    return format_rational(x) if isinstance(x, Fraction) else x


def hutchinson(system: FunctionSystem, pts) -> set:
    return {m.evaluate(x) for m in system.maps for x in pts}


def _as_array(space, pts):
    if isinstance(space, Cube):
        return np.array([[float(c) for c in p] for p in pts])
    return np.array([[float(p)] for p in pts])


def farthest_point_thin(space, pts, budget: int) -> list:
    """Greedy farthest-point subsample, seeded at the smallest point.

    Ties go to the lowest index in sorted order, so runs are reproducible.
    """
    pts = sorted(pts)
    if len(pts) <= budget:
        return pts
    cols = [np.ascontiguousarray(c) for c in _as_array(space, pts).T]
    period = float(space.length) if isinstance(space, Circle) else None

    def dist_to(i):
        out = None
        for c in cols:
            d = np.abs(c - c[i])
            if period is not None:
                d = np.minimum(d, period - d)
            out = d if out is None else np.maximum(out, d)
        return out

    chosen = [0]
    best = dist_to(0)
    for _ in range(budget - 1):
        i = int(np.argmax(best))
        chosen.append(i)
        best = np.minimum(best, dist_to(i))
    return [pts[i] for i in sorted(chosen)]


def iterate_to_attractor(system: FunctionSystem, seed, iterations: int, point_budget: int = DEFAULT_BUDGET):
    """H^iterations(seed), thinned to ``point_budget`` points after every step."""
    seed = [system.space.validate(x) for x in seed]
    if not seed:
        raise DomainError("seed must be nonempty")
    if iterations < 1:
        raise DomainError("iterations must be at least 1")
    space = system.space
    current = None
    distances, sizes = [], []
    pts = seed
    for _ in range(iterations):
        nxt = farthest_point_thin(space, hutchinson(system, pts), point_budget)
        if current is not None:
            distances.append(hausdorff_distance(space, current, nxt))
        current = pts = nxt
        sizes.append(len(nxt))
    return current, AttractorRun(system, iterations, point_budget, distances, sizes)


def invariance_residual(system: FunctionSystem, candidate) -> Fraction:
    """Hausdorff distance between a set and its Hutchinson image."""
    candidate = list(candidate)
    if not candidate:
        raise DomainError("candidate must be nonempty")
    return hausdorff_distance(system.space, candidate, hutchinson(system, candidate))


def contraction_ratio(system: FunctionSystem):
    """Uniform Lipschitz ratio < 1 if every map is a metric contraction, else None."""
    ratios = []
    for m in system.maps:
        if isinstance(m, Piecewise) and m.is_lipschitz() and not isinstance(m.domain, Circle):
            ratios.append(max(abs(p.slope) for p in m.pieces))
        elif isinstance(m, CubeHomothety):
            ratios.append(m.ratio)
        else:
            return None
    r = max(ratios)
    return r if r < 1 else None


# ---------------------------------------------------------------------------
# output


def to_csv(space, pts) -> str:
    rows = []
    for p in sorted(pts):
        if isinstance(p, tuple):
            rows.append(",".join(format_rational(c) for c in p))
        else:
            rows.append(format_rational(p))
    return "\n".join(rows) + "\n"


CIRCLE_LABELS = {"c": Fraction(0), "b": Fraction(9), "d": Fraction(23, 2), "a": Fraction(14)}


def to_svg(space, pts, size: int = 1024) -> str:
    """1-d sets as ticks on a segment, circles on a unit circle, 2-d sets as dots."""
    head = f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">'
    body = [f'<rect width="{size}" height="{size}" fill="white"/>']
    pad = size * 0.05
    span = size - 2 * pad
    if isinstance(space, Cube):
        if space.dim != 2:
            raise DomainError("SVG output supports dimension at most 2")
        for x, y in sorted(pts):
            cx, cy = pad + float(x) * span, size - pad - float(y) * span
            body.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="1.2" fill="black"/>')
    elif isinstance(space, Circle):
        c, rad = size / 2, span / 2
        body.append(f'<circle cx="{c}" cy="{c}" r="{rad}" fill="none" stroke="#bbb"/>')
        L = float(space.length)

        def xy(t, r):
            ang = 2 * math.pi * float(t) / L
            return c + r * math.cos(ang), c - r * math.sin(ang)

        for p in sorted(pts):
            (x0, y0), (x1, y1) = xy(p, rad * 0.96), xy(p, rad * 1.04)
            body.append(f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y1:.3f}" stroke="black"/>')
        if space.length == 23:
            for name, t in CIRCLE_LABELS.items():
                x, y = xy(t, rad * 1.09)
                body.append(f'<text x="{x:.1f}" y="{y:.1f}" font-size="24" text-anchor="middle">{name}</text>')
    else:
        lo, hi = float(space.lo), float(space.hi)
        mid = size / 2
        body.append(f'<line x1="{pad}" y1="{mid}" x2="{size - pad}" y2="{mid}" stroke="#bbb"/>')
        for p in sorted(pts):
            x = pad + (float(p) - lo) / (hi - lo) * span
            body.append(f'<line x1="{x:.3f}" y1="{mid - 20}" x2="{x:.3f}" y2="{mid + 20}" stroke="black"/>')
    return "\n".join([head, *body, "</svg>"]) + "\n"
