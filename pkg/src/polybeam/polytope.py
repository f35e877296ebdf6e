"""Newton polygons, mixed area and the Bernstein-Kushnirenko root bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from polybeam.errors import DomainError

Point = tuple[int, int]


def _cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class NewtonPolytope:
    """Lattice polygon given by its extreme vertices in counter-clockwise order.

    Degenerate hulls have one (point) or two (segment) vertices. The vertex
    list starts at the lowest-then-leftmost vertex.
    """

    vertices: tuple

    def __post_init__(self):
        if not self.vertices:
            raise DomainError("a polytope needs at least one vertex")
        if any(x < 0 or y < 0 for x, y in self.vertices):
            raise DomainError("exponent coordinates must be non-negative")

    def __len__(self):
        return len(self.vertices)

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3


def convex_hull(points: Iterable[Point]) -> NewtonPolytope:
    """Monotone-chain hull with collinear boundary points removed."""
    pts = sorted({(int(x), int(y)) for x, y in points})
    if not pts:
        raise DomainError("convex hull of an empty point set")
    if len(pts) <= 2:
        return NewtonPolytope(_canonical(pts))
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return NewtonPolytope(_canonical(hull))


def _canonical(vertices: list[Point]) -> tuple:
    """Rotate a CCW cycle to start at the lowest, then leftmost, vertex."""
    if not vertices:
        return ()
    start = min(range(len(vertices)), key=lambda i: (vertices[i][1], vertices[i][0]))
    return tuple(vertices[start:] + vertices[:start])


def doubled_area(p: NewtonPolytope) -> int:
    """Twice the shoelace area; an exact integer for lattice polygons."""
    v = p.vertices
    if len(v) < 3:
        return 0
    s = 0
    for i in range(len(v)):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % len(v)]
        s += x0 * y1 - x1 * y0
    return abs(s)


def polygon_area(p: NewtonPolytope) -> float:
    return doubled_area(p) / 2.0


def _edges(vertices: tuple) -> list[Point]:
    n = len(vertices)
    if n == 1:
        return []
    if n == 2:
        (x0, y0), (x1, y1) = vertices
        return [(x1 - x0, y1 - y0), (x0 - x1, y0 - y1)]
    return [(vertices[(i + 1) % n][0] - vertices[i][0],
             vertices[(i + 1) % n][1] - vertices[i][1]) for i in range(n)]


def _half(e: Point) -> int:
    # 0 for directions in [0, pi), 1 for [pi, 2pi); counter-clockwise from +x
    return 0 if (e[1] > 0 or (e[1] == 0 and e[0] > 0)) else 1


def _angle_before(a: Point, b: Point) -> bool:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha < hb
    return a[0] * b[1] - a[1] * b[0] > 0


def minkowski_sum(p: NewtonPolytope, q: NewtonPolytope) -> NewtonPolytope:
    """P + Q by merging the edge sequences sorted by polar angle."""
    if not p.vertices or not q.vertices:
        raise DomainError("minkowski_sum needs nonempty polytopes")
    # both vertex lists start at the lowest-leftmost vertex, so edges begin at angle 0
    ep = sorted(_edges(p.vertices), key=_sort_key)
    eq = sorted(_edges(q.vertices), key=_sort_key)
    start = (p.vertices[0][0] + q.vertices[0][0], p.vertices[0][1] + q.vertices[0][1])
    out = [start]
    i = j = 0
    x, y = start
    while i < len(ep) or j < len(eq):
        if j >= len(eq) or (i < len(ep) and not _angle_before(eq[j], ep[i])):
            dx, dy = ep[i]
            i += 1
        else:
            dx, dy = eq[j]
            j += 1
        x, y = x + dx, y + dy
        out.append((x, y))
    # the walk closes on the start point; hull() drops it and any collinear joints
    return convex_hull(out)


class _AngleKey:
    __slots__ = ("e",)

    def __init__(self, e):
        self.e = e

    def __lt__(self, other):
        return _angle_before(self.e, other.e)


def _sort_key(e: Point):
    return _AngleKey(e)


def mixed_area(p: NewtonPolytope, q: NewtonPolytope) -> int:
    """Mixed volume MV(P, Q) = Area(P + Q) - Area(P) - Area(Q); exact integer."""
    twice = doubled_area(minkowski_sum(p, q)) - doubled_area(p) - doubled_area(q)
    return twice // 2


def root_bound_eta(support1: Iterable[Point], support2: Iterable[Point]) -> int:
    """Bernstein-Kushnirenko bound on isolated common roots in the torus (C*)^2."""
    s1, s2 = list(support1), list(support2)
    if not s1 or not s2:
        raise DomainError("root_bound_eta needs two nonempty supports")
    return max(0, mixed_area(convex_hull(s1), convex_hull(s2)))


def objective_value(eta: int, delta: float) -> float:
    if eta < 0 or not delta > 0:
        raise DomainError("objective needs eta >= 0 and delta > 0")
    return eta + delta
