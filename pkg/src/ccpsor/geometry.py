"""Planar convex hull and the ternary hull-containment score.

All inputs are integer grid points, so every orientation test is exact.
"""
from __future__ import annotations

from dataclasses import dataclass

INSIDE = 0.0
ON_EDGE = 0.5
OUTSIDE = 1.0


@dataclass(frozen=True)
class ConvexHull:
    """Extreme points in counterclockwise order.

    One vertex means every input point coincided; two vertices mean the
    input was collinear and the hull is the segment between them.
    """

    vertices: tuple[tuple[int, int], ...]

    @property
    def kind(self) -> str:
        return {1: "point", 2: "segment"}.get(len(self.vertices), "polygon")

    def __len__(self):
        return len(self.vertices)


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ConvexHull:
    """Andrew's monotone chain; collinear boundary points are dropped."""
    pts = sorted({(int(p[0]), int(p[1])) for p in points})
    if not pts:
        raise ValueError("convex hull of an empty point set")
    if len(pts) <= 2:
        return ConvexHull(tuple(pts))

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return ConvexHull(tuple(lower[:-1] + upper[:-1]))


def inconv(p, hull: ConvexHull) -> float:
    """0 strictly inside, 0.5 on the boundary, 1 strictly outside."""
    v = hull.vertices
    px, py = int(p[0]), int(p[1])
    if len(v) == 1:
        return ON_EDGE if (px, py) == v[0] else OUTSIDE
    if len(v) == 2:
        a, b = v
        if cross(a, b, (px, py)) != 0:
            return OUTSIDE
        if min(a[0], b[0]) <= px <= max(a[0], b[0]) and min(a[1], b[1]) <= py <= max(a[1], b[1]):
            return ON_EDGE
        return OUTSIDE

    on_line = False
    n = len(v)
    for k in range(n):
        c = cross(v[k], v[(k + 1) % n], (px, py))
        if c < 0:
            return OUTSIDE
        if c == 0:
            on_line = True
    return ON_EDGE if on_line else INSIDE
