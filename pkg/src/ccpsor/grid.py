"""Bounded diagonal grid: positions, one-step moves, occupancy and capture.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row, both
0-based. Direction angles are measured counterclockwise from +x with +y as
"north", so ``(0, 1)`` is 90 degrees.

Only the prey and the real predators occupy cells; virtual robots are
hypothetical and never block anything. The border is a hard wall.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence


class GridPos(NamedTuple):
    x: int
    y: int


class StepVector(NamedTuple):
    dx: int
    dy: int


# Listed order matters: it is the tie-break order everywhere.
SN: tuple[StepVector, ...] = (
    StepVector(1, 0),
    StepVector(1, 1),
    StepVector(0, 1),
    StepVector(-1, 1),
    StepVector(-1, 0),
    StepVector(-1, -1),
    StepVector(0, -1),
    StepVector(1, -1),
)
STAY = StepVector(0, 0)
ORTHOGONAL: tuple[StepVector, ...] = (SN[0], SN[2], SN[4], SN[6])

PREY = "prey"


@dataclass
class WorldState:
    """Occupancy of the world.

    ``predators[k]`` is the real robot of subpopulation ``k`` (0-based; the
    subpopulation index doubles as its priority).
    """

    width: int
    height: int
    prey: GridPos
    predators: list[GridPos] = field(default_factory=list)

    def __post_init__(self):
        self.prey = GridPos(*self.prey)
        self.predators = [GridPos(*p) for p in self.predators]

    def in_bounds(self, p) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def occupied(self, mover=None) -> set[GridPos]:
        """Cells blocked for ``mover`` (``PREY``, a predator index, or None)."""
        cells = {p for k, p in enumerate(self.predators) if k != mover}
        if mover != PREY:
            cells.add(self.prey)
        return cells

    def copy(self) -> "WorldState":
        return WorldState(self.width, self.height, self.prey, list(self.predators))

    def validate(self) -> None:
        cells = [self.prey, *self.predators]
        for p in cells:
            if not self.in_bounds(p):
                raise ValueError(f"position {tuple(p)} outside {self.width}x{self.height} world")
        if len(set(cells)) != len(cells):
            raise ValueError("real robots must occupy distinct cells")


def euclidean_distance(a, b) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    # sqrt of an exact integer sum, so every backend rounds identically
    return math.sqrt(dx * dx + dy * dy)


def chebyshev_distance(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def step_is_legal(frm, step, occupied: set, width: int, height: int) -> bool:
    """One-step legality, including the no-corner-cutting rule.

    A diagonal step is refused when either of the two orthogonal cells it
    passes between is occupied.
    """
    dx, dy = step
    if dx == 0 and dy == 0:
        return False
    tx, ty = frm[0] + dx, frm[1] + dy
    if not (0 <= tx < width and 0 <= ty < height):
        return False
    if (tx, ty) in occupied:
        return False
    if dx != 0 and dy != 0:
        if (frm[0] + dx, frm[1]) in occupied or (frm[0], frm[1] + dy) in occupied:
            return False
    return True


def legal_steps(frm, world: WorldState, mover=None) -> list[StepVector]:
    """Legal step vectors from ``frm`` in SN order."""
    occ = world.occupied(mover)
    return [s for s in SN if step_is_legal(frm, s, occ, world.width, world.height)]


def legal_step_targets(frm, world: WorldState, mover=None) -> set[GridPos]:
    return {GridPos(frm[0] + s.dx, frm[1] + s.dy) for s in legal_steps(frm, world, mover)}


def orthogonal_neighbors(p, width: int, height: int) -> list[GridPos]:
    out = []
    for dx, dy in ORTHOGONAL:
        q = GridPos(p[0] + dx, p[1] + dy)
        if 0 <= q.x < width and 0 <= q.y < height:
            out.append(q)
    return out


def is_captured(world: WorldState) -> bool:
    preds = set(world.predators)
    return all(q in preds for q in orthogonal_neighbors(world.prey, world.width, world.height))


def random_world(rng, width: int, height: int, n_predators: int) -> WorldState:
    """Uniform placement of prey and predators on distinct cells (test helper)."""
    cells = rng.choice(width * height, size=n_predators + 1, replace=False)
    pts = [GridPos(int(c % width), int(c // width)) for c in cells]
    return WorldState(width, height, pts[0], pts[1:])


def pairwise_distinct(points: Iterable[Sequence[int]]) -> bool:
    pts = [tuple(p) for p in points]
    return len(set(pts)) == len(pts)
