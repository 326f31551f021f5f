"""Prey behaviours: still, random, linear and linear_smart.

The prey acts first in every world step. Each turn consumes exactly one
uniform draw for the move/stay decision, whatever the kind, so changing the
prey kind never shifts the predators' random stream by a variable amount
before that draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .grid import PREY, SN, GridPos, StepVector, WorldState, legal_steps, step_is_legal

KINDS = ("still", "random", "linear", "linear_smart")
_SN_ANGLE = [math.atan2(s.dy, s.dx) for s in SN]


@dataclass(frozen=True)
class PreyState:
    kind: str = "still"
    heading: Optional[StepVector] = None
    move_probability: float = 0.9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown prey kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.move_probability <= 1.0:
            raise ValueError("move_probability must lie in [0, 1]")
        if self.heading is not None and tuple(self.heading) not in SN:
            raise ValueError(f"heading {self.heading} is not a unit grid direction")


def angle_distance(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def octant_of(offset) -> int:
    """Index into SN of the 45-degree sector holding ``offset`` (sectors are [c-22.5, c+22.5))."""
    deg = math.degrees(math.atan2(offset[1], offset[0])) % 360.0
    return int((deg + 22.5) // 45.0) % 8


def octant_counts(world: WorldState) -> list[int]:
    counts = [0] * 8
    for p in world.predators:
        counts[octant_of((p.x - world.prey.x, p.y - world.prey.y))] += 1
    return counts


def _step_in_bounds(p, s, world: WorldState) -> bool:
    return world.in_bounds((p[0] + s[0], p[1] + s[1]))


def select_heading(world: WorldState) -> StepVector:
    """Direction of the least crowded octant among those that do not face a wall."""
    counts = octant_counts(world)
    options = [k for k, s in enumerate(SN) if _step_in_bounds(world.prey, s, world)]
    best = min(options, key=lambda k: (counts[k], k))
    return SN[best]


def random_rule(world: WorldState, rng) -> GridPos:
    steps = legal_steps(world.prey, world, PREY)
    if not steps:
        return world.prey
    s = steps[int(rng.integers(len(steps)))]
    return GridPos(world.prey.x + s.dx, world.prey.y + s.dy)


def linear_rule(state: PreyState, world: WorldState, rng=None) -> tuple[GridPos, StepVector]:
    """Run straight along the heading; wait while the way is blocked (walls included)."""
    h = state.heading if state.heading is not None else select_heading(world)
    occ = world.occupied(PREY)
    if step_is_legal(world.prey, h, occ, world.width, world.height):
        return GridPos(world.prey.x + h.dx, world.prey.y + h.dy), h
    return world.prey, h


def linear_smart_rule(state: PreyState, world: WorldState, rng=None) -> tuple[GridPos, StepVector]:
    """Like :func:`linear_rule`, but sidestep a blocker toward the closest free direction.

    The heading survives the detour, so the prey resumes its line as soon as
    the way is clear.
    """
    h = state.heading
    if h is None or not _step_in_bounds(world.prey, h, world):
        # fresh escape direction when first moving or when running into a wall
        h = select_heading(world)
    steps = legal_steps(world.prey, world, PREY)
    if not steps:
        return world.prey, h
    if h in steps:
        s = h
    else:
        target = math.atan2(h.dy, h.dx)
        # ties fall to SN order because legal_steps is SN-ordered and min is stable
        s = min(steps, key=lambda t: angle_distance(_SN_ANGLE[SN.index(t)], target))
    return GridPos(world.prey.x + s.dx, world.prey.y + s.dy), h


def step_prey(state: PreyState, world: WorldState, rng) -> tuple[GridPos, PreyState]:
    """New prey position (always legal or unchanged) and updated state."""
    if rng.random() >= state.move_probability or state.kind == "still":
        return world.prey, state
    if state.kind == "random":
        return random_rule(world, rng), state
    rule = linear_rule if state.kind == "linear" else linear_smart_rule
    pos, heading = rule(state, world, rng)
    return pos, replace(state, heading=heading)
