"""Modular encirclement fitness (lower is better).

``total = repel * (closure + expanse + uniformity)``

The scalar functions here are the readable reference. The simulator itself
goes through :func:`ccpsor.kernels.fitness_batch`, and the tests check the
two against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import ConvexHull, convex_hull, inconv  # noqa: F401  (re-exported)
from .grid import WorldState, euclidean_distance

UNIFORMITY_MODES = {"quad": kernels.QUAD, "grid3x3": kernels.GRID3X3}


@dataclass(frozen=True)
class FitnessParams:
    d_min: float = 1.0
    uniformity_mode: str = "quad"

    def __post_init__(self):
        if not self.d_min > 0:
            raise ValueError("d_min must be positive")
        if self.uniformity_mode not in UNIFORMITY_MODES:
            raise ValueError(f"uniformity_mode must be one of {sorted(UNIFORMITY_MODES)}")

    @property
    def mode_code(self) -> int:
        return UNIFORMITY_MODES[self.uniformity_mode]


@dataclass(frozen=True)
class FitnessBreakdown:
    repel: float
    closure: float
    expanse: float
    uniformity: float
    total: float

    @classmethod
    def from_row(cls, row) -> "FitnessBreakdown":
        return cls(*(float(v) for v in row))


def repel_factor(nnd: float, params: FitnessParams = FitnessParams()) -> float:
    if nnd < params.d_min:
        return math.exp(-2.0 * (nnd - params.d_min))
    return 1.0


def expanse(candidate, other_real, prey) -> float:
    """Mean Euclidean distance to the prey of the composed predator set."""
    s = 0.0
    for p in other_real:
        s += euclidean_distance(p, prey)
    return (s + euclidean_distance(candidate, prey)) / (len(other_real) + 1)


def _pop_std(values) -> float:
    a, b, c, d = values
    m = (a + b + c + d) / 4.0
    return math.sqrt(((a - m) ** 2 + (b - m) ** 2 + (c - m) ** 2 + (d - m) ** 2) / 4.0)


def quad_bins(positions, prey) -> list[float]:
    """``[N11, N12, N21, N22]`` = NW, NE, SW, SE counts around the prey.

    A robot on a split line is shared half-and-half between the two bins it
    borders; a robot on the prey cell itself is shared four ways.
    """
    bins = [0.0, 0.0, 0.0, 0.0]
    for p in positions:
        dx, dy = p[0] - prey[0], p[1] - prey[1]
        if dx == 0 and dy == 0:
            bins = [b + 0.25 for b in bins]
        elif dx == 0:
            for k in ((0, 1) if dy > 0 else (2, 3)):
                bins[k] += 0.5
        elif dy == 0:
            for k in ((1, 3) if dx > 0 else (0, 2)):
                bins[k] += 0.5
        else:
            bins[(0 if dy > 0 else 2) + (0 if dx < 0 else 1)] += 1.0
    return bins


def grid_bins(positions, prey) -> list[list[float]]:
    """3x3 counts, rows north to south and columns west to east.

    The middle row/column is exactly the prey's row/column; ``[1][1]`` holds
    anything sitting on the prey cell.
    """
    g = [[0.0] * 3 for _ in range(3)]
    for p in positions:
        dx, dy = p[0] - prey[0], p[1] - prey[1]
        r = 0 if dy > 0 else (1 if dy == 0 else 2)
        c = 0 if dx < 0 else (1 if dx == 0 else 2)
        g[r][c] += 1.0
    return g


def uniformity_quad(real_positions, prey) -> float:
    return _pop_std(quad_bins(real_positions, prey))


def uniformity_3x3(real_positions, prey) -> float:
    g = grid_bins(real_positions, prey)
    axial = (g[0][1], g[1][0], g[1][2], g[2][1])
    diagonal = (g[0][0], g[0][2], g[2][0], g[2][2])
    return _pop_std(axial) + _pop_std(diagonal)


def evaluate_candidate(i: int, candidate, world: WorldState, params: FitnessParams = FitnessParams()) -> FitnessBreakdown:
    """Score ``candidate`` standing in for real predator ``i`` (0-based)."""
    if not 0 <= i < len(world.predators):
        raise IndexError(f"subpopulation index {i} out of range for {len(world.predators)} predators")
    others = [p for k, p in enumerate(world.predators) if k != i]
    composed = world.predators[:i] + [tuple(candidate)] + world.predators[i + 1:]

    nnd = min((euclidean_distance(candidate, p) for p in others), default=math.inf)
    repel = repel_factor(nnd, params)
    closure = inconv(world.prey, convex_hull(composed))
    exp_ = expanse(candidate, others, world.prey)
    if params.uniformity_mode == "quad":
        unif = uniformity_quad(composed, world.prey)
    else:
        unif = uniformity_3x3(composed, world.prey)
    return FitnessBreakdown(repel, closure, exp_, unif, repel * (closure + exp_ + unif))


def others_array(world: WorldState, i: int) -> np.ndarray:
    preds = world.predators
    return np.array([preds[k] for k in range(len(preds)) if k != i], dtype=np.int64).reshape(-1, 2)


def evaluate_batch(i: int, candidates, world: WorldState, params: FitnessParams = FitnessParams()) -> np.ndarray:
    """``(M, 5)`` breakdown rows for many candidates of subpopulation ``i``."""
    return kernels.fitness_batch(candidates, others_array(world, i), world.prey, params.d_min, params.mode_code)
