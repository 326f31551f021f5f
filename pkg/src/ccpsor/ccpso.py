"""Cooperative coevolution of real and virtual predator robots.

Every predator owns a subpopulation. Row 0 of a subpopulation is the real
robot, the only one present in the world; rows 1.. are virtual robots that
sample its vicinity and pull it, one grid step per world step, toward the
best position found so far. Subpopulations act one at a time in index order
and each sees the moves already made by lower indices in the same step.

Indices are 0-based throughout: subpopulation ``i`` drives
``world.predators[i]``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .fitness import FitnessParams, others_array
from .grid import STAY, GridPos, StepVector, WorldState, is_captured, legal_steps, step_is_legal


def vicinity_radius_for(n_p: int) -> int:
    """Smallest Chebyshev radius whose ring of cells can hold every virtual robot."""
    r = 1
    while (2 * r + 1) ** 2 - 1 < n_p - 1:
        r += 1
    return r


@dataclass(frozen=True)
class PSOParams:
    w: float = 1.0
    c1: float = 2.0
    c2: float = 2.0
    n_p: int = 20
    # diversity threshold and individual stall limit, tuned on held-out seeds
    t_v: int = 3
    s_i: int = 2
    s_g: int = 10
    vicinity_radius: Optional[int] = None

    def __post_init__(self):
        if self.n_p < 2:
            raise ValueError("a subpopulation needs at least one virtual robot (n_p >= 2)")
        if self.t_v < 2:
            raise ValueError("t_v must be >= 2")
        if self.s_i < 1 or self.s_g < 1:
            raise ValueError("stagnation limits must be >= 1")
        if self.vicinity_radius is not None and self.vicinity_radius < 1:
            raise ValueError("vicinity radius must be >= 1")

    @property
    def radius(self) -> int:
        return self.vicinity_radius if self.vicinity_radius is not None else vicinity_radius_for(self.n_p)


class Individual(NamedTuple):
    position: GridPos
    velocity: StepVector
    personal_best_pos: GridPos
    personal_best_fit: float
    fitness: float


@dataclass
class InvariantLog:
    """Violation counters filled in while stepping (all should stay zero)."""

    checks: int = 0
    distinct_positions: int = 0
    vicinity: int = 0
    nnd_output: int = 0
    negative_fitness: int = 0
    greedy_worsening: int = 0
    global_best: int = 0

    def total(self) -> int:
        return (self.distinct_positions + self.vicinity + self.nnd_output + self.negative_fitness
                + self.greedy_worsening + self.global_best)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


_SN_SET = {(int(a), int(b)) for a, b in kernels.SN_ARRAY} | {(0, 0)}


@dataclass
class Subpopulation:
    index: int
    positions: np.ndarray        # (n_p, 2) int64
    velocities: np.ndarray       # (n_p, 2) int64, always in SN or zero
    pbest_pos: np.ndarray
    pbest_fit: np.ndarray
    fitness: np.ndarray
    gbest_pos: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))
    gbest_fit: float = math.inf
    still_steps: int = 0

    @classmethod
    def empty(cls, index: int, real: GridPos, n_p: int) -> "Subpopulation":
        pos = np.tile(np.array(real, dtype=np.int64), (n_p, 1))
        return cls(
            index=index,
            positions=pos,
            velocities=np.zeros((n_p, 2), dtype=np.int64),
            pbest_pos=pos.copy(),
            pbest_fit=np.full(n_p, math.inf),
            fitness=np.full(n_p, math.inf),
            gbest_pos=pos[0].copy(),
        )

    @property
    def n_p(self) -> int:
        return self.positions.shape[0]

    @property
    def real(self) -> GridPos:
        return GridPos(int(self.positions[0, 0]), int(self.positions[0, 1]))

    def individual(self, j: int) -> Individual:
        return Individual(
            GridPos(*map(int, self.positions[j])),
            StepVector(*map(int, self.velocities[j])),
            GridPos(*map(int, self.pbest_pos[j])),
            float(self.pbest_fit[j]),
            float(self.fitness[j]),
        )

    def refresh_global_best(self) -> None:
        j = int(np.argmin(self.fitness))
        self.gbest_fit = float(self.fitness[j])
        self.gbest_pos = self.positions[j].copy()


@dataclass
class Swarm:
    subpops: list[Subpopulation]
    pso: PSOParams
    fitness: FitnessParams
    still_steps: int = 0
    swarm_noise_events: int = 0
    log: Optional[InvariantLog] = None
    recent: deque = field(default_factory=deque)

    def best_fitness(self) -> list[float]:
        return [sp.gbest_fit for sp in self.subpops]


# ------------------------------------------------------------------ operators


def nnd(v) -> StepVector:
    """Unit step in SN with the smallest angle to ``v``; the zero vector maps to stay."""
    out = kernels.nnd_batch(np.asarray(v, dtype=np.float64).reshape(1, 2))
    return StepVector(int(out[0, 0]), int(out[0, 1]))


def nbn(proposal, real_pos, r: int, width: int = 1 << 30, height: int = 1 << 30) -> GridPos:
    """Keep ``proposal`` if inside the real robot's vicinity, else the nearest-angle ring cell.

    The result is clamped into ``width x height``.
    """
    out = kernels.nbn_batch(np.asarray(proposal).reshape(1, 2), real_pos, r, width, height)
    return GridPos(int(out[0, 0]), int(out[0, 1]))


def diversity(subpop: Subpopulation) -> int:
    """Number of distinct cells held by the virtual robots."""
    v = subpop.positions[1:]
    if v.shape[0] == 0:
        return 0
    return int(np.unique(v[:, 0] * 1_000_003 + v[:, 1]).shape[0])


def _evaluate(subpop: Subpopulation, rows, world: WorldState, fparams: FitnessParams) -> np.ndarray:
    return kernels.fitness_batch(
        subpop.positions[rows], others_array(world, subpop.index), world.prey, fparams.d_min, fparams.mode_code
    )[:, 4]


def reevaluate(subpop: Subpopulation, world: WorldState, fparams: FitnessParams, log=None) -> None:
    """Score every individual against the current world; memories are not inherited."""
    subpop.fitness = _evaluate(subpop, slice(None), world, fparams)
    subpop.pbest_pos = subpop.positions.copy()
    subpop.pbest_fit = subpop.fitness.copy()
    subpop.refresh_global_best()
    if log is not None and subpop.fitness.min() < 0:
        log.negative_fitness += 1


def _vicinity_cells(real: GridPos, r: int, width: int, height: int) -> list[tuple[int, int]]:
    return [
        (real.x + dx, real.y + dy)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if (dx or dy) and 0 <= real.x + dx < width and 0 <= real.y + dy < height
    ]


def redistribute_virtual(subpop: Subpopulation, world: WorldState, pso: PSOParams, fparams: FitnessParams,
                         rng: np.random.Generator, log=None) -> Subpopulation:
    """Scatter the virtual robots over distinct in-bounds vicinity cells and re-score them.

    When the clipped vicinity has fewer cells than virtual robots, every cell
    is used once and the rest are drawn with replacement.
    """
    n_v = subpop.n_p - 1
    cells = np.array(_vicinity_cells(subpop.real, pso.radius, world.width, world.height), dtype=np.int64)
    if cells.shape[0] >= n_v:
        pick = rng.choice(cells.shape[0], size=n_v, replace=False)
    elif cells.shape[0] > 0:
        pick = np.concatenate([rng.permutation(cells.shape[0]), rng.integers(0, cells.shape[0], n_v - cells.shape[0])])
    else:
        cells = np.array([subpop.real], dtype=np.int64)
        pick = np.zeros(n_v, dtype=np.int64)
    subpop.positions[1:] = cells[pick]
    subpop.velocities[1:] = 0
    subpop.fitness[1:] = _evaluate(subpop, slice(1, None), world, fparams)
    subpop.pbest_pos[1:] = subpop.positions[1:]
    subpop.pbest_fit[1:] = subpop.fitness[1:]
    subpop.refresh_global_best()
    return subpop


def _update_virtual_rows(subpop: Subpopulation, rows: np.ndarray, r12: np.ndarray, world: WorldState,
                         pso: PSOParams, fparams: FitnessParams, log=None) -> None:
    pos = subpop.positions[rows]
    raw = (pso.w * subpop.velocities[rows]
           + pso.c1 * r12[:, :1] * (subpop.pbest_pos[rows] - pos)
           + pso.c2 * r12[:, 1:] * (subpop.gbest_pos - pos))
    vel = kernels.nnd_batch(raw)
    real = subpop.positions[0]
    r = pso.radius
    cand = kernels.nbn_batch(pos + vel, real, r, world.width, world.height)
    f = kernels.fitness_batch(cand, others_array(world, subpop.index), world.prey, fparams.d_min, fparams.mode_code)[:, 4]

    parent_fit = subpop.fitness[rows]
    # a parent left behind by its real robot's move has no valid place to revert to
    stranded = np.abs(pos - real).max(axis=1) > r
    accept = (f <= parent_fit) | stranded

    subpop.velocities[rows] = vel
    subpop.positions[rows[accept]] = cand[accept]
    subpop.fitness[rows[accept]] = f[accept]
    better = f < subpop.pbest_fit[rows]
    subpop.pbest_pos[rows[better]] = cand[better]
    subpop.pbest_fit[rows[better]] = f[better]

    if log is not None:
        log.checks += 1
        if any((int(a), int(b)) not in _SN_SET for a, b in vel):
            log.nnd_output += 1
        if (np.abs(cand - real).max(axis=1) > r).any() or (cand < 0).any() \
                or (cand[:, 0] >= world.width).any() or (cand[:, 1] >= world.height).any():
            log.vicinity += 1
        if (subpop.fitness[rows][~stranded] > parent_fit[~stranded]).any():
            log.greedy_worsening += 1
        if (f < 0).any():
            log.negative_fitness += 1


def update_virtual(subpop: Subpopulation, j: int, world: WorldState, pso: PSOParams, fparams: FitnessParams,
                   rng: np.random.Generator, log=None) -> Individual:
    """One PSO generation for virtual robot ``j`` with greedy (not-worse) acceptance."""
    if not 1 <= j < subpop.n_p:
        raise IndexError(f"virtual robot index must be in 1..{subpop.n_p - 1}, got {j}")
    r12 = rng.random((1, 2))
    _update_virtual_rows(subpop, np.array([j]), r12, world, pso, fparams, log)
    return subpop.individual(j)


def update_all_virtual(subpop: Subpopulation, world: WorldState, pso: PSOParams, fparams: FitnessParams,
                       rng: np.random.Generator, log=None) -> None:
    """Same as calling :func:`update_virtual` for j = 1.. in order, in one batch.

    The global best is held fixed for the whole pass and refreshed afterwards.
    """
    rows = np.arange(1, subpop.n_p)
    r12 = rng.random((rows.shape[0], 2))
    _update_virtual_rows(subpop, rows, r12, world, pso, fparams, log)
    subpop.refresh_global_best()


def _move_real(subpop: Subpopulation, world: WorldState, step) -> bool:
    i = subpop.index
    here = world.predators[i]
    if not step_is_legal(here, step, world.occupied(i), world.width, world.height):
        return False
    new = GridPos(here.x + step[0], here.y + step[1])
    world.predators[i] = new
    subpop.positions[0] = new
    return True


def update_real(subpop: Subpopulation, world: WorldState, pso: PSOParams, fparams: FitnessParams,
                log=None) -> bool:
    """Step the real robot once toward the global best; stays put if that step is illegal.

    Returns whether it moved. The world is updated in place immediately.
    """
    step = nnd(subpop.gbest_pos - subpop.positions[0])
    subpop.velocities[0] = step
    moved = step != STAY and _move_real(subpop, world, step)
    f = _evaluate(subpop, slice(0, 1), world, fparams)[0]
    subpop.fitness[0] = f
    if f < subpop.pbest_fit[0] or moved:
        subpop.pbest_pos[0] = subpop.positions[0]
        subpop.pbest_fit[0] = f
    if log is not None and (int(step[0]), int(step[1])) not in _SN_SET:
        log.nnd_output += 1
    return moved


def random_legal_step(subpop: Subpopulation, world: WorldState, rng: np.random.Generator) -> bool:
    """Noise: one uniformly random legal step (stays only when boxed in)."""
    options = legal_steps(world.predators[subpop.index], world, subpop.index)
    if not options:
        return False
    return _move_real(subpop, world, options[int(rng.integers(len(options)))])


def step_subpopulation(subpop: Subpopulation, world: WorldState, pso: PSOParams, fparams: FitnessParams,
                       rng: np.random.Generator, log=None) -> bool:
    """One activation of subpopulation ``subpop.index``. Returns whether its real robot moved."""
    reevaluate(subpop, world, fparams, log)
    update_all_virtual(subpop, world, pso, fparams, rng, log)
    if diversity(subpop) < pso.t_v:
        redistribute_virtual(subpop, world, pso, fparams, rng, log)

    moved = update_real(subpop, world, pso, fparams, log)
    subpop.still_steps = 0 if moved else subpop.still_steps + 1

    if subpop.fitness[0] <= subpop.gbest_fit:
        subpop.gbest_fit = float(subpop.fitness[0])
        subpop.gbest_pos = subpop.positions[0].copy()
        redistribute_virtual(subpop, world, pso, fparams, rng, log)
    elif subpop.still_steps >= pso.s_i:
        if random_legal_step(subpop, world, rng):
            moved = True
            subpop.still_steps = 0
        reevaluate(subpop, world, fparams, log)

    if log is not None and subpop.gbest_fit != subpop.fitness.min():
        log.global_best += 1
    return moved


def step_swarm(swarm: Swarm, world: WorldState, rng: np.random.Generator) -> bool:
    """All subpopulations in priority order, then the swarm-level deadlock breaker.

    A world step counts as stagnant when the resulting configuration (prey
    and every real predator) repeats one from the last ``s_g`` steps; this
    covers a frozen swarm as well as robots shuttling back and forth under
    individual noise. After ``s_g`` consecutive stagnant steps with the prey
    still free, every real robot takes a random legal step.

    Stops early once the prey is encircled. Returns whether any real robot moved.
    """
    any_moved = False
    for sp in swarm.subpops:
        if is_captured(world):
            break
        if step_subpopulation(sp, world, swarm.pso, swarm.fitness, rng, swarm.log):
            any_moved = True
        if swarm.log is not None:
            swarm.log.checks += 1
            cells = [world.prey, *world.predators]
            if len(set(cells)) != len(cells):
                swarm.log.distinct_positions += 1

    config = (world.prey, *world.predators)
    stagnant = not any_moved or config in swarm.recent
    swarm.recent.append(config)
    if len(swarm.recent) > swarm.pso.s_g:
        swarm.recent.popleft()
    swarm.still_steps = swarm.still_steps + 1 if stagnant else 0

    if swarm.still_steps >= swarm.pso.s_g and not is_captured(world):
        for sp in swarm.subpops:
            if random_legal_step(sp, world, rng):
                any_moved = True
        # the alternative (axial + diagonal) uniformity takes over for the rest of the episode
        if swarm.fitness.uniformity_mode != "grid3x3":
            swarm.fitness = FitnessParams(swarm.fitness.d_min, "grid3x3")
        for sp in swarm.subpops:
            reevaluate(sp, world, swarm.fitness, swarm.log)
        swarm.still_steps = 0
        swarm.recent.clear()
        swarm.swarm_noise_events += 1
    return any_moved


def init_swarm(world: WorldState, pso: PSOParams, fparams: FitnessParams, rng: np.random.Generator,
               log=None) -> Swarm:
    subpops = []
    for i, real in enumerate(world.predators):
        sp = Subpopulation.empty(i, real, pso.n_p)
        sp.fitness[0] = _evaluate(sp, slice(0, 1), world, fparams)[0]
        redistribute_virtual(sp, world, pso, fparams, rng, log)
        subpops.append(sp)
    return Swarm(subpops, pso, fparams, log=log)
