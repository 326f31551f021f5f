"""Episodes, seeded batches, statistics and trace/CSV files."""
from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .ccpso import InvariantLog, PSOParams, init_swarm, step_swarm
from .fitness import FitnessParams
from .grid import GridPos, WorldState, is_captured
from .prey import KINDS, PreyState, step_prey

CSV_COLUMNS = ("predators", "prey", "captures", "avg_moves", "std_moves")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    width: int = 30
    height: int = 30
    n_predators: int = 4
    prey_kind: str = "still"
    max_steps: int = 1000
    seed: int = 1
    prey_move_probability: float = 0.9
    pso: PSOParams = field(default_factory=PSOParams)
    fitness: FitnessParams = field(default_factory=FitnessParams)

    def __post_init__(self):
        if self.n_predators < 2:
            raise ConfigError("need at least 2 predators")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.width < 1 or self.height < 1:
            raise ConfigError("world dimensions must be positive")
        if self.width * self.height < self.n_predators + 1:
            raise ConfigError(
                f"a {self.width}x{self.height} world cannot hold {self.n_predators} predators and the prey"
            )
        if self.prey_kind not in KINDS:
            raise ConfigError(f"unknown prey kind {self.prey_kind!r}")


@dataclass
class RunRecord:
    seed: int
    captured: bool
    moves: int
    trace: Optional[list] = None
    invariants: Optional[dict] = None
    swarm_noise_events: int = 0


@dataclass(frozen=True)
class AggregateStats:
    runs: int
    captures: int
    avg_moves: float
    std_moves: float


def place_robots(config: SimConfig, rng: np.random.Generator) -> WorldState:
    """Prey at the centre, predators on distinct uniform cells (rejection sampling)."""
    prey = GridPos(config.width // 2, config.height // 2)
    taken = {prey}
    preds = []
    while len(preds) < config.n_predators:
        c = GridPos(int(rng.integers(config.width)), int(rng.integers(config.height)))
        if c not in taken:
            taken.add(c)
            preds.append(c)
    return WorldState(config.width, config.height, prey, preds)


def _snapshot(step: int, world: WorldState, best) -> dict:
    return {
        "step": step,
        "prey": [world.prey.x, world.prey.y],
        "predators": [[p.x, p.y] for p in world.predators],
        "best_fitness": [float(b) for b in best],
    }


def run_episode(config: SimConfig, trace: bool = False, check_invariants: bool = False,
                world: Optional[WorldState] = None) -> RunRecord:
    """Play one pursuit episode.

    Capture is tested at the top of every world step, so a capture already
    present at placement costs 0 moves. ``world`` overrides the random
    placement (the generator is still seeded from ``config.seed``).
    """
    rng = np.random.default_rng(config.seed)
    if world is None:
        world = place_robots(config, rng)
    else:
        world = world.copy()
        world.validate()
    log = InvariantLog() if check_invariants else None
    swarm = init_swarm(world, config.pso, config.fitness, rng, log)
    prey = PreyState(config.prey_kind, move_probability=config.prey_move_probability)

    frames = [_snapshot(0, world, swarm.best_fitness())] if trace else None
    moves = 0
    captured = is_captured(world)
    while not captured and moves < config.max_steps:
        world.prey, prey = step_prey(prey, world, rng)
        step_swarm(swarm, world, rng)
        moves += 1
        if frames is not None:
            frames.append(_snapshot(moves, world, swarm.best_fitness()))
        captured = is_captured(world)
    return RunRecord(
        seed=config.seed,
        captured=captured,
        moves=moves,
        trace=frames,
        invariants=log.as_dict() if log is not None else None,
        swarm_noise_events=swarm.swarm_noise_events,
    )


def aggregate(records: Iterable[RunRecord]) -> AggregateStats:
    """Captures, mean moves, and sample std of moves (0 for a single run)."""
    recs = sorted(records, key=lambda r: r.seed)
    if not recs:
        raise ValueError("no runs to aggregate")
    moves = [r.moves for r in recs]
    std = statistics.stdev(moves) if len(moves) > 1 else 0.0
    return AggregateStats(len(recs), sum(r.captured for r in recs), statistics.fmean(moves), std)


def _run_one(args):
    config, trace, check = args
    return run_episode(config, trace=trace, check_invariants=check)


def run_batch(config: SimConfig, seeds: Sequence[int], workers: int = 1, trace: bool = False,
              check_invariants: bool = False) -> tuple[AggregateStats, list[RunRecord]]:
    """One episode per seed. Records come back sorted by seed."""
    if not seeds:
        raise ValueError("seed list is empty")
    jobs = [(replace(config, seed=int(s)), trace, check_invariants) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_one, jobs, chunksize=4))
    else:
        records = [_run_one(j) for j in jobs]
    records.sort(key=lambda r: r.seed)
    return aggregate(records), records


# ---------------------------------------------------------------- file output


def _fmt(x: float) -> str:
    return repr(float(x))


def write_stats_csv(rows: Iterable[tuple[int, str, AggregateStats]], path) -> Path:
    """One row per (predators, prey) cell with columns ``CSV_COLUMNS``."""
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for n, prey, st in rows:
                w.writerow([n, prey, st.captures, _fmt(st.avg_moves), _fmt(st.std_moves)])
    except OSError as e:
        raise OSError(f"cannot write stats CSV {path}: {e}") from e
    return path


def read_stats_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_runs_csv(records: Iterable[RunRecord], path, predators: int, prey: str) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("predators", "prey", "seed", "captured", "moves"))
            for r in records:
                w.writerow([predators, prey, r.seed, int(r.captured), r.moves])
    except OSError as e:
        raise OSError(f"cannot write run CSV {path}: {e}") from e
    return path


def write_trace_jsonl(record: RunRecord, path) -> Path:
    if record.trace is None:
        raise ValueError("record has no trace; run the episode with trace=True")
    path = Path(path)
    try:
        with path.open("w") as fh:
            for snap in record.trace:
                fh.write(json.dumps(snap, separators=(",", ":")) + "\n")
    except OSError as e:
        raise OSError(f"cannot write trace {path}: {e}") from e
    return path


def read_trace_jsonl(path) -> list[dict]:
    path = Path(path)
    try:
        with path.open() as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except OSError as e:
        raise OSError(f"cannot read trace {path}: {e}") from e


def parse_seeds(text: str) -> list[int]:
    """``"1..100"``, ``"1,5,9"`` or a mix such as ``"1..3,10"``."""
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ConfigError(f"empty seed range {part!r}")
            seeds.extend(range(lo_i, hi_i + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError("no seeds given")
    return seeds


def moments_from_rows(moves: Sequence[float]) -> tuple[float, float]:
    mean = math.fsum(moves) / len(moves)
    std = statistics.stdev(moves) if len(moves) > 1 else 0.0
    return mean, std
