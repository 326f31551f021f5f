"""Cooperative coevolutionary PSO pursuit of a prey on a grid by a swarm of predators."""
from .ccpso import PSOParams, Swarm, init_swarm, nbn, nnd, step_swarm, vicinity_radius_for
from .fitness import FitnessBreakdown, FitnessParams, evaluate_batch, evaluate_candidate, repel_factor
from .geometry import convex_hull, inconv
from .grid import SN, GridPos, StepVector, WorldState, is_captured
from .harness import AggregateStats, ConfigError, RunRecord, SimConfig, run_batch, run_episode
from .prey import KINDS as PREY_KINDS
from .prey import PreyState, step_prey

__all__ = [
    "AggregateStats", "ConfigError", "FitnessBreakdown", "FitnessParams", "GridPos", "PREY_KINDS",
    "PSOParams", "PreyState", "RunRecord", "SN", "SimConfig", "StepVector", "Swarm", "WorldState",
    "convex_hull", "evaluate_batch", "evaluate_candidate", "inconv", "init_swarm", "is_captured",
    "nbn", "nnd", "repel_factor", "run_batch", "run_episode", "step_prey", "step_swarm",
    "vicinity_radius_for",
]
