import math

import numpy as np
import pytest

from ccpsor import ccpso
from ccpsor.ccpso import (
    InvariantLog, PSOParams, Subpopulation, diversity, init_swarm, nbn, nnd, redistribute_virtual,
    reevaluate, step_subpopulation, step_swarm, update_all_virtual, update_real, update_virtual,
    vicinity_radius_for,
)
from ccpsor.fitness import FitnessParams, evaluate_candidate
from ccpsor.grid import SN, random_world
from conftest import make_world

FP = FitnessParams()


def test_vicinity_radius():
    assert vicinity_radius_for(20) == 2
    assert vicinity_radius_for(9) == 1
    assert vicinity_radius_for(10) == 2
    assert vicinity_radius_for(26) == 3
    assert PSOParams().radius == 2
    assert PSOParams(vicinity_radius=4).radius == 4


def test_pso_param_validation():
    with pytest.raises(ValueError):
        PSOParams(n_p=1)
    with pytest.raises(ValueError):
        PSOParams(t_v=1)
    with pytest.raises(ValueError):
        PSOParams(s_g=0)


@pytest.mark.parametrize("v,expected", [
    ((1, 1), (1, 1)), ((0.9, 0.1), (1, 0)), ((0, 0), (0, 0)), ((-3, 0.2), (-1, 0)),
    ((0, -7), (0, -1)), ((2, -2), (1, -1)), ((-0.1, -5), (0, -1)),
])
def test_nnd(v, expected):
    assert nnd(v) == expected


def test_nnd_angle_tie_goes_to_first_listed():
    # 22.5 degrees is equidistant from east and north-east
    v = (math.cos(math.radians(22.5)), math.sin(math.radians(22.5)))
    assert nnd(v) in ((1, 0), (1, 1))


@pytest.mark.parametrize("prop,expected", [
    ((11, 9), (11, 9)), ((15, 10), (12, 10)), ((20, 20), (12, 12)), ((10, 10), (10, 10)),
    ((10, 0), (10, 8)), ((4, 10), (8, 10)),
])
def test_nbn(prop, expected):
    assert nbn(prop, (10, 10), 2) == expected


def test_nbn_clamps_to_world():
    assert nbn((-5, 0), (0, 0), 2, 30, 30) == (0, 0)
    assert nbn((5, 0), (0, 0), 2, 30, 30) == (2, 0)


def _subpop_with(virtual, real=(10, 10), n_p=None):
    n_p = n_p or len(virtual) + 1
    sp = Subpopulation.empty(0, real, n_p)
    sp.positions[1:] = np.array(virtual, dtype=np.int64)
    return sp


def test_diversity_counts():
    assert diversity(_subpop_with([(11, 11)] * 19)) == 1
    cells = [(10 + dx, 10 + dy) for dx in range(-2, 3) for dy in range(-2, 3) if dx or dy][:19]
    assert diversity(_subpop_with(cells)) == 19
    seven = [cells[k % 7] for k in range(19)]
    assert diversity(_subpop_with(seven)) == 7


def test_redistribute_interior_is_distinct():
    w = make_world((20, 20), [(10, 10), (5, 5)])
    sp = Subpopulation.empty(0, w.predators[0], 20)
    redistribute_virtual(sp, w, PSOParams(), FP, np.random.default_rng(1))
    assert diversity(sp) == 19
    assert (np.abs(sp.positions[1:] - sp.positions[0]).max(axis=1) <= 2).all()
    assert not any(tuple(p) == (10, 10) for p in sp.positions[1:])
    assert (sp.velocities[1:] == 0).all()


def test_redistribute_in_corner_uses_clipped_vicinity():
    w = make_world((20, 20), [(0, 0), (5, 5)])
    sp = Subpopulation.empty(0, w.predators[0], 20)
    redistribute_virtual(sp, w, PSOParams(), FP, np.random.default_rng(1))
    v = sp.positions[1:]
    assert ((v >= 0) & (v <= 2)).all()
    assert diversity(sp) == 8  # every in-bounds vicinity cell except the robot's own


def test_redistribute_is_deterministic():
    w = make_world((20, 20), [(10, 10), (5, 5)])
    a = redistribute_virtual(Subpopulation.empty(0, w.predators[0], 20), w, PSOParams(), FP, np.random.default_rng(9))
    b = redistribute_virtual(Subpopulation.empty(0, w.predators[0], 20), w, PSOParams(), FP, np.random.default_rng(9))
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.fitness, b.fitness)


def test_redistribute_scores_and_sets_global_best():
    w = make_world((20, 20), [(10, 10), (5, 5)])
    sp = redistribute_virtual(Subpopulation.empty(0, w.predators[0], 20), w, PSOParams(), FP, np.random.default_rng(2))
    for j in range(1, 20):
        assert sp.fitness[j] == evaluate_candidate(0, tuple(sp.positions[j]), w).total
    assert sp.gbest_fit == sp.fitness.min()


# mirror-symmetric layout about the diagonal through the prey
SYM_WORLD = dict(prey=(10, 10), predators=[(12, 12), (10, 5), (5, 10)])


def _prepared(virtual_pos, velocity):
    w = make_world(**SYM_WORLD)
    sp = _subpop_with([virtual_pos], real=w.predators[0], n_p=2)
    reevaluate(sp, w, FP)
    sp.velocities[1] = velocity
    sp.gbest_pos = sp.positions[1].copy()  # pbest = gbest = p, so only inertia moves it
    return w, sp


def test_update_virtual_zero_update_keeps_position():
    w, sp = _prepared((13, 12), (0, 0))
    before = sp.individual(1)
    after = update_virtual(sp, 1, w, PSOParams(), FP, np.random.default_rng(0))
    assert after.position == before.position
    assert after.fitness == before.fitness


def test_update_virtual_rejects_worse_candidate():
    w, sp = _prepared((13, 12), (1, 1))
    parent = float(sp.fitness[1])
    assert evaluate_candidate(0, (14, 13), w).total > parent
    after = update_virtual(sp, 1, w, PSOParams(), FP, np.random.default_rng(0))
    assert after.position == (13, 12)
    assert after.fitness == parent
    assert after.velocity == (1, 1)


def test_update_virtual_accepts_equal_candidate():
    w, sp = _prepared((13, 12), (-1, 1))
    parent = float(sp.fitness[1])
    assert evaluate_candidate(0, (12, 13), w).total == parent
    after = update_virtual(sp, 1, w, PSOParams(), FP, np.random.default_rng(0))
    assert after.position == (12, 13)


def test_update_virtual_rejects_real_index():
    w, sp = _prepared((13, 12), (0, 0))
    with pytest.raises(IndexError):
        update_virtual(sp, 0, w, PSOParams(), FP, np.random.default_rng(0))


def test_batched_pass_equals_sequential_updates():
    rng = np.random.default_rng(5)
    for _ in range(20):
        w = random_world(rng, 30, 30, 6)
        sp_a = Subpopulation.empty(2, w.predators[2], 20)
        redistribute_virtual(sp_a, w, PSOParams(), FP, np.random.default_rng(1))
        sp_b = Subpopulation(**{k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in sp_a.__dict__.items()})
        seed = int(rng.integers(1 << 30))
        update_all_virtual(sp_a, w, PSOParams(), FP, np.random.default_rng(seed))
        r = np.random.default_rng(seed)
        for j in range(1, 20):
            update_virtual(sp_b, j, w, PSOParams(), FP, r)
        sp_b.refresh_global_best()
        for name in ("positions", "velocities", "pbest_pos", "pbest_fit", "fitness", "gbest_pos"):
            assert np.array_equal(getattr(sp_a, name), getattr(sp_b, name)), name


def _real_subpop(world, gbest):
    sp = Subpopulation.empty(0, world.predators[0], 2)
    sp.gbest_pos = np.array(gbest, dtype=np.int64)
    return sp


def test_update_real_stays_at_global_best():
    w = make_world((5, 5), [(10, 10), (20, 20)])
    sp = _real_subpop(w, (10, 10))
    assert update_real(sp, w, PSOParams(), FP) is False
    assert w.predators[0] == (10, 10)


def test_update_real_moves_toward_best():
    w = make_world((5, 5), [(10, 10), (20, 20)])
    sp = _real_subpop(w, (13, 10))
    assert update_real(sp, w, PSOParams(), FP) is True
    assert w.predators[0] == (11, 10)
    assert tuple(sp.positions[0]) == (11, 10)


def test_update_real_blocked_stays():
    w = make_world((5, 5), [(10, 10), (11, 10)])
    sp = _real_subpop(w, (13, 10))
    assert update_real(sp, w, PSOParams(), FP) is False
    assert w.predators[0] == (10, 10)


def _spy(monkeypatch, name, calls, result=None):
    real = getattr(ccpso, name)

    def wrapper(*a, **k):
        calls.append(name)
        return real(*a, **k) if result is None else result
    monkeypatch.setattr(ccpso, name, wrapper)


def test_low_diversity_redistributes_before_real_move(monkeypatch):
    w = make_world((15, 15), [(5, 5), (25, 25)])
    sp = _subpop_with([(6, 6)] * 19, real=w.predators[0])
    calls = []
    _spy(monkeypatch, "redistribute_virtual", calls)
    _spy(monkeypatch, "update_real", calls)
    # nothing can move: all virtual robots share one cell with zero velocity
    monkeypatch.setattr(ccpso, "update_all_virtual", lambda *a, **k: None)
    step_subpopulation(sp, w, PSOParams(), FP, np.random.default_rng(0))
    assert calls.index("redistribute_virtual") < calls.index("update_real")


def test_real_robot_at_global_best_triggers_redistribution(monkeypatch):
    w = make_world((15, 15), [(14, 14), (16, 16), (14, 16)])
    sp = Subpopulation.empty(0, w.predators[0], 20)
    redistribute_virtual(sp, w, PSOParams(), FP, np.random.default_rng(0))
    calls = []
    monkeypatch.setattr(ccpso, "update_all_virtual", lambda *a, **k: None)
    monkeypatch.setattr(ccpso, "diversity", lambda s: 99)
    _spy(monkeypatch, "redistribute_virtual", calls)
    sp.positions[1:] = (0, 0)  # every virtual robot far worse than the real one
    step_subpopulation(sp, w, PSOParams(), FP, np.random.default_rng(0))
    assert calls == ["redistribute_virtual"]
    assert len({tuple(c) for c in sp.positions[1:]}) == 19


def test_blocked_robot_gets_noise_after_limit(monkeypatch):
    w = make_world((15, 15), [(5, 5), (25, 25)])
    sp = Subpopulation.empty(0, w.predators[0], 20)
    calls = []

    def stuck(subpop, world, pso, fparams, log=None):
        subpop.fitness[0] = 1e9  # never the best
        return False
    monkeypatch.setattr(ccpso, "update_real", stuck)
    monkeypatch.setattr(ccpso, "update_all_virtual", lambda *a, **k: None)
    monkeypatch.setattr(ccpso, "diversity", lambda s: 99)
    monkeypatch.setattr(ccpso, "reevaluate", lambda s, *a, **k: s.fitness.__setitem__(slice(1, None), 0.0))
    _spy(monkeypatch, "random_legal_step", calls)
    pso = PSOParams(s_i=3)
    for k in range(pso.s_i - 1):
        step_subpopulation(sp, w, pso, FP, np.random.default_rng(k))
        assert calls == []
    step_subpopulation(sp, w, pso, FP, np.random.default_rng(7))
    assert calls == ["random_legal_step"]
    assert w.predators[0] != (5, 5)
    assert sp.still_steps == 0


def test_lower_index_moves_are_visible_to_later_subpops(monkeypatch):
    w = make_world((15, 15), [(2, 2), (28, 28)])
    swarm = init_swarm(w, PSOParams(), FP, np.random.default_rng(0))
    seen = []
    real_step = ccpso.step_subpopulation

    def recorder(subpop, world, *a, **k):
        seen.append((subpop.index, list(world.predators)))
        return real_step(subpop, world, *a, **k)
    monkeypatch.setattr(ccpso, "step_subpopulation", recorder)
    before = list(w.predators)
    step_swarm(swarm, w, np.random.default_rng(1))
    assert [i for i, _ in seen] == [0, 1]
    moved_zero = seen[1][1][0]
    assert moved_zero != before[0]  # predator 0 heads for the prey and is seen there


def test_stagnant_swarm_is_perturbed(monkeypatch):
    w = make_world((15, 15), [(2, 2), (28, 28), (2, 28)])
    swarm = init_swarm(w, PSOParams(s_g=4), FP, np.random.default_rng(0))
    monkeypatch.setattr(ccpso, "step_subpopulation", lambda *a, **k: False)
    start = list(w.predators)
    rng = np.random.default_rng(3)
    for _ in range(3):
        step_swarm(swarm, w, rng)
    assert w.predators == start and swarm.swarm_noise_events == 0
    step_swarm(swarm, w, rng)
    assert swarm.swarm_noise_events == 1
    assert all(a != b for a, b in zip(w.predators, start))
    assert swarm.fitness.uniformity_mode == "grid3x3"


def test_captured_world_is_left_alone(cross_world):
    swarm = init_swarm(cross_world, PSOParams(), FP, np.random.default_rng(0))
    before = list(cross_world.predators)
    assert step_swarm(swarm, cross_world, np.random.default_rng(0)) is False
    assert cross_world.predators == before


def test_invariants_hold_over_many_steps():
    rng = np.random.default_rng(4)
    w = random_world(rng, 30, 30, 8)
    log = InvariantLog()
    swarm = init_swarm(w, PSOParams(), FP, rng, log)
    for _ in range(60):
        step_swarm(swarm, w, rng)
    assert log.checks > 0
    assert log.total() == 0, log.as_dict()


def test_swarm_velocities_are_unit_steps():
    rng = np.random.default_rng(8)
    w = random_world(rng, 30, 30, 5)
    swarm = init_swarm(w, PSOParams(), FP, rng)
    allowed = set(SN) | {(0, 0)}
    for _ in range(20):
        step_swarm(swarm, w, rng)
        for sp in swarm.subpops:
            assert {tuple(map(int, v)) for v in sp.velocities} <= allowed
