"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

The experiment grid (5 swarm sizes x 4 prey kinds x seeds 1..100 on a 30x30
world, 1000-step cap) is run once per session and shared by criteria 1-4 and
the batch half of criterion 6. It takes a couple of minutes with numba.
"""
import math

import numpy as np
import pytest

from ccpsor.fitness import FitnessParams, evaluate_candidate, repel_factor, uniformity_quad
from ccpsor.geometry import convex_hull, inconv
from ccpsor.grid import WorldState, is_captured, random_world
from ccpsor.harness import SimConfig, run_batch, run_episode, write_trace_jsonl
from ccpsor.prey import KINDS
from conftest import ACCEPTANCE_LINES
from oracles import enumerate_capture, halfplane_inconv, shapely_inconv

SWARM_SIZES = (4, 8, 12, 16, 24)
SEEDS = range(1, 101)


def report(criterion: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def grid():
    out = {}
    for n in SWARM_SIZES:
        for kind in KINDS:
            stats, records = run_batch(SimConfig(n_predators=n, prey_kind=kind), SEEDS,
                                       trace=True, check_invariants=True)
            out[n, kind] = (stats, records)
    return out


def test_c1_reliability(grid):
    worst = min(grid.items(), key=lambda kv: kv[1][0].captures)
    cells = " ".join(f"{n}/{k}={st.captures}" for (n, k), (st, _) in grid.items())
    ok = all(st.captures >= 98 for st, _ in grid.values())
    report("C1 reliability (>=98/100 captures in all 20 cells)", ok,
           f"min {worst[1][0].captures} at {worst[0]}; {cells}")


@pytest.mark.parametrize("cell,lo,hi", [((4, "still"), 15, 60), ((4, "linear_smart"), 100, 400),
                                        ((24, "still"), 8, 30)])
def test_c2_efficiency_bands(grid, cell, lo, hi):
    avg = grid[cell][0].avg_moves
    report(f"C2 efficiency band {cell} in [{lo}, {hi}]", lo <= avg <= hi, f"avg_moves={avg:.2f}")


def test_c3_difficulty_ordering(grid):
    bad = []
    parts = []
    for n in SWARM_SIZES:
        s, r, ls = (grid[n, k][0].avg_moves for k in ("still", "random", "linear_smart"))
        parts.append(f"{n}: still={s:.1f} random={r:.1f} smart={ls:.1f}")
        if not (ls > s and ls > r):
            bad.append(n)
    report("C3 difficulty ordering (linear_smart slowest)", not bad, f"violations={bad}; " + "; ".join(parts))


def test_c4_scalability_trend(grid):
    bad = []
    parts = []
    for kind in KINDS:
        avgs = [grid[n, kind][0].avg_moves for n in SWARM_SIZES]
        parts.append(f"{kind}=" + ",".join(f"{a:.1f}" for a in avgs))
        for (n0, a0), (n1, a1) in zip(zip(SWARM_SIZES, avgs), zip(SWARM_SIZES[1:], avgs[1:])):
            if a1 > 1.15 * a0:
                bad.append((kind, n0, n1))
    report("C4 scalability (non-increasing, +15% slack)", not bad, f"violations={bad}; " + "; ".join(parts))


def _hull_instances(rng, count):
    for k in range(count):
        if k % 2:
            # dense small boxes make boundary and collinear cases common
            pts = rng.integers(0, 5, size=(int(rng.integers(1, 8)), 2))
            p = rng.integers(-1, 6, size=2)
        else:
            pts = rng.integers(0, 30, size=(int(rng.integers(1, 25)), 2))
            p = rng.integers(0, 30, size=2)
        yield [tuple(map(int, q)) for q in pts], tuple(map(int, p))


def test_c5_oracle_equivalence():
    rng = np.random.default_rng(20240501)
    mismatch = 0
    shapely_mismatch = 0
    seen = {0.0: 0, 0.5: 0, 1.0: 0}
    for pts, p in _hull_instances(rng, 1000):
        got = inconv(p, convex_hull(pts))
        seen[got] += 1
        mismatch += got != halfplane_inconv(p, pts)
        shapely_mismatch += got != shapely_inconv(p, pts)
    cap_mismatch = 0
    captured = 0
    for k in range(1000):
        side = int(rng.integers(2, 8))
        n = int(rng.integers(2, min(side * side - 1, 10) + 1))
        w = random_world(rng, side, int(rng.integers(2, 8)) if k % 3 else side, min(n, side * 2 - 1))
        got = is_captured(w)
        captured += got
        cap_mismatch += got != enumerate_capture(w.prey, w.predators, w.width, w.height)
    ok = mismatch == 0 and shapely_mismatch == 0 and cap_mismatch == 0
    report("C5 oracle equivalence", ok,
           f"inconv vs half-plane {mismatch}/1000, vs shapely {shapely_mismatch}/1000 mismatches "
           f"(inside/edge/outside={seen[0.0]}/{seen[0.5]}/{seen[1.0]}); "
           f"is_captured {cap_mismatch}/1000 mismatches ({captured} captured)")


def _trace_violations(rec, width=30, height=30):
    bad = 0
    for s in rec.trace:
        cells = [tuple(s["prey"])] + [tuple(p) for p in s["predators"]]
        if len(set(cells)) != len(cells) or not all(0 <= x < width and 0 <= y < height for x, y in cells):
            bad += 1
    flags = [is_captured(WorldState(width, height, s["prey"], s["predators"])) for s in rec.trace]
    if any(flags[:-1]) or flags[-1] != rec.captured:
        bad += 1
    return bad


def test_c6_invariant_suite(grid, tmp_path):
    totals = {}
    trace_bad = 0
    runs = 0
    for _, records in grid.values():
        for rec in records:
            runs += 1
            for k, v in rec.invariants.items():
                totals[k] = totals.get(k, 0) + v
            trace_bad += _trace_violations(rec)
    checks = totals.pop("checks")
    violations = sum(totals.values())

    identical = True
    for n, kind in ((4, "linear_smart"), (12, "random"), (24, "still")):
        cfg = SimConfig(n_predators=n, prey_kind=kind, seed=7)
        a = write_trace_jsonl(run_episode(cfg, trace=True), tmp_path / f"a_{n}_{kind}.jsonl").read_bytes()
        b = write_trace_jsonl(run_episode(cfg, trace=True), tmp_path / f"b_{n}_{kind}.jsonl").read_bytes()
        identical &= a == b
    ok = violations == 0 and trace_bad == 0 and identical
    report("C6 invariant suite", ok,
           f"{runs} runs, {checks} checked updates, violations={totals}, trace violations={trace_bad}, "
           f"seed-7 traces byte-identical={identical}")


def test_c7_unit_values():
    repel = repel_factor(0.0, FitnessParams(d_min=1.0))
    ring = [(9, 10), (11, 10), (10, 9), (10, 11)]
    unif = uniformity_quad(ring, (10, 10))
    world = WorldState(30, 30, (10, 10), ring)
    totals = [evaluate_candidate(i, ring[i], world, FitnessParams(uniformity_mode="quad")).total for i in range(4)]
    ok = (abs(repel - math.e ** 2) <= 1e-9 and unif == 0.0 and all(abs(t - 1.0) <= 1e-9 for t in totals))
    report("C7 unit values", ok,
           f"repel_factor(0,1)={repel!r} (e^2={math.e ** 2!r}); cross-configuration uniformity={unif!r}; "
           f"capture-configuration totals={totals}")
