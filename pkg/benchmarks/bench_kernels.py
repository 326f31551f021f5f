"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 50] [--episodes 5]

Prints per-call kernel timings on a typical subpopulation batch and the
wall time of a few whole episodes under each backend. Both backends must
produce identical results; the script checks that before timing.
"""
import argparse
import time

import numpy as np

from ccpsor import kernels
from ccpsor.harness import SimConfig, run_episode


def _timeit(fn, repeat):
    fn()  # warm up (jit compile / caches)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def kernel_table(repeat, n_cands=19, n_others=23, seed=0):
    rng = np.random.default_rng(seed)
    cands = rng.integers(0, 30, size=(n_cands, 2))
    others = rng.integers(0, 30, size=(n_others, 2))
    prey = np.array([15, 15])
    vel = rng.normal(scale=3.0, size=(n_cands, 2))
    prop = rng.integers(-5, 35, size=(n_cands, 2))

    cases = {
        "fitness_batch quad": lambda: kernels.fitness_batch(cands, others, prey, 1.0, kernels.QUAD),
        "fitness_batch 3x3": lambda: kernels.fitness_batch(cands, others, prey, 1.0, kernels.GRID3X3),
        "nnd_batch": lambda: kernels.nnd_batch(vel),
        "nbn_batch": lambda: kernels.nbn_batch(prop, (15, 15), 2, 30, 30),
    }
    rows = []
    for name, fn in cases.items():
        with kernels.use_backend("numba"):
            a = fn()
            t_nb = _timeit(fn, repeat)
        with kernels.use_backend("numpy"):
            b = fn()
            t_np = _timeit(fn, repeat)
        if not np.array_equal(a, b):
            raise SystemExit(f"backends disagree on {name}")
        rows.append((name, t_nb, t_np))
    return rows


def episode_table(episodes):
    rows = []
    for name in ("numba", "numpy"):
        with kernels.use_backend(name):
            run_episode(SimConfig(n_predators=4, seed=0, max_steps=5))
            t0 = time.perf_counter()
            moves = [run_episode(SimConfig(n_predators=8, prey_kind="random", seed=s)).moves
                     for s in range(1, episodes + 1)]
            rows.append((name, time.perf_counter() - t0, moves))
    if rows[0][2] != rows[1][2]:
        raise SystemExit("episode outcomes differ between backends")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--episodes", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel':<22}{'numba us':>12}{'numpy us':>12}{'speedup':>10}")
    for name, t_nb, t_np in kernel_table(args.repeat):
        print(f"{name:<22}{t_nb * 1e6:>12.1f}{t_np * 1e6:>12.1f}{t_np / t_nb:>9.1f}x")
    print()
    print(f"{args.episodes} episodes (8 predators, random prey)")
    for name, secs, moves in episode_table(args.episodes):
        print(f"  {name:<6} {secs:8.2f} s   moves={moves}")


if __name__ == "__main__":
    main()
