"""Command line: ``ccpsor run | batch | render``.

Every option can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment). Keys use the long flag names with dashes or
underscores. Flags given on the command line override the file.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ccpso import PSOParams
from .fitness import FitnessParams
from .harness import (
    ConfigError,
    SimConfig,
    parse_seeds,
    read_trace_jsonl,
    run_batch,
    run_episode,
    write_runs_csv,
    write_stats_csv,
    write_trace_jsonl,
)
from .prey import KINDS
from .render import render_svg

EXIT_CONFIG = 2
EXIT_IO = 3

# option names shared by flags and config files, grouped by value type
_INT = ("width", "height", "seed", "max_steps", "workers", "n_p", "t_v", "s_i", "s_g")
_FLOAT = ("move_probability", "w", "c1", "c2", "d_min")
_STR = ("predators", "prey", "preys", "seeds", "trace", "out", "runs_out", "uniformity")
_DEFAULTS = {
    "width": 30,
    "height": 30,
    "predators": "4",
    "prey": "still",
    "preys": "all",
    "seed": 1,
    "seeds": "1..100",
    "max_steps": 1000,
    "workers": 1,
    "move_probability": 0.9,
    "uniformity": "quad",
}


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines into a dict with underscore keys (values stay strings)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise OSError(f"cannot read config file {path}: {e}") from e
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _INT + _FLOAT + _STR:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key: str, value):
    if value is None:
        return None
    try:
        if key in _INT:
            return int(value)
        if key in _FLOAT:
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return str(value)


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    opts = dict(_DEFAULTS)
    if getattr(args, "config", None):
        opts.update(load_config_file(args.config))
    for key in _INT + _FLOAT + _STR:
        v = getattr(args, key, None)
        if v is not None:
            opts[key] = v
    return {k: _convert(k, v) for k, v in opts.items()}


def _int_list(text) -> list[int]:
    try:
        vals = [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals:
        raise ConfigError("empty predator list")
    return vals


def _prey_list(text) -> list[str]:
    if str(text).strip() == "all":
        return list(KINDS)
    kinds = [s.strip() for s in str(text).split(",") if s.strip()]
    bad = [k for k in kinds if k not in KINDS]
    if bad or not kinds:
        raise ConfigError(f"unknown prey kind(s) {bad}; choose from {', '.join(KINDS)} or 'all'")
    return kinds


def build_config(opts: dict, n_predators: int, prey: str, seed: int) -> SimConfig:
    pso_kw = {k: opts[k] for k in ("w", "c1", "c2", "n_p", "t_v", "s_i", "s_g") if opts.get(k) is not None}
    fit_kw = {"uniformity_mode": opts["uniformity"]}
    if opts.get("d_min") is not None:
        fit_kw["d_min"] = opts["d_min"]
    try:
        return SimConfig(
            width=opts["width"],
            height=opts["height"],
            n_predators=n_predators,
            prey_kind=prey,
            max_steps=opts["max_steps"],
            seed=seed,
            prey_move_probability=opts["move_probability"],
            pso=PSOParams(**pso_kw),
            fitness=FitnessParams(**fit_kw),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e


def cmd_run(opts: dict) -> int:
    preds = _int_list(opts["predators"])
    if len(preds) != 1:
        raise ConfigError("run takes a single predator count")
    config = build_config(opts, preds[0], opts["prey"], opts["seed"])
    rec = run_episode(config, trace=bool(opts.get("trace")))
    status = "captured" if rec.captured else "escaped"
    print(f"seed={rec.seed} predators={config.n_predators} prey={config.prey_kind} {status} moves={rec.moves}")
    if opts.get("trace"):
        write_trace_jsonl(rec, opts["trace"])
    return 0


def cmd_batch(opts: dict) -> int:
    preds = _int_list(opts["predators"])
    preys = _prey_list(opts["preys"])
    seeds = parse_seeds(opts["seeds"])
    if not opts.get("out"):
        raise ConfigError("batch needs --out")
    # validate every cell before spending time on any of them
    configs = [(n, p, build_config(opts, n, p, seeds[0])) for n in preds for p in preys]
    rows = []
    runs_dir = Path(opts["runs_out"]) if opts.get("runs_out") else None
    if runs_dir is not None:
        try:
            runs_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OSError(f"cannot create run directory {runs_dir}: {e}") from e
    for n, p, cfg in configs:
        stats, records = run_batch(cfg, seeds, workers=max(1, opts["workers"]))
        rows.append((n, p, stats))
        print(f"{n:>3} {p:<13} captures={stats.captures}/{stats.runs} "
              f"avg={stats.avg_moves:.2f} std={stats.std_moves:.2f}", flush=True)
        if runs_dir is not None:
            write_runs_csv(records, runs_dir / f"runs_{n}_{p}.csv", n, p)
    write_stats_csv(rows, opts["out"])
    return 0


def cmd_render(opts: dict) -> int:
    if not opts.get("trace") or not opts.get("out"):
        raise ConfigError("render needs --trace and --out")
    trace = read_trace_jsonl(opts["trace"])
    paths = render_svg(trace, opts["out"], opts["width"], opts["height"])
    print(f"wrote {len(paths)} frame(s) to {opts['out']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags win")
    common.add_argument("--width", type=int)
    common.add_argument("--height", type=int)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--max-steps", dest="max_steps", type=int)
    sim.add_argument("--move-probability", dest="move_probability", type=float,
                     help="chance the prey moves on its turn (default 0.9)")
    sim.add_argument("--uniformity", choices=("quad", "grid3x3"), help="starting uniformity mode")
    sim.add_argument("--d-min", dest="d_min", type=float)
    for name in ("w", "c1", "c2"):
        sim.add_argument(f"--{name}", type=float)
    for name in ("n_p", "t_v", "s_i", "s_g"):
        sim.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)

    parser = argparse.ArgumentParser(prog="ccpsor", description="Cooperative PSO pursuit simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common, sim], help="play one episode")
    run.add_argument("--predators")
    run.add_argument("--prey", choices=KINDS)
    run.add_argument("--seed", type=int)
    run.add_argument("--trace", help="write a JSONL trace here")

    batch = sub.add_parser("batch", parents=[common, sim], help="seeded experiment grid to CSV")
    batch.add_argument("--predators", help="comma list, e.g. 4,8,12,16,24")
    batch.add_argument("--preys", help="comma list of prey kinds or 'all'")
    batch.add_argument("--seeds", help="e.g. 1..100 or 1,2,5")
    batch.add_argument("--out", help="stats CSV path")
    batch.add_argument("--runs-out", dest="runs_out", help="directory for per-run CSV files")
    batch.add_argument("--workers", type=int)

    render = sub.add_parser("render", parents=[common], help="SVG frames from a JSONL trace")
    render.add_argument("--trace")
    render.add_argument("--out", help="output directory")
    return parser


COMMANDS = {"run": cmd_run, "batch": cmd_batch, "render": cmd_render}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](resolve(args))
    except ConfigError as e:
        print(f"ccpsor: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        code = EXIT_IO if isinstance(e, OSError) else EXIT_CONFIG
        print(f"ccpsor: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
