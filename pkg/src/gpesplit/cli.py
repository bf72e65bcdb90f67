"""Command-line entry point: ``gpesplit {ground-state,invariants,cost-accuracy,report}``."""
from __future__ import annotations

import argparse
import sys

from . import bench

COMMANDS = {
    "ground-state": ("ground_state", bench.run_benchmark_I),
    "invariants": ("invariants", bench.run_benchmark_II),
    "cost-accuracy": ("cost_accuracy", bench.run_benchmark_III),
}


def _floats(text):
    return tuple(float(bench._num(p)) for p in text.split(",") if p.strip())


def _ints(text):
    return tuple(int(p) for p in text.split(",") if p.strip())


def _strs(text):
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file with a [run] section")
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--M", type=int, help="highest Hermite index per axis (M+1 nodes)")
    p.add_argument("--orders", type=_ints, help="comma-separated even orders")
    p.add_argument("--taus", type=_floats, help="comma-separated time steps, e.g. 2^-3,2^-4")
    p.add_argument("--c-values", dest="c_values", type=_floats, help="mass constraints ||u||^2")
    p.add_argument("--T", type=float, help="final (simulated) time")
    p.add_argument("--seeds", type=_strs, help=f"comma-separated names from {bench.SEEDS}")
    p.add_argument("--out", dest="out_dir", help="output directory (default: results)")
    p.add_argument("--workers", type=int, help=f"worker processes; env {bench.WORKERS_ENV} takes precedence")
    p.add_argument("--repeats", type=int, help="timing repeats per cell (median is kept)")
    p.add_argument("--timeout", type=float, help="per-cell timeout in seconds")
    p.add_argument("--refine-levels", dest="refine_levels", type=int,
                   help="tau halvings for the refined ground-state energy (0 disables)")
    p.add_argument("--gs-taus", dest="gs_taus", type=_floats,
                   help="decreasing tau schedule for ground states in the invariants benchmark")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpesplit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (bench_name, _) in COMMANDS.items():
        _add_run_flags(sub.add_parser(name, help=f"run the {bench_name} benchmark"))
    rep = sub.add_parser("report", help="combine saved benchmark artifacts into summary.json")
    rep.add_argument("--out", dest="out_dir", default="results")
    return parser


def _resolve(args, benchmark: str) -> bench.RunConfig:
    names = ("beta", "gamma", "M", "orders", "taus", "c_values", "T", "seeds", "out_dir", "workers",
             "repeats", "timeout", "refine_levels", "gs_taus")
    overrides = {k: getattr(args, k) for k in names}
    if args.config:
        cfg = bench.RunConfig.from_file(args.config, **overrides)
        if cfg.benchmark != benchmark:
            raise SystemExit(f"config file is for {cfg.benchmark!r}, command runs {benchmark!r}")
        return cfg
    return bench.RunConfig.defaults(benchmark, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        items = bench.load_artifacts(args.out_dir)
        try:
            path, passed = bench.emit_report(items, args.out_dir)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        benchmark, runner = COMMANDS[args.command]
        config = _resolve(args, benchmark)
        art = runner(config)
        path, passed = bench.emit_report([art], config.out_dir)
    print(f"summary written to {path}; checks {'passed' if passed else 'FAILED'}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
