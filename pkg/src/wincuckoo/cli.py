"""Command-line front end: build, query, bench, experiment, inspect.

Key files are raw little-endian 64-bit integers by default; ``--text``
switches to one decimal key per line.  Exit codes: 0 success, 1 usage
error, 2 build failure, 3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import workload
from .concurrent import ShardedFilter
from .filter import FilterFullError
from .layout import ConfigError, FilterConfig, load_threshold
from .persist import FormatError, load_filter, read_file_summary, save_filter
from .workload import BENCH_MODES, RecordSink, bench_throughput, gen_keys

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUILD_FAILED = 2
EXIT_IO = 3

EXPERIMENTS = ("fpr", "load-threshold", "walk-hist", "time-memory")

DEFAULT_VARIANT_GRID = [("windowed", 2), ("windowed", 4), ("bucketed", 2), ("bucketed", 4)]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=("bucketed", "windowed", "xor"), default="windowed",
                   help="memory layout")
    p.add_argument("-l", type=int, choices=(2, 4), default=2, help="slots per bucket/window")
    p.add_argument("-k", type=int, default=10, help="target FPR exponent (FPR = 2^-k)")
    p.add_argument("--capacity", type=int, default=1_000_000, help="keys the filter is sized for")
    p.add_argument("--load-fraction", type=float, default=0.98,
                   help="fill target as a fraction of the load threshold")
    p.add_argument("--max-walk", type=int, default=10_000, help="eviction budget per insertion")
    p.add_argument("--subfilters", type=int, default=1, help="independent shards (F)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")


def _config_from(args) -> FilterConfig:
    try:
        config = FilterConfig(
            variant=args.variant,
            l=args.l,
            k=args.k,
            capacity=args.capacity,
            load_fraction=args.load_fraction,
            max_walk=args.max_walk,
            subfilters=args.subfilters,
            seed=args.seed,
        )
        geom = config.geometry()
    except (ConfigError, ValueError) as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    if args.variant == "xor":
        ideal = args.capacity / (args.load_fraction * load_threshold("xor", args.l))
        actual = geom.total_slots
        if actual > ideal * 1.1:
            print(
                f"warning: xor layout rounded the table up to {actual} slots "
                f"({actual / ideal:.2f}x the unrounded size)",
                file=sys.stderr,
            )
    return config


def read_keys(path: str, text: bool) -> np.ndarray:
    try:
        if text:
            with open(path) as f:
                return np.array([int(line) for line in f if line.strip()], dtype=np.uint64)
        return np.fromfile(path, dtype="<u8").astype(np.uint64)
    except OSError as exc:
        raise CliError(f"cannot read keys from {path}: {exc}", EXIT_IO) from exc
    except ValueError as exc:
        raise CliError(f"bad key file {path}: {exc}", EXIT_IO) from exc


def write_keys(path: str, keys: np.ndarray, text: bool) -> None:
    if text:
        with open(path, "w") as f:
            for k in keys:
                f.write(f"{int(k)}\n")
    else:
        keys.astype("<u8").tofile(path)


def cmd_build(args) -> int:
    config = _config_from(args)
    if args.keys:
        keys = read_keys(args.keys, args.text)
    else:
        keys = gen_keys(args.seed, args.capacity, "insert")
    filt = ShardedFilter.from_config(config)
    geom = filt.geometry
    predicted_c = geom.total_slots * geom.q / (args.capacity * geom.k)
    failure: str | None = None
    t0 = time.perf_counter()
    try:
        if args.threads > 1 and config.subfilters > 1:
            filt.build_parallel(keys)
        else:
            filt.build(keys)
    except FilterFullError as exc:
        failure = str(exc)
    elapsed = time.perf_counter() - t0

    out = Path(args.out)
    try:
        save_filter(out, filt.shards, config.seed)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    stats = filt.merged_stats()
    blob = {
        "config": {
            "variant": config.variant, "l": config.l, "k": config.k,
            "capacity": config.capacity, "load_fraction": config.load_fraction,
            "max_walk": config.max_walk, "subfilters": config.subfilters,
            "seed": config.seed,
        },
        "achieved_load": filt.load,
        "inserted": stats.inserts,
        "duplicates": stats.duplicates,
        "failures": stats.failures,
        "predicted_overhead": predicted_c,
        "actual_overhead": filt.overhead_factor() if filt.occupied else None,
        "walk": {
            "p50": stats.percentile(50),
            "p99": stats.percentile(99),
            "max": stats.max_walk_realized,
            "zero_fraction": stats.zero_eviction_fraction,
        },
        "wall_time_s": round(elapsed, 3),
        "memory_bytes": filt.nbytes,
        "filter_file": str(out),
        "hard_failure": failure,
    }
    stats_path = Path(args.stats) if args.stats else out.with_suffix(out.suffix + ".stats.json")
    stats_path.write_text(json.dumps(blob, indent=2) + "\n")
    print(json.dumps(blob, indent=2))
    if failure is not None or stats.failures:
        return EXIT_BUILD_FAILED
    return EXIT_OK


def cmd_query(args) -> int:
    try:
        shards, seed = load_filter(args.filter)
    except (FormatError, OSError) as exc:
        raise CliError(f"cannot load {args.filter}: {exc}", EXIT_IO) from exc
    filt = ShardedFilter.from_shards(shards, seed=seed)
    keys = read_keys(args.keys, args.text)
    answers = filt.query_parallel(keys, threads=args.threads)
    if args.summary:
        print(json.dumps({"queries": int(keys.size), "positive": int(answers.sum())}))
    else:
        sys.stdout.write("\n".join("1" if a else "0" for a in answers))
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_inspect(args) -> int:
    try:
        info = read_file_summary(args.filter)
    except (FormatError, OSError) as exc:
        raise CliError(f"cannot inspect {args.filter}: {exc}", EXIT_IO) from exc
    print(json.dumps(info, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _config_from(args)
    rec = bench_throughput(
        config, args.mode, threads=args.threads, n=args.n or args.capacity, repeats=args.repeats
    )
    blob = {f: getattr(rec, f) for f in rec.field_names()}
    blob["mode"] = args.mode
    print(json.dumps(blob, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(blob, indent=2) + "\n")
    return EXIT_OK


def _variant_grid(args) -> list[tuple[str, int]]:
    if args.variants:
        grid = []
        for spec in args.variants.split(","):
            name, _, l = spec.partition(":")
            grid.append((name.strip(), int(l or 2)))
        return grid
    return list(DEFAULT_VARIANT_GRID)


def cmd_experiment(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    name = args.name
    csv_path = outdir / f"{name}_seed{args.seed}.csv"
    config = {
        "experiment": name,
        "seed": args.seed,
        "n": args.n,
        "m": args.m,
        "k": args.k,
        "ks": args.ks,
        "slots": args.slots,
        "max_walks": args.max_walks,
        "repeats": args.repeats,
        "loads": args.loads,
        "variants": args.variants or "default",
    }
    variants = _variant_grid(args)
    with RecordSink(csv_path, config) as sink:
        if name == "fpr":
            ks = [int(x) for x in args.ks.split(",")]
            workload.run_fpr_experiment(
                sink, variants=variants, ks=ks, n=args.n, m=args.m, seed=args.seed
            )
        elif name == "load-threshold":
            max_walks = [int(x) for x in args.max_walks.split(",")]
            workload.run_load_threshold_experiment(
                sink, variants=variants, k=args.k, slots=args.slots,
                max_walks=max_walks, repeats=args.repeats, seed=args.seed,
            )
        elif name == "walk-hist":
            workload.run_walk_histogram_experiment(
                sink, outdir / f"walk-hist_seed{args.seed}_bins.csv",
                variants=variants, k=args.k, n=args.n, seed=args.seed,
            )
        elif name == "time-memory":
            loads = [float(x) for x in args.loads.split(",")]
            workload.run_time_memory_sweep(
                sink, variants=variants, loads=loads, k=args.k, n=args.n, seed=args.seed
            )
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_genkeys(args) -> int:
    keys = gen_keys(args.seed, args.n, args.partition)
    write_keys(args.out, keys, args.text)
    print(f"wrote {args.n} keys to {args.out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="wincuckoo",
        description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a filter and write it to disk",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_filter_flags(p)
    p.add_argument("--keys", help="key file to insert (default: generate from --seed)")
    p.add_argument("--text", action="store_true", help="key files hold decimal text lines")
    p.add_argument("--out", required=True, help="output filter file")
    p.add_argument("--stats", help="stats JSON path (default: <out>.stats.json)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query keys against a saved filter",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("filter", help="filter file")
    p.add_argument("--keys", required=True, help="key file to query")
    p.add_argument("--text", action="store_true", help="key files hold decimal text lines")
    p.add_argument("--summary", action="store_true", help="print positive-count JSON instead of 0/1 lines")
    p.add_argument("--threads", type=int, default=1, help="query threads")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("inspect", help="print the header of a filter file",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("filter", help="filter file")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="throughput benchmark",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_filter_flags(p)
    p.add_argument("--mode", choices=BENCH_MODES, default="lookup-mixed")
    p.add_argument("--n", type=int, default=None, help="keys per run (default: capacity)")
    p.add_argument("--repeats", type=int, default=3, help="timed repetitions to average")
    p.add_argument("--out", help="also write the JSON record here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("experiment", help="run a measurement grid, emit CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1_000_000, help="keys to insert")
    p.add_argument("--m", type=int, default=1_000_000, help="query keys for FPR")
    p.add_argument("-k", type=int, default=10, help="FPR exponent for single-k experiments")
    p.add_argument("--ks", default="8,9,10,11,12", help="comma-separated k grid (fpr)")
    p.add_argument("--slots", type=int, default=1_000_000, help="table slots (load-threshold)")
    p.add_argument("--max-walks", dest="max_walks", default="1,10,100,10000",
                   help="comma-separated walk budgets (load-threshold)")
    p.add_argument("--repeats", type=int, default=5, help="repeats per grid point")
    p.add_argument("--loads", default="0.05,0.2,0.4,0.6,0.8,0.85,0.9,0.94",
                   help="comma-separated absolute loads (time-memory)")
    p.add_argument("--variants", default=None,
                   help="comma-separated variant:l pairs, e.g. windowed:2,bucketed:4")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("genkeys", help="write a seeded random key file",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--partition", choices=("insert", "query"), default="insert")
    p.add_argument("--text", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genkeys)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FilterFullError as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return EXIT_BUILD_FAILED
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
