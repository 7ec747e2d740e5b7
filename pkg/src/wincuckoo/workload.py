"""Key generation, FPR/load/overhead measurement, experiment procedures.

Experiments write CSV files with one fixed schema (one column per
ExperimentRecord field, preceded by a versioned comment line) plus a
sidecar JSON holding the full run configuration.  Rows are flushed as
they are produced so interrupted runs keep their completed rows.

All randomness flows from explicit seeds.  Insert keys and query keys
are disjoint by construction: the top bit is forced to 0 for the insert
partition and to 1 for the query partition.

Timing excludes key generation and file I/O; the parallel-insert
benchmark times the whole stream end to end (routing included).
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterator

import numpy as np

from .concurrent import ShardedFilter
from .filter import BuildStats
from .layout import FilterConfig, geometry_for_slots, load_threshold, size_filter_at_load

CSV_SCHEMA_COMMENT = "# wincuckoo-experiment-csv v1"

TOP_BIT = np.uint64(1 << 63)
LOW_MASK = np.uint64((1 << 63) - 1)


def gen_keys(seed: int, n: int, partition: str = "insert") -> np.ndarray:
    """n pseudo-random 64-bit keys; the two partitions never overlap."""
    rng = np.random.Generator(np.random.PCG64(seed))
    keys = rng.integers(0, 1 << 64, size=n, dtype=np.uint64)
    if partition == "insert":
        return keys & LOW_MASK
    if partition == "query":
        return keys | TOP_BIT
    raise ValueError(f"unknown partition {partition!r}")


def key_stream(seed: int, chunk: int = 1 << 16, partition: str = "insert") -> Iterator[np.ndarray]:
    """Unbounded stream of key chunks (for fill-until-failure runs)."""
    counter = 0
    while True:
        yield gen_keys(seed + counter * 0x9E3779B9, chunk, partition)
        counter += 1


def measure_fpr(filt: ShardedFilter, m: int, seed: int, chunk: int = 1 << 20) -> float:
    """Positive fraction over m fresh query-partition keys."""
    hits = 0
    remaining = m
    part = 0
    while remaining > 0:
        take = min(chunk, remaining)
        keys = gen_keys(seed + part * 0x1000193, take, "query")
        hits += filt.count_hits(keys)
        remaining -= take
        part += 1
    return hits / m


@dataclass
class ExperimentRecord:
    """One CSV row of a measurement run."""

    variant: str
    l: int
    k: int
    n: int
    s: int
    load_fraction: float
    max_walk: int
    F: int
    threads: int
    seed: int
    achieved_load: float
    empirical_fpr: float
    overhead_C: float
    insert_throughput: float
    lookup_throughput: float
    walk_p50: int
    walk_p99: int
    walk_max: int
    walk_zero_frac: float
    wall_time_s: float
    memory_bytes: int

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> str:
        vals = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                vals.append(repr(v))
            else:
                vals.append(str(v))
        return ",".join(vals)

    @classmethod
    def parse(cls, line: str) -> "ExperimentRecord":
        parts = line.rstrip("\n").split(",")
        names = cls.field_names()
        if len(parts) != len(names):
            raise ValueError(f"row has {len(parts)} columns, schema has {len(names)}")
        kwargs = {}
        for f, raw in zip(fields(cls), parts):
            if f.type in ("int", int):
                kwargs[f.name] = int(raw)
            elif f.type in ("float", float):
                kwargs[f.name] = float(raw)
            else:
                kwargs[f.name] = raw
        return cls(**kwargs)


def read_records(path) -> list[ExperimentRecord]:
    records = []
    with open(path) as f:
        header_seen = False
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line.split(",") != ExperimentRecord.field_names():
                    raise ValueError(f"unexpected CSV header in {path}")
                header_seen = True
                continue
            records.append(ExperimentRecord.parse(line))
    return records


class RecordSink:
    """Row-by-row CSV writer with a sidecar JSON of the configuration."""

    def __init__(self, path, config: dict):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")
        self._fh.write(CSV_SCHEMA_COMMENT + "\n")
        self._fh.write(",".join(ExperimentRecord.field_names()) + "\n")
        self._fh.flush()
        sidecar = self.path.with_suffix(".config.json")
        sidecar.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")

    def write(self, record: ExperimentRecord) -> None:
        self._fh.write(record.row() + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "RecordSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _walk_summary(stats: BuildStats) -> tuple[int, int, int, float]:
    return (
        stats.percentile(50),
        stats.percentile(99),
        stats.max_walk_realized,
        stats.zero_eviction_fraction,
    )


def _record_for(
    config: FilterConfig,
    filt: ShardedFilter,
    *,
    n: int,
    threads: int = 1,
    empirical_fpr: float = math.nan,
    insert_throughput: float = math.nan,
    lookup_throughput: float = math.nan,
    wall_time_s: float = math.nan,
) -> ExperimentRecord:
    stats = filt.merged_stats()
    p50, p99, wmax, zfrac = _walk_summary(stats)
    inserted = stats.inserts
    return ExperimentRecord(
        variant=config.variant,
        l=config.l,
        k=config.k,
        n=n,
        s=filt.geometry.total_slots,
        load_fraction=config.load_fraction,
        max_walk=config.max_walk,
        F=config.subfilters,
        threads=threads,
        seed=config.seed,
        achieved_load=filt.load,
        empirical_fpr=empirical_fpr,
        overhead_C=filt.overhead_factor(inserted) if inserted else math.nan,
        insert_throughput=insert_throughput,
        lookup_throughput=lookup_throughput,
        walk_p50=p50,
        walk_p99=p99,
        walk_max=wmax,
        walk_zero_frac=zfrac,
        wall_time_s=wall_time_s,
        memory_bytes=filt.nbytes,
    )


def build_filter(config: FilterConfig, keys: np.ndarray, *, parallel: bool = False) -> tuple[ShardedFilter, float]:
    """Build a filter over pre-generated keys; returns (filter, seconds)."""
    filt = ShardedFilter.from_config(config)
    t0 = time.perf_counter()
    if parallel and config.subfilters > 1:
        filt.build_parallel(keys)
    else:
        filt.build(keys)
    return filt, time.perf_counter() - t0


# ------------------------------------------------------------- experiments


def run_fpr_experiment(
    sink: RecordSink,
    *,
    variants: list[tuple[str, int]],
    ks: list[int],
    n: int,
    m: int,
    seed: int,
    load_fraction: float = 0.98,
    max_walk: int = 10_000,
    subfilters: int = 1,
) -> list[ExperimentRecord]:
    """Overhead factor, achieved load and empirical FPR per (variant, l, k)."""
    out = []
    keys = gen_keys(seed, n, "insert")
    for variant, l in variants:
        for k in ks:
            config = FilterConfig(
                variant=variant, l=l, k=k, capacity=n,
                load_fraction=load_fraction, max_walk=max_walk,
                subfilters=subfilters, seed=seed,
            )
            filt, build_s = build_filter(config, keys)
            t0 = time.perf_counter()
            fpr = measure_fpr(filt, m, seed + 1)
            lookup_s = time.perf_counter() - t0
            rec = _record_for(
                config, filt, n=n,
                empirical_fpr=fpr,
                insert_throughput=n / build_s,
                lookup_throughput=m / lookup_s,
                wall_time_s=build_s,
            )
            sink.write(rec)
            out.append(rec)
    return out


def fill_until_failure(
    variant: str, l: int, k: int, slots: int, max_walk: int, seed: int
) -> tuple[ShardedFilter, int]:
    """Raw-insert random keys until the first exhausted walk.

    Returns the filter at failure time and the number of attempted keys.
    """
    geom = geometry_for_slots(slots, variant, l, k)
    filt = ShardedFilter(geom, seed=seed, max_walk=max_walk)
    attempted = 0
    for chunk in key_stream(seed + 17):
        consumed = filt.shards[0].insert_many(chunk, if_absent=False, stop_on_fail=True)
        attempted += consumed
        if consumed < chunk.size:
            return filt, attempted
        if attempted > 4 * geom.total_slots:  # safety: cannot run forever
            return filt, attempted
    raise AssertionError("unreachable")


def run_load_threshold_experiment(
    sink: RecordSink,
    *,
    variants: list[tuple[str, int]],
    k: int,
    slots: int,
    max_walks: list[int],
    repeats: int,
    seed: int,
) -> list[ExperimentRecord]:
    """Achievable load per max-walk budget, one row per repeat."""
    out = []
    for variant, l in variants:
        for max_walk in max_walks:
            for r in range(repeats):
                run_seed = seed + 1009 * r
                t0 = time.perf_counter()
                filt, attempted = fill_until_failure(variant, l, k, slots, max_walk, run_seed)
                elapsed = time.perf_counter() - t0
                config = FilterConfig(
                    variant=variant, l=l, k=k, capacity=attempted,
                    load_fraction=1.0, max_walk=max_walk, subfilters=1, seed=run_seed,
                )
                rec = _record_for(config, filt, n=attempted, wall_time_s=elapsed)
                sink.write(rec)
                out.append(rec)
    return out


def run_walk_histogram_experiment(
    sink: RecordSink,
    bins_path,
    *,
    variants: list[tuple[str, int]],
    k: int,
    n: int,
    seed: int,
    load_fraction: float = 0.98,
    max_walk: int = 10_000,
) -> list[ExperimentRecord]:
    """Evictions-per-insert distribution at the design load.

    Writes the summary rows to `sink` and the nonzero histogram bins to a
    separate CSV (columns: variant,l,k,n,seed,walk_len,count).
    """
    out = []
    bins_path = Path(bins_path)
    bins_path.parent.mkdir(parents=True, exist_ok=True)
    keys = gen_keys(seed, n, "insert")
    with open(bins_path, "w") as bf:
        bf.write(CSV_SCHEMA_COMMENT + "\n")
        bf.write("variant,l,k,n,seed,walk_len,count\n")
        for variant, l in variants:
            config = FilterConfig(
                variant=variant, l=l, k=k, capacity=n,
                load_fraction=load_fraction, max_walk=max_walk, seed=seed,
            )
            filt, build_s = build_filter(config, keys)
            rec = _record_for(config, filt, n=n, insert_throughput=n / build_s, wall_time_s=build_s)
            sink.write(rec)
            out.append(rec)
            hist = filt.merged_stats().histogram
            for length in np.nonzero(hist)[0]:
                bf.write(f"{variant},{l},{k},{n},{seed},{length},{hist[length]}\n")
            bf.flush()
    return out


def run_time_memory_sweep(
    sink: RecordSink,
    *,
    variants: list[tuple[str, int]],
    loads: list[float],
    k: int,
    n: int,
    seed: int,
    max_walk: int = 10_000,
) -> list[ExperimentRecord]:
    """Build time and memory at absolute target loads (skips loads past
    98% of a variant's threshold)."""
    out = []
    keys = gen_keys(seed, n, "insert")
    for variant, l in variants:
        t = load_threshold(variant, l)
        for load in loads:
            fraction = load / t
            if fraction > 0.98:
                print(
                    f"# skip {variant} l={l} load={load}: beyond 0.98 * threshold {t}",
                    file=sys.stderr,
                )
                continue
            # size by absolute load so equal-l layouts use identical tables
            geom = size_filter_at_load(n, load, variant, l, k)
            config = FilterConfig(
                variant=variant, l=l, k=k, capacity=n,
                load_fraction=fraction, max_walk=max_walk, seed=seed,
            )
            filt = ShardedFilter(geom, seed=seed, max_walk=max_walk)
            t0 = time.perf_counter()
            filt.build(keys)
            build_s = time.perf_counter() - t0
            rec = _record_for(
                config, filt, n=n, insert_throughput=n / build_s, wall_time_s=build_s
            )
            sink.write(rec)
            out.append(rec)
    return out


BENCH_MODES = ("insert", "lookup-hit", "lookup-miss", "lookup-mixed")


def bench_throughput(
    config: FilterConfig,
    mode: str,
    *,
    threads: int = 1,
    n: int | None = None,
    repeats: int = 3,
) -> ExperimentRecord:
    """Wall-clock keys/second, averaged over `repeats` runs."""
    if mode not in BENCH_MODES:
        raise ValueError(f"unknown bench mode {mode!r}")
    n = n or config.capacity
    keys = gen_keys(config.seed, n, "insert")
    if mode == "insert":
        times = []
        filt = None
        for _ in range(repeats):
            filt = ShardedFilter.from_config(config)
            t0 = time.perf_counter()
            if threads > 1 and config.subfilters > 1:
                filt.build_parallel(keys)
            else:
                filt.build(keys)
            times.append(time.perf_counter() - t0)
        rate = n / (sum(times) / len(times))
        return _record_for(
            config, filt, n=n, threads=threads,
            insert_throughput=rate, wall_time_s=sum(times) / len(times),
        )

    filt, build_s = build_filter(config, keys, parallel=config.subfilters > 1)
    if mode == "lookup-hit":
        queries = keys
    elif mode == "lookup-miss":
        queries = gen_keys(config.seed + 1, n, "query")
    else:
        misses = gen_keys(config.seed + 1, n // 2, "query")
        queries = np.concatenate([keys[: n - n // 2], misses])
        rng = np.random.Generator(np.random.PCG64(config.seed + 2))
        rng.shuffle(queries)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        filt.query_parallel(queries, threads=threads)
        times.append(time.perf_counter() - t0)
    rate = queries.size / (sum(times) / len(times))
    return _record_for(
        config, filt, n=n, threads=threads,
        insert_throughput=n / build_s, lookup_throughput=rate,
        wall_time_s=sum(times) / len(times),
    )


def run_bench_experiment(
    sink: RecordSink,
    *,
    config: FilterConfig,
    modes: list[str],
    thread_counts: list[int],
    n: int,
    repeats: int = 3,
) -> list[ExperimentRecord]:
    out = []
    for mode in modes:
        for threads in thread_counts:
            rec = bench_throughput(config, mode, threads=threads, n=n, repeats=repeats)
            sink.write(rec)
            out.append(rec)
    return out


def overhead_from_file(path, k: int | None = None) -> float:
    """Recompute the overhead factor from a saved filter file alone."""
    from .persist import read_file_summary

    info = read_file_summary(path)
    detail = info["detail"]
    total_slots = sum(d["slots"] for d in detail)
    occupied = sum(d["occupied"] for d in detail)
    q = detail[0]["q"]
    k = k or detail[0]["k"]
    if occupied == 0:
        return math.nan
    return total_slots * q / (occupied * k)
