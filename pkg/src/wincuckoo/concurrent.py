"""Sharded filter with lock-free producer-consumer parallel construction.

Keys are routed to one of F independent subfilters by a dedicated hash
role.  During a parallel build, the main thread partitions the key stream
and appends each key to the current writable buffer of its shard; a full
buffer is flagged ready and the shard's consumer thread drains it with
the batch insert kernel (which releases the GIL, so consumers genuinely
overlap).  Flags are plain attributes: the interpreter serializes the
flag transitions, and each buffer payload is touched by exactly one side
at a time, so no locks are needed.  Buffers are filled and drained in
cyclic order, which keeps the per-shard insertion sequence equal to the
stream order; a parallel build therefore produces bit-identical tables
to the sequential path.

After a build completes (threads joined), the filter is read-only and
may be queried from any number of threads.
"""

from __future__ import annotations

import random
import threading
import time
from typing import Iterator

import numpy as np

from . import kernels
from .filter import BuildStats, CuckooShard, FilterFullError
from .hashing import HashFamily, derive_streams
from .layout import FilterConfig, LayoutGeometry

DEFAULT_BUFFERS_PER_SHARD = 4
DEFAULT_BUFFER_CAPACITY = 1 << 14
ROUTE_CHUNK = 1 << 16


class KeyBuffer:
    """Fixed-capacity key array handed between producer and consumer.

    ``state`` is WRITABLE while the producer owns it and READY while the
    consumer does; exactly one side touches the payload in each state.
    """

    WRITABLE = 0
    READY = 1

    __slots__ = ("keys", "count", "state")

    def __init__(self, capacity: int):
        self.keys = np.empty(capacity, dtype=np.uint64)
        self.count = 0
        self.state = KeyBuffer.WRITABLE


def _as_key_array(keys) -> np.ndarray:
    if isinstance(keys, np.ndarray) and keys.dtype == np.uint64:
        return np.ascontiguousarray(keys)
    return np.ascontiguousarray(np.asarray(keys, dtype=np.uint64))


def _iter_chunks(keys, chunk: int) -> Iterator[np.ndarray]:
    if isinstance(keys, np.ndarray):
        for i in range(0, keys.size, chunk):
            yield _as_key_array(keys[i : i + chunk])
        return
    batch = []
    for k in keys:
        batch.append(k)
        if len(batch) == chunk:
            yield np.array(batch, dtype=np.uint64)
            batch.clear()
    if batch:
        yield np.array(batch, dtype=np.uint64)


class ShardedFilter:
    """F identical subfilters behind a key-routing hash."""

    def __init__(self, geometry: LayoutGeometry, seed: int = 0, max_walk: int = 10_000):
        self.geometry = geometry
        self.seed = seed
        self.max_walk = max_walk
        streams = derive_streams(seed, 4 + geometry.subfilters)
        self.hashes = HashFamily(
            key_bits=64,
            a_sub=streams[0] | 1,
            a_loc=streams[1] | 1,
            a_fp=streams[2] | 1,
            a_off=streams[3] | 1,
            range_sub=geometry.subfilters,
            range_loc=geometry.groups_per_subfilter,
            fp_bits=geometry.fp_bits,
        )
        self.shards = [
            CuckooShard(geometry, self.hashes, max_walk=max_walk, walk_seed=streams[4 + i], index=i)
            for i in range(geometry.subfilters)
        ]
        self._route_params = self.shards[0].params

    @classmethod
    def from_config(cls, config: FilterConfig) -> "ShardedFilter":
        return cls(config.geometry(), seed=config.seed, max_walk=config.max_walk)

    @classmethod
    def from_shards(cls, shards: list[CuckooShard], seed: int = 0) -> "ShardedFilter":
        filt = cls.__new__(cls)
        filt.geometry = shards[0].geometry
        filt.seed = seed
        filt.max_walk = shards[0].max_walk
        filt.hashes = shards[0].hashes
        filt.shards = shards
        filt._route_params = shards[0].params
        return filt

    # -------------------------------------------------------------- routing

    @property
    def subfilters(self) -> int:
        return self.geometry.subfilters

    def route(self, key: int) -> int:
        return self.hashes.subfilter_of(key)

    def route_many(self, keys: np.ndarray) -> np.ndarray:
        out = np.empty(keys.shape[0], dtype=np.uint64)
        kernels.route_batch(keys, self._route_params, out)
        return out

    # ------------------------------------------------------------- building

    def build(self, keys, *, if_absent: bool = True, stop_on_fail: bool = False) -> "ShardedFilter":
        """Sequential build; key order per shard matches the stream order."""
        for chunk in _iter_chunks(keys, ROUTE_CHUNK):
            if self.subfilters == 1:
                consumed = self.shards[0].insert_many(
                    chunk, if_absent=if_absent, stop_on_fail=stop_on_fail
                )
                if stop_on_fail and consumed < chunk.size:
                    return self
                continue
            shard_of = self.route_many(chunk)
            for i, shard in enumerate(self.shards):
                mine = chunk[shard_of == i]
                if mine.size == 0:
                    continue
                consumed = shard.insert_many(mine, if_absent=if_absent, stop_on_fail=stop_on_fail)
                if stop_on_fail and consumed < mine.size:
                    return self
        return self

    def build_parallel(
        self,
        keys,
        *,
        if_absent: bool = True,
        buffers_per_shard: int = DEFAULT_BUFFERS_PER_SHARD,
        buffer_capacity: int = DEFAULT_BUFFER_CAPACITY,
        jitter: float = 0.0,
        jitter_seed: int = 0,
    ) -> "ShardedFilter":
        """Producer-consumer build: one consumer thread per shard.

        `jitter` > 0 injects random consumer sleeps of up to that many
        seconds per drained buffer (stress-testing hook).
        """
        if buffers_per_shard < 2:
            raise ValueError("need at least 2 buffers per shard")
        if buffer_capacity < 1:
            raise ValueError("buffer capacity must be >= 1")
        nshards = self.subfilters
        rings = [[KeyBuffer(buffer_capacity) for _ in range(buffers_per_shard)] for _ in range(nshards)]
        write_cursor = [0] * nshards
        done = [False] * nshards
        abort = threading.Event()
        errors: list[BaseException] = []

        def consumer(idx: int) -> None:
            shard = self.shards[idx]
            ring = rings[idx]
            cursor = 0
            jrng = random.Random(jitter_seed * 1000003 + idx) if jitter > 0 else None
            spins = 0
            while True:
                buf = ring[cursor]
                if buf.state == KeyBuffer.READY:
                    if jrng is not None:
                        time.sleep(jrng.uniform(0.0, jitter))
                    try:
                        shard.insert_many(buf.keys[: buf.count], if_absent=if_absent)
                    except FilterFullError as exc:
                        errors.append(exc)
                        abort.set()
                        return
                    buf.count = 0
                    buf.state = KeyBuffer.WRITABLE
                    cursor = (cursor + 1) % len(ring)
                    spins = 0
                elif done[idx] or abort.is_set():
                    # producer finished and this cursor slot is writable:
                    # cyclic order means nothing later can still be ready
                    return
                else:
                    spins += 1
                    if spins < 64:
                        time.sleep(0)
                    else:
                        time.sleep(5e-5)

        threads = [
            threading.Thread(target=consumer, args=(i,), name=f"shard-{i}", daemon=True)
            for i in range(nshards)
        ]
        for t in threads:
            t.start()

        def push(idx: int, chunk: np.ndarray) -> None:
            ring = rings[idx]
            pos = 0
            while pos < chunk.size:
                if abort.is_set():
                    return
                buf = ring[write_cursor[idx]]
                if buf.state != KeyBuffer.WRITABLE:
                    time.sleep(0)
                    continue
                take = min(chunk.size - pos, buffer_capacity - buf.count)
                buf.keys[buf.count : buf.count + take] = chunk[pos : pos + take]
                buf.count += take
                pos += take
                if buf.count == buffer_capacity:
                    buf.state = KeyBuffer.READY
                    write_cursor[idx] = (write_cursor[idx] + 1) % len(ring)

        try:
            for chunk in _iter_chunks(keys, ROUTE_CHUNK):
                if abort.is_set():
                    break
                if nshards == 1:
                    push(0, chunk)
                    continue
                shard_of = self.route_many(chunk)
                for i in range(nshards):
                    mine = chunk[shard_of == i]
                    if mine.size:
                        push(i, mine)
            for i in range(nshards):
                buf = rings[i][write_cursor[i]]
                while buf.state != KeyBuffer.WRITABLE and not abort.is_set():
                    time.sleep(0)
                if buf.count and buf.state == KeyBuffer.WRITABLE:
                    buf.state = KeyBuffer.READY
                done[i] = True
        finally:
            for i in range(nshards):
                done[i] = True
            for t in threads:
                t.join()
        if errors:
            raise errors[0]
        return self

    # -------------------------------------------------------------- queries

    def contains(self, key: int) -> bool:
        return self.shards[self.route(key)].contains(key)

    def contains_many(self, keys) -> np.ndarray:
        keys = _as_key_array(keys)
        if self.subfilters == 1:
            return self.shards[0].contains_many(keys)
        out = np.empty(keys.size, dtype=bool)
        shard_of = self.route_many(keys)
        for i, shard in enumerate(self.shards):
            mask = shard_of == i
            mine = keys[mask]
            if mine.size:
                out[mask] = shard.contains_many(mine)
        return out

    def count_hits(self, keys, chunk: int = 1 << 20) -> int:
        """Number of positive answers over a key array (batched)."""
        keys = _as_key_array(keys)
        total = 0
        for i in range(0, keys.size, chunk):
            part = keys[i : i + chunk]
            if self.subfilters == 1:
                total += self.shards[0].count_hits(part)
            else:
                shard_of = self.route_many(part)
                for j, shard in enumerate(self.shards):
                    mine = part[shard_of == j]
                    if mine.size:
                        total += shard.count_hits(mine)
        return total

    def query_parallel(self, keys, threads: int = 1) -> np.ndarray:
        """Order-preserving membership over a key array with query threads."""
        keys = _as_key_array(keys)
        if threads <= 1 or keys.size < threads:
            return self.contains_many(keys)
        out = np.empty(keys.size, dtype=bool)
        bounds = np.linspace(0, keys.size, threads + 1, dtype=np.int64)

        def work(a: int, b: int) -> None:
            out[a:b] = self.contains_many(keys[a:b])

        pool = [
            threading.Thread(target=work, args=(int(bounds[i]), int(bounds[i + 1])))
            for i in range(threads)
        ]
        for t in pool:
            t.start()
        for t in pool:
            t.join()
        return out

    # ------------------------------------------------------------ mutation

    def insert(self, key: int):
        return self.shards[self.route(key)].insert(key)

    def insert_if_absent(self, key: int):
        return self.shards[self.route(key)].insert_if_absent(key)

    def delete(self, key: int) -> bool:
        return self.shards[self.route(key)].delete(key)

    # ------------------------------------------------------------ inspection

    @property
    def occupied(self) -> int:
        return sum(s.occupied for s in self.shards)

    @property
    def load(self) -> float:
        return self.occupied / self.geometry.total_slots

    @property
    def failed(self) -> bool:
        return any(s.failed for s in self.shards)

    @property
    def nbytes(self) -> int:
        return sum(s.table.nbytes for s in self.shards)

    def merged_stats(self) -> BuildStats:
        return BuildStats.merged([s.build_stats() for s in self.shards])

    def overhead_factor(self, n_inserted: int | None = None) -> float:
        n = self.occupied if n_inserted is None else n_inserted
        return self.geometry.overhead_factor(n)
