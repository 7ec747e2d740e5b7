"""Single-shard Cuckoo filter: insertion walk, lookup, deletion, stash.

Insertion probes the 2l candidate slots of a key (first-choice group
first, lowest lane first).  If every slot is taken, a uniformly random
candidate is evicted, the new value takes its place, and the evicted
value is re-inserted through its own two groups, looping for at most
``max_walk`` evictions.  A walk that runs out of budget parks the last
homeless value in a one-entry stash: the insert reports failure, but
lookups stay complete (no false negatives).  A second exhausted walk
while the stash is occupied is a hard failure; the filter needs to be
rebuilt with more space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hashing import HashFamily
from .layout import (
    VARIANT_XOR,
    LayoutGeometry,
    Location,
    alternative_location,
    decode_slot,
    primary_location,
    xor_alternative,
)
from .table import SlotTable, scalar_find_match


class FilterFullError(RuntimeError):
    """Insertion walk exhausted with the stash already occupied."""


class InsertStatus(enum.Enum):
    STORED = "stored"
    PRESENT = "already-present"
    FAILED = "failed"


@dataclass
class BuildStats:
    """Counters and the evictions-per-insert histogram of one build."""

    histogram: np.ndarray
    inserts: int
    duplicates: int
    failures: int
    final_load: float

    @property
    def zero_eviction_fraction(self) -> float:
        if self.inserts == 0:
            return 1.0
        return float(self.histogram[0]) / self.inserts

    @property
    def max_walk_realized(self) -> int:
        nz = np.nonzero(self.histogram)[0]
        return int(nz[-1]) if nz.size else 0

    def percentile(self, p: float) -> int:
        """Walk-length percentile over stored inserts (p in [0, 100])."""
        if self.inserts == 0:
            return 0
        cum = np.cumsum(self.histogram)
        target = p / 100.0 * self.inserts
        return int(np.searchsorted(cum, target, side="left"))

    @classmethod
    def merged(cls, parts: list["BuildStats"]) -> "BuildStats":
        size = max(p.histogram.size for p in parts)
        hist = np.zeros(size, dtype=np.int64)
        for p in parts:
            hist[: p.histogram.size] += p.histogram
        # shards share geometry, so the mean of per-shard loads is the
        # global occupied / total slots
        return cls(
            histogram=hist,
            inserts=sum(p.inserts for p in parts),
            duplicates=sum(p.duplicates for p in parts),
            failures=sum(p.failures for p in parts),
            final_load=sum(p.final_load for p in parts) / len(parts),
        )


class CuckooShard:
    """One subfilter: a bit-packed table plus its walk RNG and stash."""

    def __init__(
        self,
        geometry: LayoutGeometry,
        hashes: HashFamily,
        max_walk: int = 10_000,
        walk_seed: int = 1,
        index: int = 0,
    ):
        if max_walk < 0:
            raise ValueError("max_walk must be >= 0")
        self.geometry = geometry
        self.hashes = hashes
        self.max_walk = max_walk
        self.index = index
        self.table = SlotTable(geometry.q, geometry.slots_per_subfilter)
        self.params = kernels.pack_params(geometry, hashes, max_walk)
        self.stash = np.zeros(4, dtype=np.uint64)
        self.hist = np.zeros(max_walk + 1, dtype=np.int64)
        self.counters = np.zeros(3, dtype=np.int64)
        self.rng = np.array([walk_seed], dtype=np.uint64)

    # ------------------------------------------------------------- mutation

    def insert_many(
        self, keys: np.ndarray, *, if_absent: bool = True, stop_on_fail: bool = False
    ) -> int:
        """Insert a uint64 key array; returns the number of keys consumed.

        Consumed < len(keys) only with `stop_on_fail`, where the batch stops
        right after the first exhausted walk.  Raises FilterFullError when a
        walk exhausts while the stash is already occupied.
        """
        ret = kernels.insert_batch(
            self.table.words,
            self.table._occ,
            self.params,
            self.stash,
            self.hist,
            self.counters,
            self.rng,
            keys,
            if_absent,
            stop_on_fail,
        )
        if ret < 0:
            raise FilterFullError(
                f"shard {self.index}: walk limit {self.max_walk} hit with stash occupied "
                f"at load {self.load:.4f}"
            )
        return int(ret)

    def insert(self, key: int) -> InsertStatus:
        """Raw insert of one key (duplicates are admitted)."""
        return self._insert_one(key, if_absent=False)

    def insert_if_absent(self, key: int) -> InsertStatus:
        """Insert only if the key is not already reported present."""
        return self._insert_one(key, if_absent=True)

    def _insert_one(self, key: int, if_absent: bool) -> InsertStatus:
        before = self.counters.copy()
        self.insert_many(np.array([key], dtype=np.uint64), if_absent=if_absent)
        if self.counters[kernels.C_DUP] > before[kernels.C_DUP]:
            return InsertStatus.PRESENT
        if self.counters[kernels.C_FAILED] > before[kernels.C_FAILED]:
            return InsertStatus.FAILED
        return InsertStatus.STORED

    def delete(self, key: int) -> bool:
        """Remove one stored copy of the key; first-choice group first.

        Only keys that were actually inserted may be deleted; deleting
        other keys can evict a colliding fingerprint of another key.
        """
        geom, hashes = self.geometry, self.hashes
        fp = hashes.fingerprint(key)
        loc = primary_location(hashes, key)
        if geom.variant == VARIANT_XOR:
            candidates = [
                (loc.group, 0),
                (xor_alternative(geom, hashes, loc.group, fp), 0),
            ]
        else:
            alt = alternative_location(geom, hashes, loc, fp)
            candidates = [(loc.group, 0), (alt.group, 1)]
        for group, choice in candidates:
            start = self.geometry.slots_of(group).start
            lane = scalar_find_match(self.table, start, geom.l, geom, fp, choice)
            if lane is not None:
                self.table.write_slot(start + lane, 0)
                return True
        if self._stash_matches(fp, candidates):
            self.stash[kernels.STASH_FLAG] = 0
            return True
        return False

    def _stash_matches(self, fp: int, candidates: list[tuple[int, int]]) -> bool:
        if not self.stash[kernels.STASH_FLAG]:
            return False
        if int(self.stash[kernels.STASH_FP]) != fp:
            return False
        group = int(self.stash[kernels.STASH_GROUP])
        choice = int(self.stash[kernels.STASH_CHOICE])
        if self.geometry.variant == VARIANT_XOR:
            return group in (candidates[0][0], candidates[1][0])
        return (group, choice) in candidates

    # -------------------------------------------------------------- queries

    def contains(self, key: int) -> bool:
        out = np.empty(1, dtype=np.uint8)
        kernels.contains_batch(
            self.table.words, self.params, self.stash, np.array([key], dtype=np.uint64), out
        )
        return bool(out[0])

    def contains_many(self, keys: np.ndarray) -> np.ndarray:
        out = np.empty(keys.shape[0], dtype=np.uint8)
        kernels.contains_batch(self.table.words, self.params, self.stash, keys, out)
        return out.view(np.bool_)

    def count_hits(self, keys: np.ndarray) -> int:
        return int(kernels.count_hits(self.table.words, self.params, self.stash, keys))

    # ------------------------------------------------------------ accessors

    @property
    def occupied(self) -> int:
        return self.table.occupied

    @property
    def load(self) -> float:
        return self.table.occupied / self.geometry.slots_per_subfilter

    @property
    def failed(self) -> bool:
        return int(self.counters[kernels.C_FAILED]) > 0

    def build_stats(self) -> BuildStats:
        return BuildStats(
            histogram=self.hist.copy(),
            inserts=int(self.counters[kernels.C_STORED]),
            duplicates=int(self.counters[kernels.C_DUP]),
            failures=int(self.counters[kernels.C_FAILED]),
            final_load=self.load,
        )

    def scan_entries(self) -> list[tuple[int, int, int, int]]:
        """Full decode of every nonzero slot: (slot, fp, choice, lane)."""
        out = []
        for i in range(self.geometry.slots_per_subfilter):
            v = self.table.read_slot(i)
            if v:
                fp, choice, lane = decode_slot(self.geometry, v)
                out.append((i, fp, choice, lane))
        return out

    def check_integrity(self) -> None:
        """Verify stored bits are self-consistent (test/debug helper).

        Every nonzero slot must decode to a nonzero fingerprint whose
        recomputed group (from the slot index and the stored lane bits)
        is a valid group index, and whose other group is reachable by the
        stored choice bit.  The occupancy counter must match a full scan.
        """
        geom = self.geometry
        n = 0
        for slot, fp, choice, lane in self.scan_entries():
            n += 1
            assert fp != 0
            group = geom.group_of_slot(slot, lane)
            assert 0 <= group < geom.groups_per_subfilter, (slot, lane, group)
            if geom.variant != VARIANT_XOR:
                other = alternative_location(geom, self.hashes, Location(group, choice), fp)
                assert 0 <= other.group < geom.groups_per_subfilter
                back = alternative_location(geom, self.hashes, other, fp)
                assert back == Location(group, choice)
        assert n == self.table.occupied, (n, self.table.occupied)
