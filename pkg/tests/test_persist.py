import numpy as np
import pytest

from wincuckoo.concurrent import ShardedFilter
from wincuckoo.filter import InsertStatus
from wincuckoo.layout import FilterConfig
from wincuckoo.persist import (
    FormatError,
    load_filter,
    read_file_summary,
    save_filter,
)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def build(variant="windowed", l=2, k=10, n=20_000, subfilters=1, seed=5):
    cfg = FilterConfig(variant=variant, l=l, k=k, capacity=n, subfilters=subfilters, seed=seed)
    filt = ShardedFilter.from_config(cfg)
    keys = _rng(seed).integers(0, 1 << 63, size=n, dtype=np.uint64)
    filt.build(keys)
    return filt, keys


class TestRoundTrip:
    @pytest.mark.parametrize("variant,l,subfilters", [
        ("windowed", 2, 1),
        ("windowed", 4, 2),
        ("bucketed", 4, 1),
        ("xor", 4, 3),
    ])
    def test_bit_identical_tables(self, tmp_path, variant, l, subfilters):
        filt, keys = build(variant=variant, l=l, subfilters=subfilters)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, filt.seed)
        shards, seed = load_filter(path)
        assert seed == filt.seed
        assert len(shards) == subfilters
        for a, b in zip(filt.shards, shards):
            assert np.array_equal(a.table.words, b.table.words)
            assert a.occupied == b.occupied
            assert np.array_equal(a.stash, b.stash)
            assert a.geometry == b.geometry

    def test_query_equivalent_after_reload(self, tmp_path):
        filt, keys = build(subfilters=2)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, filt.seed)
        shards, seed = load_filter(path)
        restored = ShardedFilter.from_shards(shards, seed=seed)
        misses = _rng(99).integers(0, 1 << 63, size=20_000, dtype=np.uint64) | np.uint64(1 << 63)
        assert np.array_equal(filt.contains_many(keys), restored.contains_many(keys))
        assert np.array_equal(filt.contains_many(misses), restored.contains_many(misses))

    def test_stash_survives_reload(self, tmp_path):
        cfg = FilterConfig(variant="windowed", l=2, k=10, capacity=300, max_walk=40, seed=8)
        filt = ShardedFilter.from_config(cfg)
        gen = _rng(3)
        accepted = []
        while True:
            x = int(gen.integers(0, 1 << 62))
            accepted.append(x)
            if filt.insert(x) is InsertStatus.FAILED:
                break
        assert filt.shards[0].stash[0] == 1
        path = tmp_path / "s.wckf"
        save_filter(path, filt.shards, filt.seed)
        shards, seed = load_filter(path)
        restored = ShardedFilter.from_shards(shards, seed=seed)
        for x in accepted:
            assert restored.contains(x)


class TestFormatErrors:
    def test_bad_magic(self, tmp_path):
        filt, _ = build(n=5_000)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, 0)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(blob)
        with pytest.raises(FormatError, match="magic"):
            load_filter(path)

    def test_truncated_payload(self, tmp_path):
        filt, _ = build(n=5_000)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, 0)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 64])
        with pytest.raises(FormatError, match="truncated"):
            load_filter(path)

    def test_inconsistent_word_count(self, tmp_path):
        filt, _ = build(n=5_000)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, 0)
        blob = bytearray(path.read_bytes())
        # shard header sits right after the file header + offsets table;
        # corrupt the slot-count field (first u64 after the 6 u32/magic)
        shard_off = int.from_bytes(blob[12:20], "little")
        s_field = shard_off + 4 + 4 + 4 * 4
        blob[s_field : s_field + 8] = (123456789).to_bytes(8, "little")
        path.write_bytes(blob)
        with pytest.raises(FormatError):
            load_filter(path)

    def test_bad_version(self, tmp_path):
        filt, _ = build(n=5_000)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, 0)
        blob = bytearray(path.read_bytes())
        blob[4:8] = (99).to_bytes(4, "little")
        path.write_bytes(blob)
        with pytest.raises(FormatError, match="version"):
            load_filter(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_filter(tmp_path / "absent.wckf")


class TestSummary:
    def test_header_fields(self, tmp_path):
        filt, _ = build(variant="bucketed", l=4, k=12, n=5_000, subfilters=2, seed=21)
        path = tmp_path / "f.wckf"
        save_filter(path, filt.shards, 21)
        info = read_file_summary(path)
        assert info["shards"] == 2
        d = info["detail"][0]
        assert d["variant"] == "bucketed"
        assert d["l"] == 4 and d["k"] == 12 and d["q"] == 15
        assert d["seed"] == 21
        assert len(d["multipliers"]) == 4
        assert sum(x["occupied"] for x in info["detail"]) == filt.occupied
