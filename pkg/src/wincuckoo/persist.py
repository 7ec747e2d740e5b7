"""Filter file format: byte-exact save and load.

Layout (all fields little-endian, fixed width):

* file header: magic ``WCKF``, format version (u32), shard count (u32),
  then one u64 absolute byte offset per shard.
* per shard: magic ``WCKF``, version u32, variant u32, l u32, k u32,
  q u32, s u64, L u64, F u64, shard ordinal u64, seed u64, the four hash
  multipliers (u64 each), occupancy u64, stash (4 x u64), word count u64,
  then the packed word array (bit 0 of word 0 = bit 0 of slot 0).

The multipliers are stored so a reloaded filter answers queries
identically regardless of how the hash family was originally derived.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .filter import CuckooShard
from .hashing import HashFamily
from .layout import VARIANT_CODES, LayoutGeometry, slot_width
from .table import words_for

MAGIC = b"WCKF"
FORMAT_VERSION = 1

_FILE_HEADER = struct.Struct("<4sII")
_SHARD_HEADER = struct.Struct("<4sIIIII QQQQ Q QQQQ Q QQQQ Q")
# fields:      magic ver variant l k q | s L F ordinal | seed | a_sub a_loc
#              a_fp a_off | occupied | stash[4] | nwords


class FormatError(ValueError):
    """Corrupt, truncated or inconsistent filter file."""


def _read_exact(f: BinaryIO, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file: wanted {n} bytes, got {len(data)}")
    return data


def write_shard(f: BinaryIO, shard: CuckooShard, seed: int) -> None:
    geom = shard.geometry
    h = shard.hashes
    header = _SHARD_HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        VARIANT_CODES[geom.variant],
        geom.l,
        geom.k,
        geom.q,
        geom.slots_per_subfilter,
        geom.groups_per_subfilter,
        geom.subfilters,
        shard.index,
        seed,
        h.a_sub,
        h.a_loc,
        h.a_fp,
        h.a_off,
        shard.occupied,
        int(shard.stash[0]),
        int(shard.stash[1]),
        int(shard.stash[2]),
        int(shard.stash[3]),
        shard.table.words.size,
    )
    f.write(header)
    f.write(shard.table.words.tobytes())


def read_shard(f: BinaryIO, max_walk: int = 10_000) -> tuple[CuckooShard, int]:
    """Read one shard; returns (shard, seed recorded at save time)."""
    raw = _read_exact(f, _SHARD_HEADER.size)
    (
        magic,
        version,
        variant_code,
        l,
        k,
        q,
        s,
        groups,
        subfilters,
        ordinal,
        seed,
        a_sub,
        a_loc,
        a_fp,
        a_off,
        occupied,
        st0,
        st1,
        st2,
        st3,
        nwords,
    ) = _SHARD_HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad shard magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    variants = {v: name for name, v in VARIANT_CODES.items()}
    if variant_code not in variants:
        raise FormatError(f"unknown variant code {variant_code}")
    variant = variants[variant_code]
    try:
        expect_q, fp_bits = slot_width(variant, l, k)
        geom = LayoutGeometry(
            variant=variant,
            l=l,
            k=k,
            q=q,
            fp_bits=fp_bits,
            slots_per_subfilter=s,
            groups_per_subfilter=groups,
            subfilters=subfilters,
        )
    except ValueError as exc:
        raise FormatError(f"inconsistent header geometry: {exc}") from exc
    if q != expect_q:
        raise FormatError(f"slot width {q} inconsistent with variant/l/k")
    if nwords != words_for(s, q):
        raise FormatError(f"word count {nwords} inconsistent with {s} slots of {q} bits")
    hashes = HashFamily(
        key_bits=64,
        a_sub=a_sub,
        a_loc=a_loc,
        a_fp=a_fp,
        a_off=a_off,
        range_sub=subfilters,
        range_loc=groups,
        fp_bits=fp_bits,
    )
    shard = CuckooShard(geom, hashes, max_walk=max_walk, index=ordinal)
    payload = _read_exact(f, nwords * 8)
    shard.table.words = np.frombuffer(payload, dtype="<u8").astype(np.uint64, copy=True)
    shard.table.occupied = occupied
    shard.stash[:] = (st0, st1, st2, st3)
    return shard, seed


def save_filter(path, shards: list[CuckooShard], seed: int) -> None:
    """Write all shards of one filter behind a table-of-offsets header."""
    with open(path, "wb") as f:
        f.write(_FILE_HEADER.pack(MAGIC, FORMAT_VERSION, len(shards)))
        offsets_at = f.tell()
        f.write(b"\x00" * 8 * len(shards))
        offsets = []
        for shard in shards:
            offsets.append(f.tell())
            write_shard(f, shard, seed)
        f.seek(offsets_at)
        f.write(struct.pack(f"<{len(offsets)}Q", *offsets))


def load_filter(path, max_walk: int = 10_000) -> tuple[list[CuckooShard], int]:
    """Read back every shard; returns (shards, seed)."""
    with open(path, "rb") as f:
        magic, version, count = _FILE_HEADER.unpack(_read_exact(f, _FILE_HEADER.size))
        if magic != MAGIC:
            raise FormatError(f"bad file magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version}")
        if count < 1:
            raise FormatError("filter file holds no shards")
        offsets = struct.unpack(f"<{count}Q", _read_exact(f, 8 * count))
        shards = []
        seed = 0
        for i, off in enumerate(offsets):
            f.seek(off)
            shard, seed = read_shard(f, max_walk=max_walk)
            if shard.index != i:
                raise FormatError(f"shard {i} carries ordinal {shard.index}")
            shards.append(shard)
        if len({s.geometry for s in shards}) != 1:
            raise FormatError("shards disagree on geometry")
    return shards, seed


def read_file_summary(path) -> dict:
    """Header-only inspection of a filter file (no payload decode)."""
    with open(path, "rb") as f:
        magic, version, count = _FILE_HEADER.unpack(_read_exact(f, _FILE_HEADER.size))
        if magic != MAGIC:
            raise FormatError(f"bad file magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version}")
        offsets = struct.unpack(f"<{count}Q", _read_exact(f, 8 * count))
        shards = []
        for off in offsets:
            f.seek(off)
            raw = _read_exact(f, _SHARD_HEADER.size)
            fields = _SHARD_HEADER.unpack(raw)
            variants = {v: name for name, v in VARIANT_CODES.items()}
            shards.append(
                {
                    "variant": variants.get(fields[2], f"unknown({fields[2]})"),
                    "l": fields[3],
                    "k": fields[4],
                    "q": fields[5],
                    "slots": fields[6],
                    "groups": fields[7],
                    "subfilters": fields[8],
                    "ordinal": fields[9],
                    "seed": fields[10],
                    "multipliers": [hex(m) for m in fields[11:15]],
                    "occupied": fields[15],
                    "stash_occupied": bool(fields[16]),
                    "words": fields[20],
                }
            )
    return {"version": version, "shards": len(shards), "detail": shards}
