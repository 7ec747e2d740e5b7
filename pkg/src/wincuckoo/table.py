"""Bit-packed slot table with scalar access and 64-bit group probes.

Slot ``i`` occupies bits ``[i*q, (i+1)*q)`` of a little-endian stream of
64-bit words; value 0 means empty.  A group of ``l`` consecutive slots can
be loaded into a single integer image (lane ``j`` in bits ``[j*q,
(j+1)*q)``) and probed for empty or matching slots without a per-slot
loop, using the usual SWAR trick::

    e = (x - lo) & ~x & hi

where ``lo``/``hi`` mark the lowest/highest bit of each lane.  The 1-bits
of ``e`` sit in the high bit of every empty (all-zero) lane, so the lowest
empty lane is ``trailing_zeros(e) // q``.  Matching works the same way on
``x ^ y`` with ``y`` the expected image.

The functions here are the plain-Python reference path; the compiled
kernels mirror the exact same bit layout and are tested against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .layout import VARIANT_WINDOWED, VARIANT_XOR, LayoutGeometry, encode_slot

MASK64 = (1 << 64) - 1
CACHE_LINE_WORDS = 8  # 64-byte alignment unit

# de Bruijn multiplication table for trailing-zero counts
_DEBRUIJN = 0x03F79D71B4CB0A89
_CTZ_TABLE = np.zeros(64, dtype=np.uint8)
for _i in range(64):
    _CTZ_TABLE[((1 << _i) * _DEBRUIJN & MASK64) >> 58] = _i


def trailing_zeros(x: int) -> int:
    """Index of the lowest set bit of a nonzero 64-bit value."""
    assert x != 0
    return int(_CTZ_TABLE[((x & -x & MASK64) * _DEBRUIJN & MASK64) >> 58])


def words_for(s: int, q: int) -> int:
    """Word count for s slots of q bits: whole cache lines plus one spare
    word, so a group load near the tail never needs a bounds branch."""
    used = (s * q + 63) // 64
    return ((used + 1 + CACHE_LINE_WORDS - 1) // CACHE_LINE_WORDS) * CACHE_LINE_WORDS


class SlotTable:
    """s slots of q bits each, zero-initialized, with an occupancy counter."""

    def __init__(self, q: int, s: int):
        if not 1 <= q <= 32:
            raise ValueError(f"slot width {q} outside [1, 32]")
        if s < 1:
            raise ValueError("need at least one slot")
        self.q = q
        self.s = s
        self.words = np.zeros(words_for(s, q), dtype=np.uint64)
        # array-backed so the compiled kernels can update it in place
        self._occ = np.zeros(1, dtype=np.int64)

    @property
    def occupied(self) -> int:
        return int(self._occ[0])

    @occupied.setter
    def occupied(self, value: int) -> None:
        self._occ[0] = value

    @property
    def nbytes(self) -> int:
        return self.words.nbytes

    def read_slot(self, i: int) -> int:
        assert 0 <= i < self.s, f"slot {i} out of range"
        q = self.q
        bit = i * q
        w, off = bit >> 6, bit & 63
        v = int(self.words[w]) >> off
        if off + q > 64:
            v |= int(self.words[w + 1]) << (64 - off)
        return v & ((1 << q) - 1)

    def write_slot(self, i: int, v: int) -> int:
        """Store v at slot i, returning the previous value."""
        assert 0 <= i < self.s, f"slot {i} out of range"
        q = self.q
        assert 0 <= v < (1 << q)
        prev = self.read_slot(i)
        bit = i * q
        w, off = bit >> 6, bit & 63
        mask = (1 << q) - 1
        self.words[w] = np.uint64(
            (int(self.words[w]) & ~(mask << off) | (v << off)) & MASK64
        )
        if off + q > 64:
            spill = q - (64 - off)
            self.words[w + 1] = np.uint64(
                int(self.words[w + 1]) & ~((1 << spill) - 1) | (v >> (64 - off))
            )
        if prev == 0 and v != 0:
            self.occupied += 1
        elif prev != 0 and v == 0:
            self.occupied -= 1
        return prev

    def load_group(self, start: int, l: int) -> int:
        """l consecutive slots as one lane image (lane j = slot start+j)."""
        q = self.q
        assert start + l <= self.s and l * q <= 64
        bit = start * q
        w, off = bit >> 6, bit & 63
        img = int(self.words[w]) >> off
        if off:
            img |= int(self.words[w + 1]) << (64 - off)
        nbits = l * q
        if nbits < 64:
            img &= (1 << nbits) - 1
        return img & MASK64

    def scan_occupied(self) -> int:
        """Full-scan recount of nonzero slots (invariant check)."""
        return sum(1 for i in range(self.s) if self.read_slot(i) != 0)


@dataclass(frozen=True)
class ProbeMasks:
    """Per-configuration constants for the bit-parallel group probes."""

    q: int
    l: int
    lo: int  # lowest bit of each lane
    hi: int  # highest bit of each lane
    pattern_bases: tuple[int, int]  # non-fingerprint bits per choice value

    def pattern(self, fp: int, choice: int) -> int:
        """Expected group image for fingerprint fp under a choice bit."""
        return self.pattern_bases[choice] | fp * self.lo


def build_probe_masks(geom: LayoutGeometry) -> ProbeMasks:
    q, l = geom.q, geom.l
    if l * q > 64:
        raise ValueError(f"group of {l} x {q}-bit slots does not fit a 64-bit image")
    lo = sum(1 << (j * q) for j in range(l))
    hi = (lo << (q - 1)) & MASK64
    bases = []
    for choice in (0, 1):
        base = 0
        if geom.variant != VARIANT_XOR:
            for j in range(l):
                lane_bits = encode_slot(geom, 1, choice, j if geom.variant == VARIANT_WINDOWED else 0) - 1
                base |= lane_bits << (j * q)
        bases.append(base)
    return ProbeMasks(q=q, l=l, lo=lo, hi=hi, pattern_bases=(bases[0], bases[1]))


def find_empty_lane(image: int, masks: ProbeMasks) -> Optional[int]:
    """Lowest all-zero lane of a group image, or None."""
    e = (image - masks.lo) & ~image & masks.hi & MASK64
    if e == 0:
        return None
    return trailing_zeros(e) // masks.q


def find_match_lane(image: int, pattern: int, masks: ProbeMasks) -> Optional[int]:
    """Lowest lane where the image equals the expected pattern, or None.

    Empty slots can never match: a valid pattern lane contains a nonzero
    fingerprint, so XOR against a zero lane stays nonzero.
    """
    return find_empty_lane(image ^ pattern, masks)


def scalar_probe(
    table: SlotTable, start: int, l: int, predicate: Callable[[int, int], bool]
) -> Optional[int]:
    """Reference probe: scan lanes in ascending order, first hit wins.

    Used directly when l*q > 64 and as the oracle for the bit-parallel
    path everywhere else.
    """
    for j in range(l):
        if predicate(table.read_slot(start + j), j):
            return j
    return None


def scalar_find_empty(table: SlotTable, start: int, l: int) -> Optional[int]:
    return scalar_probe(table, start, l, lambda v, _: v == 0)


def scalar_find_match(
    table: SlotTable, start: int, l: int, geom: LayoutGeometry, fp: int, choice: int
) -> Optional[int]:
    def pred(v: int, lane: int) -> bool:
        want = encode_slot(geom, fp, choice, lane if geom.variant == VARIANT_WINDOWED else 0)
        return v == want

    return scalar_probe(table, start, l, pred)
