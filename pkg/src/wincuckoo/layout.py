"""Filter geometry: layout variants, sizing, slot encoding, group addressing.

Three layouts are supported:

* ``xor`` — the classic baseline: disjoint buckets of 4 slots, the
  alternative bucket obtained by XORing a fingerprint hash onto the
  bucket index, which forces a power-of-two bucket count.
* ``bucketed`` — disjoint buckets, alternative bucket reached by adding
  (choice bit 0) or subtracting (choice bit 1) a nonzero fingerprint
  offset modulo the bucket count.  No power-of-two restriction.
* ``windowed`` — overlapping windows of ``l`` consecutive slots; a table
  with ``s`` slots has ``s - l + 1`` windows.  Same signed-offset
  addressing as ``bucketed``, plus per-slot window-offset bits so a
  stored fingerprint remembers which window it belongs to.

Per-slot bit layout, most to least significant: choice bit, window-offset
bits (windowed only), fingerprint.  The window-offset bits of the slot at
window position ``p`` hold ``l - 1 - p``, i.e. they count down along the
window; probe patterns for a whole group are precomputed per choice bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .hashing import HashFamily

VARIANT_XOR = "xor"
VARIANT_BUCKETED = "bucketed"
VARIANT_WINDOWED = "windowed"
VARIANTS = (VARIANT_XOR, VARIANT_BUCKETED, VARIANT_WINDOWED)

VARIANT_CODES = {VARIANT_XOR: 0, VARIANT_BUCKETED: 1, VARIANT_WINDOWED: 2}

# Rounded theoretical load thresholds for 2-ary cuckoo hashing with
# group size l = 1..4 (Walzer's constants).
BUCKET_THRESHOLDS = (0.5, 0.8970, 0.9591, 0.9803)
WINDOW_THRESHOLDS = (0.5, 0.9649, 0.9944, 0.9989)

MIN_K = 3
MAX_K = 30
MAX_Q = 32


class ConfigError(ValueError):
    """Invalid filter configuration."""


def load_threshold(variant: str, l: int) -> float:
    if not 1 <= l <= 4:
        raise ConfigError(f"group size {l} outside [1, 4]")
    if variant == VARIANT_WINDOWED:
        return WINDOW_THRESHOLDS[l - 1]
    return BUCKET_THRESHOLDS[l - 1]


def _check_variant(variant: str, l: int, k: int) -> None:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    if l not in (2, 4):
        raise ConfigError(f"group size must be 2 or 4, got {l}")
    if variant == VARIANT_XOR and l != 4:
        raise ConfigError("the xor layout uses buckets of 4 slots")
    if not MIN_K <= k <= MAX_K:
        raise ConfigError(f"k={k} outside [{MIN_K}, {MAX_K}]")


def slot_width(variant: str, l: int, k: int) -> tuple[int, int]:
    """(q, fp_bits) for a variant: q is the packed slot width in bits."""
    _check_variant(variant, l, k)
    lg = l.bit_length() - 1
    if variant == VARIANT_WINDOWED:
        q, fp_bits = k + 1 + lg, k
    elif variant == VARIANT_BUCKETED:
        q, fp_bits = k + 1 + lg, k + lg
    else:
        q = fp_bits = k + 3
    if q > MAX_Q:
        raise ConfigError(f"slot width {q} exceeds {MAX_Q} bits (k too large)")
    return q, fp_bits


class Location(NamedTuple):
    """One candidate group of l slots: (group index, choice bit)."""

    group: int
    choice: int


@dataclass(frozen=True)
class LayoutGeometry:
    """All derived geometry of one filter configuration."""

    variant: str
    l: int
    k: int
    q: int
    fp_bits: int
    slots_per_subfilter: int
    groups_per_subfilter: int
    subfilters: int

    def __post_init__(self) -> None:
        _check_variant(self.variant, self.l, self.k)
        if self.groups_per_subfilter < 2:
            raise ConfigError("need at least 2 groups per subfilter")
        if self.variant == VARIANT_WINDOWED:
            expect = self.slots_per_subfilter - self.l + 1
        else:
            expect = self.slots_per_subfilter // self.l
        if expect != self.groups_per_subfilter:
            raise ConfigError(
                f"group count {self.groups_per_subfilter} inconsistent with "
                f"{self.slots_per_subfilter} slots"
            )
        if self.variant == VARIANT_XOR and (
            self.groups_per_subfilter & (self.groups_per_subfilter - 1)
        ):
            raise ConfigError("xor layout needs a power-of-two bucket count")

    @property
    def total_slots(self) -> int:
        return self.slots_per_subfilter * self.subfilters

    @property
    def bit_parallel(self) -> bool:
        """Whole group fits one 64-bit register; otherwise probes go scalar."""
        return self.l * self.q <= 64

    def slots_of(self, group: int) -> range:
        """Slot index range of a group within its subfilter."""
        if self.variant == VARIANT_WINDOWED:
            return range(group, group + self.l)
        return range(group * self.l, group * self.l + self.l)

    def group_of_slot(self, slot: int, lane: int) -> int:
        """Invert slots_of: the group owning `slot` at window position `lane`."""
        if self.variant == VARIANT_WINDOWED:
            return slot - lane
        return slot // self.l

    def overhead_factor(self, n_inserted: int) -> float:
        """Bits spent per key, relative to the k-bit ideal."""
        return self.total_slots * self.q / (n_inserted * self.k)


def encode_slot(geom: LayoutGeometry, fp: int, choice: int, lane: int = 0) -> int:
    """Pack (fingerprint, choice, window position) into one q-bit slot value."""
    assert fp != 0, "fingerprint 0 is the empty-slot sentinel"
    assert 0 < fp < (1 << geom.fp_bits)
    if geom.variant == VARIANT_XOR:
        return fp
    value = (choice << (geom.q - 1)) | fp
    if geom.variant == VARIANT_WINDOWED:
        assert 0 <= lane < geom.l
        value |= (geom.l - 1 - lane) << geom.fp_bits
    return value


def decode_slot(geom: LayoutGeometry, value: int) -> tuple[int, int, int]:
    """Inverse of encode_slot: (fp, choice, lane)."""
    fp = value & ((1 << geom.fp_bits) - 1)
    if geom.variant == VARIANT_XOR:
        return fp, 0, 0
    choice = value >> (geom.q - 1)
    lane = 0
    if geom.variant == VARIANT_WINDOWED:
        lane = geom.l - 1 - ((value >> geom.fp_bits) & (geom.l - 1))
    return fp, choice, lane


def primary_location(hashes: HashFamily, x: int) -> Location:
    return Location(hashes.location_of(x), 0)


def alternative_location(
    geom: LayoutGeometry, hashes: HashFamily, loc: Location, fp: int
) -> Location:
    """The other candidate group of a stored fingerprint (offset layouts).

    Choice 0 adds the fingerprint offset, choice 1 subtracts it, so the
    map is an involution and the two groups always differ.
    """
    assert geom.variant != VARIANT_XOR
    off = hashes.offset_for(fp)
    n = geom.groups_per_subfilter
    if loc.choice == 0:
        return Location((loc.group + off) % n, 1)
    return Location((loc.group - off) % n, 0)


def xor_alternative(geom: LayoutGeometry, hashes: HashFamily, bucket: int, fp: int) -> int:
    """Self-inverse alternative bucket of the XOR layout; may equal `bucket`."""
    assert geom.variant == VARIANT_XOR
    return bucket ^ hashes.xor_group_hash(fp)


def _next_pow2(n: int) -> int:
    return 1 << max(n - 1, 1).bit_length() if n > 1 else 1


def _subdivide(total_slots: int, variant: str, l: int, subfilters: int) -> tuple[int, int]:
    """Per-subfilter (slots, groups) covering at least `total_slots` slots.

    Slot counts are rounded to a multiple of l for every layout, which
    keeps windowed and bucketed tables byte-identical in size at equal
    (l, load); the windowed layout itself would accept any slot count.
    """
    groups_total = math.ceil(total_slots / l)
    groups = math.ceil(groups_total / subfilters)
    if variant == VARIANT_XOR:
        groups = _next_pow2(groups)
    slots = groups * l
    if variant == VARIANT_WINDOWED:
        groups = slots - l + 1
    if groups < 2:
        # too small to host an alternative group: grow to the minimum
        return _subdivide((l * 2) * subfilters, variant, l, subfilters)
    return slots, groups


def size_filter(
    n: int,
    load_fraction: float,
    variant: str,
    l: int,
    k: int,
    subfilters: int = 1,
) -> LayoutGeometry:
    """Geometry for `n` keys at `load_fraction` of the layout's load threshold."""
    if n < 1:
        raise ConfigError(f"capacity must be >= 1, got {n}")
    if not 0 < load_fraction <= 1:
        raise ConfigError(f"load fraction {load_fraction} outside (0, 1]")
    if subfilters < 1:
        raise ConfigError("subfilter count must be >= 1")
    q, fp_bits = slot_width(variant, l, k)
    target = load_fraction * load_threshold(variant, l)
    slots_needed = math.ceil(n / target)
    slots, groups = _subdivide(slots_needed, variant, l, subfilters)
    return LayoutGeometry(
        variant=variant,
        l=l,
        k=k,
        q=q,
        fp_bits=fp_bits,
        slots_per_subfilter=slots,
        groups_per_subfilter=groups,
        subfilters=subfilters,
    )


def size_filter_at_load(
    n: int,
    load: float,
    variant: str,
    l: int,
    k: int,
    subfilters: int = 1,
) -> LayoutGeometry:
    """Geometry for `n` keys at an absolute target load.

    The slot count depends only on (n, load, l, F), never on the layout,
    so windowed and bucketed tables sized this way are byte-identical.
    """
    if n < 1:
        raise ConfigError(f"capacity must be >= 1, got {n}")
    if not 0 < load < 1:
        raise ConfigError(f"absolute load {load} outside (0, 1)")
    q, fp_bits = slot_width(variant, l, k)
    slots, groups = _subdivide(math.ceil(n / load), variant, l, subfilters)
    return LayoutGeometry(
        variant=variant,
        l=l,
        k=k,
        q=q,
        fp_bits=fp_bits,
        slots_per_subfilter=slots,
        groups_per_subfilter=groups,
        subfilters=subfilters,
    )


def geometry_for_slots(
    total_slots: int,
    variant: str,
    l: int,
    k: int,
    subfilters: int = 1,
) -> LayoutGeometry:
    """Geometry with a given total slot count (rounded up to a valid one)."""
    if total_slots < 1:
        raise ConfigError("slot count must be >= 1")
    q, fp_bits = slot_width(variant, l, k)
    slots, groups = _subdivide(total_slots, variant, l, subfilters)
    return LayoutGeometry(
        variant=variant,
        l=l,
        k=k,
        q=q,
        fp_bits=fp_bits,
        slots_per_subfilter=slots,
        groups_per_subfilter=groups,
        subfilters=subfilters,
    )


def predicted_overhead(geom: LayoutGeometry, n: int) -> float:
    """Design-time overhead factor for a capacity of n keys."""
    return geom.total_slots * geom.q / (n * geom.k)


@dataclass(frozen=True)
class FilterConfig:
    """User-facing configuration; geometry and hashes derive from it."""

    variant: str = VARIANT_WINDOWED
    l: int = 2
    k: int = 10
    capacity: int = 1_000_000
    load_fraction: float = 0.98
    max_walk: int = 10_000
    subfilters: int = 1
    seed: int = 0

    def geometry(self) -> LayoutGeometry:
        return size_filter(
            self.capacity,
            self.load_fraction,
            self.variant,
            self.l,
            self.k,
            self.subfilters,
        )

    def hash_family(self, geom: LayoutGeometry | None = None) -> HashFamily:
        geom = geom or self.geometry()
        return HashFamily.from_seed(
            self.seed,
            subfilters=geom.subfilters,
            groups_per_subfilter=geom.groups_per_subfilter,
            fp_bits=geom.fp_bits,
        )
