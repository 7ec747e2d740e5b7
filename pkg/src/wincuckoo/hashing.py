"""Seeded linear hash family: subfilter index, group index, fingerprint, offset.

All hashes have the shape ``x -> ((a * x) mod 2**64) reduced into [0, b)``
with an odd 64-bit multiplier ``a``.  The reduction depends on the range:

* ``b`` a power of two: keep the top ``log2(b)`` bits of the product,
  counted within the ``u``-bit input domain.
* ``b`` even but not a power of two: XOR-fold the product halves first,
  then take the remainder.
* ``b`` odd: plain remainder (``a`` odd makes it coprime with ``2**64``).

The branch and shift for each role are resolved once at construction, so
the per-key path is branch-free on configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# reduction branch codes, shared with the compiled kernels
BRANCH_CONST0 = 0  # b == 1: every input maps to 0
BRANCH_POW2 = 1  # shift product right, mask with b - 1
BRANCH_EVEN = 2  # XOR-fold halves, then mod b
BRANCH_ODD = 3  # plain mod b


def splitmix64(state: int) -> tuple[int, int]:
    """One step of a splitmix-style generator: (new_state, output)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def derive_streams(seed: int, count: int) -> list[int]:
    """Derive `count` independent 64-bit values from one seed."""
    state = seed & MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64(state)
        out.append(z)
    return out


def resolve_branch(b: int, u: int) -> tuple[int, int]:
    """Pick the reduction branch and shift for range `b` over `u`-bit inputs.

    Returns (branch_code, shift).  For the power-of-two branch the shift is
    ``u - log2(b)``; if the range is wider than the input domain the full
    64-bit product is used instead (the top bits of ``a*x`` are well mixed
    for any odd ``a``).
    """
    if b < 1:
        raise ValueError(f"hash range must be >= 1, got {b}")
    if u < 1 or u > 64:
        raise ValueError(f"input width must be in [1, 64], got {u}")
    if b == 1:
        return BRANCH_CONST0, 0
    if b & (b - 1) == 0:
        lb = b.bit_length() - 1
        shift = u - lb
        if shift < 0:
            shift = 64 - lb
        return BRANCH_POW2, shift
    if b % 2 == 0:
        return BRANCH_EVEN, u // 2
    return BRANCH_ODD, 0


def linear_hash(x: int, a: int, b: int, u: int = 64) -> int:
    """Multiply-and-reduce hash of a `u`-bit key into [0, b)."""
    if a % 2 == 0:
        raise ValueError("multiplier must be odd")
    branch, shift = resolve_branch(b, u)
    return apply_hash(x, a, b, branch, shift)


def apply_hash(x: int, a: int, b: int, branch: int, shift: int) -> int:
    """Reduction with a pre-resolved branch; mirror of the compiled path."""
    if branch == BRANCH_CONST0:
        return 0
    p = (a * x) & MASK64
    if branch == BRANCH_POW2:
        return (p >> shift) & (b - 1)
    if branch == BRANCH_EVEN:
        p ^= p >> shift
    return p % b


@dataclass(frozen=True)
class HashFamily:
    """The four hash roles of one filter, derived from a single seed.

    ``range_loc`` is the number of groups (buckets or windows) per
    subfilter; the offset role maps fingerprints into [1, range_loc - 1]
    so the alternative group always differs from the first.  The XOR
    layout instead hashes fingerprints into the full (power-of-two) group
    range, where a zero hash legitimately maps a key onto a single group.
    """

    key_bits: int
    a_sub: int
    a_loc: int
    a_fp: int
    a_off: int
    range_sub: int
    range_loc: int
    fp_bits: int

    def __post_init__(self) -> None:
        for a in (self.a_sub, self.a_loc, self.a_fp, self.a_off):
            if a % 2 == 0:
                raise ValueError("multipliers must be odd")
        if not 1 <= self.key_bits <= 64:
            raise ValueError(f"key width {self.key_bits} outside [1, 64]")
        if self.range_sub < 1:
            raise ValueError("subfilter count must be >= 1")
        if self.range_loc < 2:
            raise ValueError("need at least 2 groups per subfilter")
        if not 1 <= self.fp_bits <= 32:
            raise ValueError(f"fingerprint width {self.fp_bits} outside [1, 32]")

    @classmethod
    def from_seed(
        cls,
        seed: int,
        *,
        subfilters: int,
        groups_per_subfilter: int,
        fp_bits: int,
        key_bits: int = 64,
    ) -> "HashFamily":
        a_sub, a_loc, a_fp, a_off = (z | 1 for z in derive_streams(seed, 4))
        return cls(
            key_bits=key_bits,
            a_sub=a_sub,
            a_loc=a_loc,
            a_fp=a_fp,
            a_off=a_off,
            range_sub=subfilters,
            range_loc=groups_per_subfilter,
            fp_bits=fp_bits,
        )

    @property
    def range_fp(self) -> int:
        return (1 << self.fp_bits) - 1

    @property
    def range_off(self) -> int:
        return self.range_loc - 1

    def subfilter_of(self, x: int) -> int:
        return linear_hash(x, self.a_sub, self.range_sub, self.key_bits)

    def location_of(self, x: int) -> int:
        """First group index of a key within its subfilter."""
        return linear_hash(x, self.a_loc, self.range_loc, self.key_bits)

    def fingerprint(self, x: int) -> int:
        """Nonzero fingerprint in [1, 2**fp_bits - 1]; zero marks empty slots."""
        return linear_hash(x, self.a_fp, self.range_fp, self.key_bits) + 1

    def offset_for(self, fp: int) -> int:
        """Nonzero group offset in [1, range_loc - 1] for the offset layouts."""
        return 1 + linear_hash(fp, self.a_off, self.range_off, self.fp_bits)

    def xor_group_hash(self, fp: int) -> int:
        """Fingerprint hash into the full group range for the XOR layout."""
        return linear_hash(fp, self.a_off, self.range_loc, self.fp_bits)
