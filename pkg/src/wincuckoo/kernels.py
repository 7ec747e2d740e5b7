"""Compiled hot paths: hashing, packed-slot access, probes, insert walk.

One parametric kernel set serves every configuration; geometry, hash
multipliers and the precomputed probe masks arrive in a flat ``uint64``
parameter vector built once per filter (see :func:`pack_params`).  All
kernels release the GIL so shard consumers can run concurrently, and are
cached on disk so the compile cost is paid once per machine.

Integer discipline: numba promotes ``uint64 <op> <python int literal>``
to ``int64`` (which wraps negative), so every literal below is a
module-level ``np.uint64`` constant.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------- constants

U0 = np.uint64(0)
U1 = np.uint64(1)
U2 = np.uint64(2)
U6 = np.uint64(6)
U58 = np.uint64(58)
U63 = np.uint64(63)
U64 = np.uint64(64)

DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_CTZ_TABLE = np.zeros(64, dtype=np.uint64)
for _i in range(64):
    _CTZ_TABLE[((1 << _i) * 0x03F79D71B4CB0A89 % (1 << 64)) >> 58] = _i

SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
SPLITMIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
SPLITMIX_M2 = np.uint64(0x94D049BB133111EB)

# variant codes (match layout.VARIANT_CODES)
V_XOR = np.uint64(0)
V_BUCKETED = np.uint64(1)
V_WINDOWED = np.uint64(2)

# hash reduction branches (match hashing.BRANCH_*)
BR_CONST0 = np.uint64(0)
BR_POW2 = np.uint64(1)
BR_EVEN = np.uint64(2)
BR_ODD = np.uint64(3)

# parameter vector layout
P_VARIANT = 0
P_L = 1
P_Q = 2
P_FP_BITS = 3
P_NGROUPS = 4
P_NSLOTS = 5
P_MAX_WALK = 6
P_BITPAR = 7
P_LO = 8
P_HI = 9
P_PAT0 = 10
P_PAT1 = 11
P_GROUP_MASK = 12
P_LOC_A = 13
P_LOC_B = 14
P_LOC_BR = 15
P_LOC_SH = 16
P_FP_A = 17
P_FP_B = 18
P_FP_BR = 19
P_FP_SH = 20
P_OFF_A = 21
P_OFF_B = 22
P_OFF_BR = 23
P_OFF_SH = 24
P_SUB_A = 25
P_SUB_B = 26
P_SUB_BR = 27
P_SUB_SH = 28
N_PARAMS = 29

# stash slots: [occupied flag, fingerprint, choice bit, group index]
STASH_FLAG = 0
STASH_FP = 1
STASH_CHOICE = 2
STASH_GROUP = 3

# counters: [stored, duplicates, failures]
C_STORED = 0
C_DUP = 1
C_FAILED = 2

# insert_batch return sentinel offsets
HARD_FAIL = -1


def pack_params(geom, hashes, max_walk: int) -> np.ndarray:
    """Flatten geometry + hash family + probe masks into a uint64 vector."""
    from .hashing import resolve_branch
    from .layout import VARIANT_CODES, VARIANT_XOR
    from .table import build_probe_masks

    p = np.zeros(N_PARAMS, dtype=np.uint64)
    p[P_VARIANT] = VARIANT_CODES[geom.variant]
    p[P_L] = geom.l
    p[P_Q] = geom.q
    p[P_FP_BITS] = geom.fp_bits
    p[P_NGROUPS] = geom.groups_per_subfilter
    p[P_NSLOTS] = geom.slots_per_subfilter
    p[P_MAX_WALK] = max_walk
    p[P_BITPAR] = 1 if geom.bit_parallel else 0
    if geom.bit_parallel:
        masks = build_probe_masks(geom)
        p[P_LO] = masks.lo
        p[P_HI] = masks.hi
        p[P_PAT0] = masks.pattern_bases[0]
        p[P_PAT1] = masks.pattern_bases[1]
        nbits = geom.l * geom.q
        p[P_GROUP_MASK] = (1 << nbits) - 1 if nbits < 64 else (1 << 64) - 1

    def put(base, a, b, u):
        br, sh = resolve_branch(b, u)
        p[base] = a
        p[base + 1] = b
        p[base + 2] = br
        p[base + 3] = sh

    put(P_LOC_A, hashes.a_loc, hashes.range_loc, hashes.key_bits)
    put(P_FP_A, hashes.a_fp, hashes.range_fp, hashes.key_bits)
    if geom.variant == VARIANT_XOR:
        put(P_OFF_A, hashes.a_off, hashes.range_loc, hashes.fp_bits)
    else:
        put(P_OFF_A, hashes.a_off, hashes.range_off, hashes.fp_bits)
    put(P_SUB_A, hashes.a_sub, hashes.range_sub, hashes.key_bits)
    return p


# ---------------------------------------------------------------- primitives


@njit(cache=True, nogil=True, inline="always")
def _ctz(x):
    """Trailing zeros of a nonzero uint64 (de Bruijn multiplication)."""
    lsb = x & (U0 - x)
    return _CTZ_TABLE[(lsb * DEBRUIJN) >> U58]


@njit(cache=True, nogil=True, inline="always")
def _splitmix(state):
    """Advance the walk PRNG state array in place; returns a uint64."""
    state[0] += SPLITMIX_GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * SPLITMIX_M1
    z = (z ^ (z >> np.uint64(27))) * SPLITMIX_M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _hash(x, a, b, br, sh):
    """Multiply-and-reduce with a pre-resolved reduction branch."""
    if br == BR_CONST0:
        return U0
    prod = x * a
    if br == BR_POW2:
        return (prod >> sh) & (b - U1)
    if br == BR_EVEN:
        prod = prod ^ (prod >> sh)
    return prod % b


@njit(cache=True, nogil=True, inline="always")
def _read_slot(words, q, i):
    bit = i * q
    w = bit >> U6
    off = bit & U63
    v = words[w] >> off
    if off + q > U64:
        v |= words[w + U1] << (U64 - off)
    return v & ((U1 << q) - U1)


@njit(cache=True, nogil=True, inline="always")
def _write_slot(words, q, i, v):
    bit = i * q
    w = bit >> U6
    off = bit & U63
    mask = (U1 << q) - U1
    words[w] = (words[w] & ~(mask << off)) | (v << off)
    if off + q > U64:
        spill = q - (U64 - off)
        words[w + U1] = (words[w + U1] & ~((U1 << spill) - U1)) | (v >> (U64 - off))


@njit(cache=True, nogil=True, inline="always")
def _load_group(words, q, start, group_mask):
    bit = start * q
    w = bit >> U6
    off = bit & U63
    img = words[w] >> off
    if off != U0:
        img |= words[w + U1] << (U64 - off)
    return img & group_mask


@njit(cache=True, nogil=True, inline="always")
def _group_start(variant, l, group):
    if variant == V_WINDOWED:
        return group
    return group * l


@njit(cache=True, nogil=True, inline="always")
def _encode(variant, q, fp_bits, l, fp, choice, lane):
    if variant == V_XOR:
        return fp
    v = (choice << (q - U1)) | fp
    if variant == V_WINDOWED:
        v |= (l - U1 - lane) << fp_bits
    return v


@njit(cache=True, nogil=True, inline="always")
def _decode_lane(variant, fp_bits, l, value):
    """Window position of a stored value (0 for the bucket layouts)."""
    if variant == V_WINDOWED:
        return l - U1 - ((value >> fp_bits) & (l - U1))
    return U0


@njit(cache=True, nogil=True, inline="always")
def _alt_group(params, group, choice, fp):
    """The other candidate group of a fingerprint stored under `choice`."""
    h = _hash(fp, params[P_OFF_A], params[P_OFF_B], params[P_OFF_BR], params[P_OFF_SH])
    n = params[P_NGROUPS]
    if params[P_VARIANT] == V_XOR:
        return group ^ h
    off = h + U1
    if choice == U0:
        return (group + off) % n
    return (group + n - off) % n


@njit(cache=True, nogil=True, inline="always")
def _fingerprint_of(params, key):
    return _hash(key, params[P_FP_A], params[P_FP_B], params[P_FP_BR], params[P_FP_SH]) + U1


@njit(cache=True, nogil=True, inline="always")
def _location_of(params, key):
    return _hash(key, params[P_LOC_A], params[P_LOC_B], params[P_LOC_BR], params[P_LOC_SH])


@njit(cache=True, nogil=True, inline="always")
def _image_probe(image, lo, hi, q):
    """Lane index of the lowest all-zero lane, or -1."""
    e = (image - lo) & ~image & hi
    if e == U0:
        return np.int64(-1)
    return np.int64(_ctz(e) // q)


@njit(cache=True, nogil=True)
def _find_empty(words, params, group):
    l = params[P_L]
    q = params[P_Q]
    start = _group_start(params[P_VARIANT], l, group)
    if params[P_BITPAR] == U1:
        img = _load_group(words, q, start, params[P_GROUP_MASK])
        return _image_probe(img, params[P_LO], params[P_HI], q)
    j = U0
    while j < l:
        if _read_slot(words, q, start + j) == U0:
            return np.int64(j)
        j += U1
    return np.int64(-1)


@njit(cache=True, nogil=True)
def _find_match(words, params, group, fp, choice):
    variant = params[P_VARIANT]
    l = params[P_L]
    q = params[P_Q]
    start = _group_start(variant, l, group)
    if params[P_BITPAR] == U1:
        base = params[P_PAT1] if choice == U1 else params[P_PAT0]
        pattern = base | fp * params[P_LO]
        img = _load_group(words, q, start, params[P_GROUP_MASK])
        return _image_probe(img ^ pattern, params[P_LO], params[P_HI], q)
    fp_bits = params[P_FP_BITS]
    j = U0
    while j < l:
        if _read_slot(words, q, start + j) == _encode(variant, q, fp_bits, l, fp, choice, j):
            return np.int64(j)
        j += U1
    return np.int64(-1)


@njit(cache=True, nogil=True)
def _contains_key(words, params, stash, key):
    fp = _fingerprint_of(params, key)
    g0 = _location_of(params, key)
    g1 = _alt_group(params, g0, U0, fp)
    if _find_match(words, params, g0, fp, U0) >= 0:
        return True
    if _find_match(words, params, g1, fp, U1) >= 0:
        return True
    if stash[STASH_FLAG] != U0 and stash[STASH_FP] == fp:
        if params[P_VARIANT] == V_XOR:
            return stash[STASH_GROUP] == g0 or stash[STASH_GROUP] == g1
        if stash[STASH_CHOICE] == U0:
            return stash[STASH_GROUP] == g0
        return stash[STASH_GROUP] == g1
    return False


@njit(cache=True, nogil=True)
def _insert_key(words, meta, params, stash, rng, key):
    """Insert one key; returns evictions (>= 0), -2 soft fail, -3 hard fail.

    A soft failure parks the last homeless value in the one-entry stash so
    membership answers stay complete; a hard failure means the stash was
    already taken and the table is effectively over capacity.
    """
    variant = params[P_VARIANT]
    l = params[P_L]
    q = params[P_Q]
    fp_bits = params[P_FP_BITS]
    max_walk = np.int64(params[P_MAX_WALK])
    two_l = l + l

    fp = _fingerprint_of(params, key)
    cg0 = _location_of(params, key)
    cg1 = _alt_group(params, cg0, U0, fp)

    evictions = np.int64(0)
    while True:
        lane = _find_empty(words, params, cg0)
        if lane >= 0:
            ul = np.uint64(lane)
            start = _group_start(variant, l, cg0)
            _write_slot(words, q, start + ul, _encode(variant, q, fp_bits, l, fp, U0, ul))
            meta[0] += 1
            return evictions
        lane = _find_empty(words, params, cg1)
        if lane >= 0:
            ul = np.uint64(lane)
            start = _group_start(variant, l, cg1)
            _write_slot(words, q, start + ul, _encode(variant, q, fp_bits, l, fp, U1, ul))
            meta[0] += 1
            return evictions
        if evictions >= max_walk:
            if stash[STASH_FLAG] != U0:
                return np.int64(-3)
            stash[STASH_FLAG] = U1
            stash[STASH_FP] = fp
            stash[STASH_CHOICE] = U0
            stash[STASH_GROUP] = cg0
            return np.int64(-2)

        r = _splitmix(rng) % two_l
        victim_choice = U0 if r < l else U1
        victim_lane = r % l
        victim_group = cg0 if victim_choice == U0 else cg1
        t = _group_start(variant, l, victim_group) + victim_lane
        old = _read_slot(words, q, t)
        _write_slot(words, q, t, _encode(variant, q, fp_bits, l, fp, victim_choice, victim_lane))
        evictions += 1

        # rebuild the evicted value's two candidate groups from its bits
        fp = old & ((U1 << fp_bits) - U1)
        if variant == V_XOR:
            here = t // l
            cg0 = _alt_group(params, here, U0, fp)
            cg1 = here
        else:
            stored_choice = old >> (q - U1)
            here = t - _decode_lane(variant, fp_bits, l, old) if variant == V_WINDOWED else t // l
            other = _alt_group(params, here, stored_choice, fp)
            if stored_choice == U0:
                cg0 = here
                cg1 = other
            else:
                cg0 = other
                cg1 = here


@njit(cache=True, nogil=True)
def insert_batch(words, meta, params, stash, hist, counters, rng, keys, if_absent, stop_on_fail):
    """Insert a key array; returns keys consumed, or -(i+1) on hard failure.

    With `stop_on_fail` the batch stops right after the first exhausted
    walk (the failing key is consumed and counted).  The eviction
    histogram gains one entry per stored key.
    """
    n = keys.shape[0]
    for i in range(n):
        key = keys[i]
        if if_absent and _contains_key(words, params, stash, key):
            counters[C_DUP] += 1
            continue
        result = _insert_key(words, meta, params, stash, rng, key)
        if result >= 0:
            counters[C_STORED] += 1
            hist[result] += 1
        else:
            counters[C_FAILED] += 1
            if result == -3:
                return np.int64(-(i + 1))
            if stop_on_fail:
                return np.int64(i + 1)
    return np.int64(n)


@njit(cache=True, nogil=True)
def contains_batch(words, params, stash, keys, out):
    for i in range(keys.shape[0]):
        out[i] = _contains_key(words, params, stash, keys[i])


@njit(cache=True, nogil=True)
def count_hits(words, params, stash, keys):
    hits = np.int64(0)
    for i in range(keys.shape[0]):
        if _contains_key(words, params, stash, keys[i]):
            hits += 1
    return hits


@njit(cache=True, nogil=True)
def route_batch(keys, params, out):
    a = params[P_SUB_A]
    b = params[P_SUB_B]
    br = params[P_SUB_BR]
    sh = params[P_SUB_SH]
    for i in range(keys.shape[0]):
        out[i] = _hash(keys[i], a, b, br, sh)


# ------------------------------------------------ direct probe entry points
# (compiled counterparts of the reference probes, for equivalence tests)


@njit(cache=True, nogil=True)
def probe_empty_images(images, lo, hi, q, out):
    for i in range(images.shape[0]):
        out[i] = _image_probe(images[i], lo, hi, q)


@njit(cache=True, nogil=True)
def probe_match_images(images, patterns, lo, hi, q, out):
    for i in range(images.shape[0]):
        out[i] = _image_probe(images[i] ^ patterns[i], lo, hi, q)


@njit(cache=True, nogil=True)
def hash_batch(keys, a, b, br, sh, out):
    for i in range(keys.shape[0]):
        out[i] = _hash(keys[i], a, b, br, sh)
