"""Bucketed and windowed Cuckoo filters for 64-bit integer keys.

Approximate set membership with a target false-positive rate of 2**-k,
no false negatives, and deletion support.  Three memory layouts are
provided: the classic XOR-addressed bucketed filter, an offset-addressed
bucketed filter without the power-of-two size restriction, and an
offset-addressed filter over overlapping windows, which reaches higher
loads and therefore smaller tables at equal FPR.
"""

from .estimator import CuckooFilter, NotFittedError
from .concurrent import ShardedFilter
from .filter import BuildStats, CuckooShard, FilterFullError, InsertStatus
from .hashing import HashFamily, linear_hash
from .layout import (
    VARIANT_BUCKETED,
    VARIANT_WINDOWED,
    VARIANT_XOR,
    VARIANTS,
    ConfigError,
    FilterConfig,
    LayoutGeometry,
    geometry_for_slots,
    load_threshold,
    size_filter,
    size_filter_at_load,
)
from .persist import FormatError, load_filter, save_filter

__version__ = "0.1.0"

__all__ = [
    "BuildStats",
    "ConfigError",
    "CuckooFilter",
    "CuckooShard",
    "FilterConfig",
    "FilterFullError",
    "FormatError",
    "HashFamily",
    "InsertStatus",
    "LayoutGeometry",
    "NotFittedError",
    "ShardedFilter",
    "VARIANTS",
    "VARIANT_BUCKETED",
    "VARIANT_WINDOWED",
    "VARIANT_XOR",
    "geometry_for_slots",
    "linear_hash",
    "load_filter",
    "load_threshold",
    "save_filter",
    "size_filter",
    "size_filter_at_load",
    "__version__",
]
