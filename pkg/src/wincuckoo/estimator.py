"""Scikit-learn style front door: fit on a key set, predict membership.

``CuckooFilter`` follows the estimator protocol (``get_params`` /
``set_params``, ``fit`` returning ``self``, trailing-underscore fitted
attributes) so it drops into sklearn pipelines and ``clone`` without
depending on sklearn itself.  The underlying mutable structure remains
reachable for the data-structure verbs (insert, delete, save).
"""

from __future__ import annotations

import numpy as np

from .concurrent import ShardedFilter
from .layout import FilterConfig
from .persist import load_filter, save_filter


class NotFittedError(ValueError, AttributeError):
    """predict/contains called before fit (mirrors sklearn's exception)."""


def check_key_array(X) -> np.ndarray:
    """Validate and coerce keys to a contiguous 1-D uint64 array.

    Python int sequences are converted exactly (numpy would silently
    round values past 2**63 through float64).
    """
    if not isinstance(X, np.ndarray):
        seq = list(X)
        if not seq:
            return np.empty(0, dtype=np.uint64)
        if not all(isinstance(v, (int, np.integer)) for v in seq):
            raise ValueError("keys must be integers")
        lo, hi = min(seq), max(seq)
        if lo < 0 or hi >= 1 << 64:
            raise ValueError("keys must be non-negative 64-bit integers")
        return np.array([int(v) for v in seq], dtype=np.uint64)
    arr = X
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"keys must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        return np.empty(0, dtype=np.uint64)
    if arr.dtype == np.uint64:
        return np.ascontiguousarray(arr)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"keys must be integers, got dtype {arr.dtype}")
    if int(arr.min()) < 0:
        raise ValueError("keys must be non-negative 64-bit integers")
    return np.ascontiguousarray(arr.astype(np.uint64))


class CuckooFilter:
    """Approximate-membership filter with an estimator-shaped API.

    Parameters
    ----------
    capacity:
        Number of keys the filter is sized for.
    variant:
        "windowed" (overlapping windows, smallest tables), "bucketed"
        (disjoint buckets, offset addressing) or "xor" (classic baseline,
        power-of-two bucket count).
    group_size:
        Slots per window or bucket (2 or 4; "xor" requires 4).
    fpr_bits:
        Target false-positive rate of 2**-fpr_bits.
    load_fraction:
        Fill target as a fraction of the layout's load threshold.
    max_walk:
        Eviction budget per insertion.
    subfilters:
        Independent shards; >1 enables parallel construction.
    parallel:
        Use the producer-consumer build in fit() when subfilters > 1.
    seed:
        Master seed for hash multipliers and walk randomness.
    """

    _params = (
        "capacity",
        "variant",
        "group_size",
        "fpr_bits",
        "load_fraction",
        "max_walk",
        "subfilters",
        "parallel",
        "seed",
    )

    def __init__(
        self,
        capacity: int = 1_000_000,
        *,
        variant: str = "windowed",
        group_size: int = 2,
        fpr_bits: int = 10,
        load_fraction: float = 0.98,
        max_walk: int = 10_000,
        subfilters: int = 1,
        parallel: bool = False,
        seed: int = 0,
    ):
        self.capacity = capacity
        self.variant = variant
        self.group_size = group_size
        self.fpr_bits = fpr_bits
        self.load_fraction = load_fraction
        self.max_walk = max_walk
        self.subfilters = subfilters
        self.parallel = parallel
        self.seed = seed

    # ------------------------------------------------------ estimator plumbing

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._params}

    def set_params(self, **params) -> "CuckooFilter":
        for name, value in params.items():
            if name not in self._params:
                raise ValueError(f"unknown parameter {name!r} for CuckooFilter")
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={getattr(self, k)!r}" for k in self._params)
        return f"CuckooFilter({args})"

    def _config(self) -> FilterConfig:
        return FilterConfig(
            variant=self.variant,
            l=self.group_size,
            k=self.fpr_bits,
            capacity=self.capacity,
            load_fraction=self.load_fraction,
            max_walk=self.max_walk,
            subfilters=self.subfilters,
            seed=self.seed,
        )

    def _fitted(self) -> ShardedFilter:
        filt = getattr(self, "filter_", None)
        if filt is None:
            raise NotFittedError("this CuckooFilter is not fitted yet; call fit(X) first")
        return filt

    # ------------------------------------------------------------------ fitting

    def fit(self, X, y=None) -> "CuckooFilter":
        """Build the filter over a key array (refitting starts fresh)."""
        keys = check_key_array(X)
        filt = ShardedFilter.from_config(self._config())
        if self.parallel and self.subfilters > 1:
            filt.build_parallel(keys)
        else:
            filt.build(keys)
        self.filter_ = filt
        self.geometry_ = filt.geometry
        self.stats_ = filt.merged_stats()
        return self

    # ------------------------------------------------------------------ queries

    def predict(self, X) -> np.ndarray:
        """Boolean membership per key: True may be a false positive,
        False is always correct."""
        return self._fitted().contains_many(check_key_array(X))

    def contains(self, key: int) -> bool:
        return self._fitted().contains(int(key))

    def __contains__(self, key: int) -> bool:
        return self.contains(key)

    # ----------------------------------------------------------- data-structure

    def insert(self, key: int):
        return self._fitted().insert_if_absent(int(key))

    def delete(self, key: int) -> bool:
        return self._fitted().delete(int(key))

    @property
    def load_(self) -> float:
        return self._fitted().load

    # -------------------------------------------------------------- persistence

    def save(self, path) -> None:
        filt = self._fitted()
        save_filter(path, filt.shards, filt.seed)

    @classmethod
    def load(cls, path, max_walk: int = 10_000) -> "CuckooFilter":
        shards, seed = load_filter(path, max_walk=max_walk)
        filt = ShardedFilter.from_shards(shards, seed=seed)
        geom = filt.geometry
        est = cls(
            capacity=geom.total_slots,
            variant=geom.variant,
            group_size=geom.l,
            fpr_bits=geom.k,
            max_walk=max_walk,
            subfilters=geom.subfilters,
            seed=seed,
        )
        est.filter_ = filt
        est.geometry_ = geom
        est.stats_ = filt.merged_stats()
        return est
