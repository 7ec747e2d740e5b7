import numpy as np
import pytest

from wincuckoo.concurrent import ShardedFilter
from wincuckoo.layout import FilterConfig


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so per-test timings measure the
    operations, not the compiler."""
    cfg = FilterConfig(variant="windowed", l=2, k=8, capacity=256, seed=1)
    filt = ShardedFilter.from_config(cfg)
    keys = np.arange(64, dtype=np.uint64)
    filt.build(keys)
    filt.contains_many(keys)
    filt.count_hits(keys)
    filt.route_many(keys)


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
