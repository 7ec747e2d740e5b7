import numpy as np
import pytest

from wincuckoo.estimator import CuckooFilter, NotFittedError, check_key_array


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


class TestKeyValidation:
    def test_accepts_uint64_passthrough(self):
        keys = _rng(0).integers(0, 1 << 64, size=100, dtype=np.uint64)
        out = check_key_array(keys)
        assert out is keys or np.shares_memory(out, keys)

    def test_coerces_python_ints(self):
        out = check_key_array([1, 2, 2**63])
        assert out.dtype == np.uint64
        assert out.tolist() == [1, 2, 2**63]

    def test_flattens_column_vector(self):
        out = check_key_array(np.array([[1], [2], [3]], dtype=np.int64))
        assert out.shape == (3,)

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            check_key_array([-1, 2])

    def test_rejects_floats(self):
        with pytest.raises(ValueError, match="integers"):
            check_key_array([1.5, 2.5])

    def test_rejects_matrices(self):
        with pytest.raises(ValueError, match="1-D"):
            check_key_array(np.zeros((3, 2), dtype=np.uint64))


class TestEstimatorProtocol:
    def test_get_params_round_trips_through_init(self):
        est = CuckooFilter(capacity=5000, variant="bucketed", group_size=4, fpr_bits=12, seed=9)
        clone = CuckooFilter(**est.get_params())
        assert clone.get_params() == est.get_params()

    def test_set_params_returns_self(self):
        est = CuckooFilter()
        assert est.set_params(capacity=77) is est
        assert est.capacity == 77

    def test_set_params_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            CuckooFilter().set_params(banana=1)

    def test_sklearn_clone_compatible(self):
        from sklearn.base import clone

        est = CuckooFilter(capacity=123, fpr_bits=9)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_repr_lists_params(self):
        text = repr(CuckooFilter(capacity=42))
        assert "capacity=42" in text and "variant=" in text


class TestFitPredict:
    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            CuckooFilter().predict([1, 2, 3])

    def test_fit_predict_no_false_negatives(self):
        keys = _rng(1).integers(0, 1 << 63, size=50_000, dtype=np.uint64)
        est = CuckooFilter(capacity=50_000, fpr_bits=10, seed=4).fit(keys)
        assert bool(est.predict(keys).all())

    def test_predict_mostly_rejects_fresh_keys(self):
        keys = _rng(2).integers(0, 1 << 63, size=50_000, dtype=np.uint64)
        est = CuckooFilter(capacity=50_000, fpr_bits=10, seed=4).fit(keys)
        fresh = _rng(3).integers(0, 1 << 63, size=100_000, dtype=np.uint64) | np.uint64(1 << 63)
        fp_rate = est.predict(fresh).mean()
        assert fp_rate < 2 * 2**-10

    def test_fit_returns_self_and_sets_attrs(self):
        est = CuckooFilter(capacity=1000, seed=1)
        assert est.fit(np.arange(1000, dtype=np.uint64)) is est
        assert est.geometry_.total_slots > 0
        assert est.stats_.inserts > 0
        assert 0 < est.load_ < 1

    def test_refit_resets_state(self):
        est = CuckooFilter(capacity=1000, seed=1)
        est.fit(np.arange(1000, dtype=np.uint64))
        est.fit(np.arange(5000, 5100, dtype=np.uint64))
        assert not est.predict(np.arange(100, 200, dtype=np.uint64)).any()
        assert est.predict(np.arange(5000, 5100, dtype=np.uint64)).all()

    def test_parallel_fit_equivalent(self):
        keys = _rng(5).integers(0, 1 << 63, size=100_000, dtype=np.uint64)
        a = CuckooFilter(capacity=100_000, subfilters=4, seed=6).fit(keys)
        b = CuckooFilter(capacity=100_000, subfilters=4, parallel=True, seed=6).fit(keys)
        probe = np.concatenate([keys[:10_000], _rng(6).integers(0, 1 << 64, size=10_000, dtype=np.uint64)])
        assert np.array_equal(a.predict(probe), b.predict(probe))


class TestDataStructureVerbs:
    def test_insert_contains_delete(self):
        est = CuckooFilter(capacity=1000, seed=2).fit([])
        est.insert(777)
        assert est.contains(777)
        assert 777 in est
        assert est.delete(777)
        assert not est.contains(777)

    def test_save_load_round_trip(self, tmp_path):
        keys = _rng(7).integers(0, 1 << 63, size=20_000, dtype=np.uint64)
        est = CuckooFilter(capacity=20_000, subfilters=2, seed=8).fit(keys)
        path = tmp_path / "est.wckf"
        est.save(path)
        back = CuckooFilter.load(path)
        probe = np.concatenate([keys, _rng(8).integers(0, 1 << 64, size=20_000, dtype=np.uint64)])
        assert np.array_equal(est.predict(probe), back.predict(probe))

    def test_fit_on_empty_produces_empty_filter(self):
        est = CuckooFilter(capacity=100, seed=3).fit([])
        assert not est.predict([1, 2, 3]).any()
        assert est.load_ == 0.0
