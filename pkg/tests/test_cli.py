import json

import numpy as np
import pytest

from wincuckoo.cli import (
    EXIT_BUILD_FAILED,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from wincuckoo.workload import read_records


def run(*argv):
    return main(list(argv))


class TestBuild:
    def test_build_writes_filter_and_stats(self, tmp_path, capsys):
        out = tmp_path / "f.wckf"
        code = run(
            "build", "--capacity", "100000", "--seed", "5", "--out", str(out)
        )
        assert code == EXIT_OK
        assert out.exists()
        blob = json.loads(capsys.readouterr().out)
        assert abs(blob["achieved_load"] - 0.945) < 0.01
        assert blob["failures"] == 0
        stats = json.loads((tmp_path / "f.wckf.stats.json").read_text())
        assert stats["achieved_load"] == blob["achieved_load"]

    def test_same_seed_rebuild_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.wckf", tmp_path / "b.wckf"
        for out in (a, b):
            assert run("build", "--capacity", "30000", "--seed", "9", "--out", str(out)) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_bad_load_fraction_is_usage_error(self, tmp_path):
        code = run("build", "--load-fraction", "1.2", "--out", str(tmp_path / "x.wckf"))
        assert code == EXIT_USAGE

    def test_xor_l2_is_usage_error(self, tmp_path):
        code = run("build", "--variant", "xor", "-l", "2", "--out", str(tmp_path / "x.wckf"))
        assert code == EXIT_USAGE

    def test_overfull_build_exits_2_but_writes_stats(self, tmp_path, capsys):
        out = tmp_path / "full.wckf"
        keyfile = tmp_path / "keys.bin"
        (np.arange(3000, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)).astype("<u8").tofile(keyfile)
        code = run(
            "build", "--capacity", "2000", "--max-walk", "60",
            "--keys", str(keyfile), "--out", str(out), "--seed", "2",
        )
        assert code == EXIT_BUILD_FAILED
        assert out.exists()
        assert (tmp_path / "full.wckf.stats.json").exists()

    def test_help_lists_defaults(self, capsys):
        with pytest.raises(SystemExit):
            run("build", "--help")
        text = capsys.readouterr().out
        assert "0.98" in text
        assert "10000" in text
        assert "--subfilters" in text and "--seed" in text


class TestQuery:
    @pytest.fixture()
    def built(self, tmp_path):
        out = tmp_path / "f.wckf"
        keys = tmp_path / "k.bin"
        assert run("genkeys", "--seed", "5", "--n", "20000", "--out", str(keys)) == EXIT_OK
        assert run("build", "--capacity", "20000", "--seed", "5",
                   "--keys", str(keys), "--out", str(out)) == EXIT_OK
        return out, keys

    def test_query_own_keys_all_positive(self, built, tmp_path, capsys):
        out, keys = built
        capsys.readouterr()
        assert run("query", str(out), "--keys", str(keys), "--summary") == EXIT_OK
        blob = json.loads(capsys.readouterr().out)
        assert blob == {"queries": 20000, "positive": 20000}

    def test_query_streams_zero_one_lines(self, built, tmp_path, capsys):
        out, keys = built
        capsys.readouterr()
        assert run("query", str(out), "--keys", str(keys)) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 20000
        assert set(lines) == {"1"}

    def test_disjoint_keys_hit_at_fpr(self, built, tmp_path, capsys):
        out, _ = built
        fresh = tmp_path / "fresh.bin"
        assert run("genkeys", "--seed", "5", "--n", "200000",
                   "--partition", "query", "--out", str(fresh)) == EXIT_OK
        capsys.readouterr()
        assert run("query", str(out), "--keys", str(fresh), "--summary") == EXIT_OK
        blob = json.loads(capsys.readouterr().out)
        assert blob["positive"] / blob["queries"] < 2 * 2**-10

    def test_text_mode_round_trip(self, tmp_path, capsys):
        keys = tmp_path / "k.txt"
        out = tmp_path / "f.wckf"
        assert run("genkeys", "--seed", "1", "--n", "5000", "--text", "--out", str(keys)) == EXIT_OK
        assert keys.read_text().splitlines()[0].isdigit()
        assert run("build", "--capacity", "5000", "--keys", str(keys), "--text",
                   "--out", str(out), "--seed", "1") == EXIT_OK
        capsys.readouterr()
        assert run("query", str(out), "--keys", str(keys), "--text", "--summary") == EXIT_OK
        assert json.loads(capsys.readouterr().out)["positive"] == 5000

    def test_missing_filter_file_is_io_error(self, tmp_path):
        keys = tmp_path / "k.bin"
        run("genkeys", "--seed", "1", "--n", "10", "--out", str(keys))
        assert run("query", str(tmp_path / "absent.wckf"), "--keys", str(keys)) == EXIT_IO

    def test_corrupt_filter_file_is_io_error(self, built, tmp_path):
        out, keys = built
        blob = bytearray(out.read_bytes())
        blob[:4] = b"JUNK"
        bad = tmp_path / "bad.wckf"
        bad.write_bytes(blob)
        assert run("query", str(bad), "--keys", str(keys)) == EXIT_IO


class TestInspect:
    def test_inspect_round_trip(self, tmp_path, capsys):
        out = tmp_path / "f.wckf"
        run("build", "--capacity", "10000", "--subfilters", "2", "--seed", "3", "--out", str(out))
        capsys.readouterr()
        assert run("inspect", str(out)) == EXIT_OK
        info = json.loads(capsys.readouterr().out)
        assert info["shards"] == 2
        assert info["detail"][0]["variant"] == "windowed"

    def test_inspect_missing_file(self, tmp_path):
        assert run("inspect", str(tmp_path / "nope.wckf")) == EXIT_IO


class TestBench:
    def test_bench_emits_json(self, tmp_path, capsys):
        code = run(
            "bench", "--mode", "lookup-mixed", "--capacity", "30000",
            "--seed", "4", "--out", str(tmp_path / "b.json"),
        )
        assert code == EXIT_OK
        blob = json.loads(capsys.readouterr().out)
        assert blob["mode"] == "lookup-mixed"
        assert blob["lookup_throughput"] > 0
        assert json.loads((tmp_path / "b.json").read_text()) == blob


class TestExperiment:
    def test_fpr_grid_cardinality(self, tmp_path):
        code = run(
            "experiment", "fpr", "--out", str(tmp_path), "--seed", "2",
            "--n", "20000", "--m", "50000", "--ks", "8,10",
            "--variants", "windowed:2,bucketed:4",
        )
        assert code == EXIT_OK
        recs = read_records(tmp_path / "fpr_seed2.csv")
        assert len(recs) == 4
        assert (tmp_path / "fpr_seed2.config.json").exists()

    def test_load_threshold_ordering(self, tmp_path):
        code = run(
            "experiment", "load-threshold", "--out", str(tmp_path), "--seed", "3",
            "--slots", "30000", "--max-walks", "5000", "--repeats", "2",
            "--variants", "windowed:2,bucketed:2", "-k", "10",
        )
        assert code == EXIT_OK
        recs = read_records(tmp_path / "load-threshold_seed3.csv")
        win = [r.achieved_load for r in recs if r.variant == "windowed"]
        buck = [r.achieved_load for r in recs if r.variant == "bucketed"]
        assert min(win) > max(buck)

    def test_walk_hist_zero_bin_dominant(self, tmp_path):
        code = run(
            "experiment", "walk-hist", "--out", str(tmp_path), "--seed", "4",
            "--n", "20000", "--variants", "windowed:2",
        )
        assert code == EXIT_OK
        bins = (tmp_path / "walk-hist_seed4_bins.csv").read_text().splitlines()[2:]
        counts = {int(r.split(",")[-2]): int(r.split(",")[-1]) for r in bins if r}
        assert counts[0] > sum(v for k, v in counts.items() if k > 0)

    def test_unknown_experiment_is_usage_error(self, tmp_path):
        assert run("experiment", "nonsense", "--out", str(tmp_path)) == EXIT_USAGE
