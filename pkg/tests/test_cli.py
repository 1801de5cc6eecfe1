"""Command-line interface: flags, config files, exit codes, artifacts."""

import json
import os

import numpy as np
from cbrap import ReplayDataset, save_context_dataset
from cbrap.cli import main


def run_cli(*argv):
    return main(list(argv))


class TestRun:
    def test_flags_only(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        code = run_cli("run", "--algo", "cbrap-sg,uniform", "--n", "20", "--m", "4",
                       "--k", "3", "--t", "15", "--noise-r", "0.1",
                       "--seeds", "1,2", "--out", out)
        assert code == 0
        assert sorted(os.listdir(out)) == [
            "cbrap-sg_seed1.csv", "cbrap-sg_seed2.csv", "summary.json",
            "uniform_seed1.csv", "uniform_seed2.csv"]
        assert "final regret" in capsys.readouterr().out

    def test_rerun_byte_identical(self, tmp_path):
        args = ("run", "--algo", "cbrap-rs", "--n", "18", "--m", "3", "--k", "2",
                "--t", "10", "--seed", "5")
        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        assert run_cli(*args, "--out", out_a) == 0
        assert run_cli(*args, "--out", out_b) == 0
        name = "cbrap-rs_seed5.csv"
        assert open(os.path.join(out_a, name), "rb").read() == \
               open(os.path.join(out_b, name), "rb").read()

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = {"env": {"n": 20, "k": 3, "noise": "gaussian", "noise_r": 0.1},
               "m": 4, "t": 12, "algos": ["uniform"], "seeds": [3]}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("run", "--config", str(path), "--t", "6")
        assert code == 0

    def test_missing_required_flags(self, capsys):
        assert run_cli("run", "--n", "10") == 1
        assert "config error" in capsys.readouterr().err

    def test_unknown_algo(self, capsys):
        assert run_cli("run", "--algo", "zigzag", "--n", "10", "--m", "2",
                       "--k", "2", "--t", "5") == 1

    def test_bad_flag_exits_one(self):
        assert run_cli("run", "--not-a-flag") == 1

    def test_help_exits_zero(self):
        assert run_cli("--help") == 0

    def test_io_error_exit_two(self, capsys):
        code = run_cli("run", "--algo", "uniform", "--n", "10", "--m", "2",
                       "--k", "2", "--t", "5", "--out", "/dev/null/nope")
        assert code == 2
        assert "io error" in capsys.readouterr().err

    def test_replay_env(self, tmp_path):
        ds = ReplayDataset(n=4, K=2, rows=np.random.default_rng(0)
                           .standard_normal((10, 4)))
        csv = str(tmp_path / "ctx.csv")
        save_context_dataset(ds, csv)
        code = run_cli("run", "--algo", "linucb", "--n", "4", "--m", "2",
                       "--k", "2", "--t", "5", "--env", "replay",
                       "--replay", csv, "--out", str(tmp_path / "o"))
        assert code == 0

    def test_replay_requires_path(self):
        assert run_cli("run", "--algo", "uniform", "--n", "4", "--m", "2",
                       "--k", "2", "--t", "5", "--env", "replay") == 1


class TestCoverage:
    def test_runs_and_reports(self, tmp_path, capsys):
        out = str(tmp_path / "cov.json")
        code = run_cli("coverage", "--n", "24", "--m", "5", "--k", "3",
                       "--t", "20", "--noise-r", "0.05", "--num-seeds", "5",
                       "--out", out)
        assert code == 0
        assert "coverage rate" in capsys.readouterr().out
        assert json.load(open(out))["coverage_rate"] >= 0.0

    def test_strict_violation_exit_three(self):
        # an unreachable coverage target forces the violation path
        code = run_cli("coverage", "--n", "24", "--m", "5", "--k", "3",
                       "--t", "10", "--num-seeds", "3", "--strict",
                       "--min-coverage", "1.5")
        assert code == 3


class TestKaban:
    def test_table_and_json(self, tmp_path, capsys):
        out = str(tmp_path / "kaban.json")
        code = run_cli("kaban", "--m-list", "8,16", "--eps1-list", "0.5,1.0",
                       "--trials", "4000", "--out", out)
        assert code == 0
        printed = capsys.readouterr().out
        assert "bound" in printed and "ok" in printed
        assert len(json.load(open(out))) == 4

    def test_strict_passes_when_bounds_hold(self):
        assert run_cli("kaban", "--m-list", "16", "--eps1-list", "0.75",
                       "--trials", "4000", "--strict") == 0

    def test_empty_list_rejected(self):
        assert run_cli("kaban", "--m-list", "", "--trials", "100") == 1
