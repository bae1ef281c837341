"""Command-line interface: flags, config files, exit codes, outputs."""

import json

import numpy as np
import pytest

from lstatk import cli
from lstatk.cli import main
from lstatk.harness import SizeGateError, parse_csv

_FAST_SIZE = [
    "--n-list", "36",
    "--p-list", "12",
    "--q", "2",
    "--designs", "i",
    "--replications", "4",
    "--B", "7",
    "--seed", "5",
    "--methods", "CC,MAX",
]


def _write_dataset(path, n=30, p=6, seed=11):
    rng = np.random.default_rng(seed)
    data = np.column_stack([rng.standard_normal(n), rng.standard_normal((n, p))])
    header = ",".join(["y"] + [f"x{j}" for j in range(1, p + 1)])
    np.savetxt(path, data, delimiter=",", header=header, comments="")
    return path


class TestSizeAndPowerCommands:
    def test_size_writes_csv_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "size.csv"
        rc = main(["size", *_FAST_SIZE, "--out", str(out)])
        assert rc == 0
        rows = parse_csv(out)
        assert len(rows) == 2 and all(r.s is None for r in rows)
        manifest = json.loads((tmp_path / "size.manifest.json").read_text())
        assert manifest["experiment"]["replications"] == 4
        assert manifest["experiment"]["master_seed"] == 5
        assert manifest["results_csv"] == "size.csv"
        assert "wrote 2 rows" in capsys.readouterr().out

    def test_power_carries_sparsity_column(self, tmp_path):
        out = tmp_path / "power.csv"
        rc = main(["power", *_FAST_SIZE, "--s-list", "1,3", "--out", str(out)])
        assert rc == 0
        rows = parse_csv(out)
        assert {r.s for r in rows} == {1, 3}
        assert len(rows) == 4

    def test_flags_override_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "n_list": [36], "p_list": [12], "q": 2, "design_list": ["i"],
            "replications": 4, "B": 7, "methods": ["CC"],
            "master_seed": 5,
        }))
        out = tmp_path / "size.csv"
        rc = main([
            "size", "--config", str(config), "--replications", "2",
            "--out", str(out),
        ])
        assert rc == 0
        manifest = json.loads((tmp_path / "size.manifest.json").read_text())
        assert manifest["experiment"]["replications"] == 2  # flag wins
        assert manifest["experiment"]["B"] == 7  # config wins over default
        assert manifest["experiment"]["methods"] == ["CC"]

    def test_unknown_config_key_fails(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"bogus": 1}))
        rc = main(["size", "--config", str(config)])
        assert rc == 1
        assert "unknown field 'bogus'" in capsys.readouterr().err

    def test_malformed_config_json_fails(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text("{not json")
        rc = main(["size", "--config", str(config)])
        assert rc == 1
        assert "config" in capsys.readouterr().err

    def test_invalid_method_name_fails(self, tmp_path, capsys):
        rc = main(["size", *_FAST_SIZE[:-2], "--methods", "CC,NOPE",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 1
        assert "methods" in capsys.readouterr().err

    def test_invalid_spec_reports_field(self, tmp_path, capsys):
        rc = main(["size", "--n-list", "36", "--p-list", "2", "--q", "2",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 1
        assert "p_list[0]" in capsys.readouterr().err

    def test_size_gate_failure_exits_2(self, tmp_path, capsys, monkeypatch):
        def tripped(spec):
            raise SizeGateError("boom")

        monkeypatch.setattr(cli, "run_size_experiment", tripped)
        rc = main(["size", *_FAST_SIZE, "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "size gate failed: boom" in capsys.readouterr().err
        assert not (tmp_path / "x.csv").exists()


class TestVerifyCommand:
    def test_cheap_probe_passes_and_prints_table(self, capsys):
        # Deterministic given the seed; realized distance 0.0419 < 0.05.
        rc = main([
            "verify", "--probes", "max-direct", "--seed", "1",
            "--reps-direct", "3000",
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert "probe" in out and "max-direct" in out
        assert "PASS" in out and "FAIL" not in out

    def test_unknown_probe_name_fails(self, capsys):
        rc = main(["verify", "--probes", "nonsense"])
        assert rc == 1
        assert "unknown probe" in capsys.readouterr().err


class TestTestCommand:
    def test_reports_all_methods(self, tmp_path, capsys):
        data = _write_dataset(tmp_path / "data.csv")
        rc = main(["test", "--data", str(data), "--q", "1",
                   "--B", "25", "--seed", "3"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "n=30 p=6 q=1 m=5" in out
        for name in ("CC", "MAX", "MAX_BOOT", "SUM", "COM"):
            assert name in out
        assert out.count("reject") + out.count("retain") == 5

    def test_deterministic_across_runs(self, tmp_path, capsys):
        data = _write_dataset(tmp_path / "data.csv")
        argv = ["test", "--data", str(data), "--q", "1", "--B", "25", "--seed", "3"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_bad_header_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        rc = main(["test", "--data", str(bad), "--q", "1"])
        assert rc == 1
        assert "header must be 'y,x1,...,xp'" in capsys.readouterr().err

    def test_q_out_of_range_fails(self, tmp_path, capsys):
        data = _write_dataset(tmp_path / "data.csv")
        rc = main(["test", "--data", str(data), "--q", "6"])
        assert rc == 1
        assert "--q must lie in [0, p = 6)" in capsys.readouterr().err

    def test_too_few_rows_fails(self, tmp_path, capsys):
        data = _write_dataset(tmp_path / "tiny.csv", n=3, p=6)
        rc = main(["test", "--data", str(data), "--q", "5"])
        assert rc == 1
        assert "need n > q" in capsys.readouterr().err

    def test_missing_file_fails(self, tmp_path, capsys):
        rc = main(["test", "--data", str(tmp_path / "absent.csv"), "--q", "1"])
        assert rc == 1
        assert "dataset" in capsys.readouterr().err
