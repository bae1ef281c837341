"""Command-line behaviour: exit codes, outputs, and error reporting."""

import pytest

from figures import cli

_HEADER = "n,p,design,method,s,rejection_rate,mc_se,replications,B,wall_time_s"


def _write_power_csv(path):
    rows = []
    for design in ("i", "ii"):
        for method in ("CC", "MAX"):
            for s in (1, 20, 60):
                rows.append(f"200,400,{design},{method},{s},0.4,0.011,300,200,12.5")
    path.write_text(_HEADER + "\n" + "\n".join(rows) + "\n")


def _write_size_csv(path):
    rows = []
    for n in (100, 200):
        for p in (200, 400):
            rows.append(f"{n},{p},i,CC,,0.059,0.009,500,200,30.0")
    path.write_text(_HEADER + "\n" + "\n".join(rows) + "\n")


class TestPowerCommand:
    def test_writes_one_image_per_design(self, tmp_path, capsys):
        csv = tmp_path / "power.csv"
        _write_power_csv(csv)
        out = tmp_path / "figs"
        rc = cli.main(["power", "--in", str(csv), "--out", str(out)])
        assert rc == 0
        assert sorted(f.name for f in out.iterdir()) == [
            "power_i.png",
            "power_ii.png",
        ]
        captured = capsys.readouterr()
        assert "wrote 2 panel(s)" in captured.out
        assert captured.err == ""

    def test_format_flag_changes_extension(self, tmp_path):
        csv = tmp_path / "power.csv"
        _write_power_csv(csv)
        out = tmp_path / "figs"
        rc = cli.main(["power", "--in", str(csv), "--out", str(out), "--format", "pdf"])
        assert rc == 0
        assert (out / "power_i.pdf").is_file()

    def test_missing_input_fails_with_message(self, tmp_path, capsys):
        rc = cli.main(
            ["power", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]
        )
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_column_fails_and_names_it(self, tmp_path, capsys):
        csv = tmp_path / "bad.csv"
        csv.write_text("n,p,design,method\n100,50,i,CC\n")
        rc = cli.main(["power", "--in", str(csv), "--out", str(tmp_path / "figs")])
        assert rc == 1
        assert "'s'" in capsys.readouterr().err

    def test_header_only_input_fails(self, tmp_path, capsys):
        csv = tmp_path / "empty.csv"
        csv.write_text(_HEADER + "\n")
        rc = cli.main(["power", "--in", str(csv), "--out", str(tmp_path / "figs")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_alpha_fails(self, tmp_path, capsys):
        csv = tmp_path / "power.csv"
        _write_power_csv(csv)
        rc = cli.main(
            ["power", "--in", str(csv), "--out", str(tmp_path), "--alpha", "1.5"]
        )
        assert rc == 1
        assert "alpha" in capsys.readouterr().err


class TestTableCommand:
    def test_writes_table(self, tmp_path, capsys):
        csv = tmp_path / "sizes.csv"
        _write_size_csv(csv)
        out = tmp_path / "table.txt"
        rc = cli.main(["table", "--in", str(csv), "--out", str(out)])
        assert rc == 0
        text = out.read_text(encoding="utf-8")
        assert "n = 100" in text and "n = 200" in text
        assert "5.9" in text
        assert "wrote table with 2 block(s)" in capsys.readouterr().out

    def test_missing_input_fails(self, tmp_path, capsys):
        rc = cli.main(
            ["table", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "t.txt")]
        )
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_header_only_input_fails(self, tmp_path, capsys):
        csv = tmp_path / "empty.csv"
        csv.write_text(_HEADER + "\n")
        rc = cli.main(["table", "--in", str(csv), "--out", str(tmp_path / "t.txt")])
        assert rc == 1
        assert "no rows" in capsys.readouterr().err


class TestArgumentParsing:
    def test_missing_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.main([])
        assert excinfo.value.code == 2

    def test_in_flag_is_required(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["power", "--out", str(tmp_path)])
        assert excinfo.value.code == 2
