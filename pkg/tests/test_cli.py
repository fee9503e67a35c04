"""End-to-end command-line checks: exit codes, output routing, file round trips."""
from __future__ import annotations

import json

import pytest

from chebrace import cli
from chebrace.experiments import InternalInconsistencyError


def test_table_h8_stdout_json(capsys):
    assert cli.main(["table", "--id", "h8"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["experiment"] == "h8-table"
    assert len(payload["rows"]) == 10


def test_table_csv_format(capsys):
    assert cli.main(["table", "--id", "h8", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    header = lines[0].split(",")
    assert "c1" in header and "mean_symbolic" in header
    assert len(lines) == 11


def test_race_single_pair(capsys):
    code = cli.main(["race", "--family", "quaternion", "--n", "3",
                     "--pair", "one:minus_one", "--samples", "10000",
                     "--seed", "11"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["rows"][0]["mean_formula"] == -4
    assert payload["rows"][0]["pass"] is True


def test_race_config_file(tmp_path, capsys):
    config = {"family": "quaternion", "n": 3, "w_axiom": 1,
              "pairs": [["one", "minus_one"]], "samples": 10000, "seed": 4}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    assert cli.main(["race", "--config", str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["w_axiom"] == 1
    assert len(payload["rows"]) == 1


def test_race_bad_config_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["race", "--config", str(path)]) == 2
    assert "bad config JSON" in capsys.readouterr().err


def test_race_bad_pair_syntax(capsys):
    assert cli.main(["race", "--pair", "one-minus_one",
                     "--samples", "10000"]) == 2
    assert "label:label" in capsys.readouterr().err


def test_race_missing_zero_file(capsys):
    code = cli.main(["race", "--zero-file", "/no/such/ordinates.txt",
                     "--samples", "10000"])
    assert code == 2
    assert "zero file" in capsys.readouterr().err


def test_argparse_rejects_unknown_choice():
    with pytest.raises(SystemExit) as err:
        cli.main(["table", "--id", "mystery"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main(["race", "--n", "four"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main(["zeros", "gen", "--out", "x.txt"])  # --log-conductor missing
    assert err.value.code == 2


def test_internal_inconsistency_exit_code(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise InternalInconsistencyError("computed and published rows split")

    monkeypatch.setattr(cli, "reproduce_table", boom)
    assert cli.main(["table", "--id", "h8"]) == 3
    assert "internal inconsistency" in capsys.readouterr().err


def test_zeros_gen_and_check_round_trip(tmp_path, capsys):
    out = tmp_path / "psi.txt"
    code = cli.main(["zeros", "gen", "--log-conductor", "6.0",
                     "--t-max", "80", "--seed", "3",
                     "--character-id", "psi_1", "--out", str(out)])
    assert code == 0
    gen_line = capsys.readouterr().out
    assert str(out) in gen_line and "ordinates" in gen_line
    assert cli.main(["zeros", "check", str(out)]) == 0
    check_line = capsys.readouterr().out
    assert "psi_1" in check_line and "t_max=80" in check_line


def test_zeros_check_rejects_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("# character: x\n3.0\n2.0\n")
    assert cli.main(["zeros", "check", str(bad)]) == 2
    assert str(bad) in capsys.readouterr().err


def test_mod4_missing_file(capsys):
    assert cli.main(["mod4", "--zero-file", "/no/such/file.txt"]) == 2
    assert "file" in capsys.readouterr().err


def test_out_writes_report_and_series(tmp_path, capsys):
    out = tmp_path / "mono.json"
    code = cli.main(["monotonicity", "--family", "dihedral", "--n", "6",
                     "--epsilon", "0.25", "--samples", "4000",
                     "--t-max", "16", "--seed", "1", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed == [str(out), str(out) + ".series.csv"]
    payload = json.loads(out.read_text())
    assert payload["experiment"] == "monotonicity"
    series = (tmp_path / "mono.json.series.csv").read_text().splitlines()
    assert series[0] == "level,delta_mc"
    assert len(series) == len(payload["levels"]) + 1


def test_sandwich_cli_smoke(capsys):
    code = cli.main(["sandwich", "--count", "2", "--seed", "2",
                     "--samples", "10000", "--t-max", "32"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["population_bias_above_1"] == 2
    assert payload["success_rate"] == 1.0
