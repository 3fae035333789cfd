import csv
import io
import json

import pytest

from infocorr.cli import EXIT_MISMATCH, EXIT_NUMERIC, EXIT_OK, EXIT_SCENARIO, main
from infocorr import reproduce


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_table1_default(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == EXIT_OK
    res = json.loads(out)
    assert len(res["cells"]) == 8 and res["ok"]


def test_table1_half_is_zero(capsys):
    code, out, _ = run(capsys, "table1", "--lambda-a", "1/2", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {(r["E_AA"], r["E_AB"]) for r in rows} == {("0", "0")}


def test_table1_beta_drops_rank(capsys):
    code, out, _ = run(capsys, "table1", "--beta1", "pi/4", "--lambda-a", "3/4")
    assert code == EXIT_OK
    cell = json.loads(out)["cells"][0]
    assert (cell["rank_That"], cell["E_AB"]) == (1, 1)


def test_roots_csv(capsys):
    code, out, _ = run(capsys, "roots", "--format", "csv")
    assert code == EXIT_OK
    rows = {r["name"]: float(r["root"]) for r in csv.DictReader(io.StringIO(out))}
    assert rows["m_unit"] == pytest.approx(2.726, abs=1e-3)


def test_mismatch_exit_code(capsys, monkeypatch):
    monkeypatch.setitem(reproduce.golden.ROOTS, "r", (9.5, 9.5))
    code, out, _ = run(capsys, "roots")
    assert code == EXIT_MISMATCH
    assert not json.loads(out)["ok"]


def test_report_default(capsys):
    code, out, _ = run(capsys, "report")
    assert code == EXIT_OK
    d = json.loads(out)
    assert (d["E_AA"], d["E_AB"], d["E_AB_min"], d["delta_E_AB"]) == (2, 2, 1, 1)


def test_report_scenario_file(tmp_path, capsys):
    p = tmp_path / "s.txt"
    p.write_text("lambda_a = 1/2\n")
    out_file = tmp_path / "r.json"
    code, _, _ = run(capsys, "report", str(p), "--out", str(out_file))
    assert code == EXIT_OK
    d = json.loads(out_file.read_text())
    assert (d["E_AA"], d["E_AB"], d["E_AB_min"], d["delta_E_AB"]) == (0, 0, 0, 0)


def test_invalid_scenario_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("lambda_a = 3/2, -1/2\n")
    code, _, err = run(capsys, "report", str(p))
    assert code == EXIT_SCENARIO
    assert "lambda_a" in err
    code, _, _ = run(capsys, "report", "--phi", "0.1,0.2")
    assert code == EXIT_SCENARIO
    code, _, _ = run(capsys, "longchain", "--nodes", "3", "--na", "2", "--nb", "2")
    assert code == EXIT_SCENARIO


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("no sign change found")
    monkeypatch.setattr(reproduce, "roots", boom)
    code, _, err = run(capsys, "roots")
    assert code == EXIT_NUMERIC and "numerical failure" in err


def test_longchain_csv(capsys):
    code, out, _ = run(capsys, "longchain", "--nodes", "4", "--time-grid", "0:2:0.5")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    assert rows[0]["E_AB"] == "1" and rows[1]["E_AB"] == "2"
    assert all(float(r["conservation"]) < 1e-11 for r in rows)


def test_scan_small_grid(tmp_path, capsys):
    p = tmp_path / "ex.txt"
    p.write_text("a_nodes = 2\nb_nodes = 2\nlambda_a = 5/16, 5/16, 5/16\n"
                 "lambda_b = 1/4, 1/4, 1/4\nfactors = 6\nactive = 2, 6\nupper = pi/2\n")
    curve = tmp_path / "c.csv"
    code, out, _ = run(capsys, "scan", str(p), "--region-grid", "4", "--time-grid", "0:9:0.5",
                       "--epsilon", "pi/160", "--curve-out", str(curve))
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["m_max"] > 0 and len(res["windows"]) >= 1
    lines = curve.read_text().splitlines()
    assert lines[0] == "t,normalized" and len(lines) == 20


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["nope"])
