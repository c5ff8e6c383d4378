import json
import subprocess
import sys

import pytest

from dampedschwarz.cli import main
from dampedschwarz.output import RHO_COLUMNS, read_csv


def test_eta_output(capsys):
    assert main(["eta", "--omega", "100", "--r", "1"]) == 0
    out = capsys.readouterr().out
    assert "eta = -10000+100i" in out
    assert "Im/Re of -eta = -0.01" in out
    assert "sqrt(eta)" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dampedschwarz", "eta", "--omega", "10", "--gamma", "0.001"],
                         capture_output=True, text=True, check=True)
    assert "Im/Re of -eta = -0.01" in res.stdout


@pytest.mark.parametrize(
    "argv",
    [
        ["eta", "--omega", "-1"],
        ["rho", "--N", "1"],
        ["rho", "--bc", "box"],
        ["eta", "--preset", "fig1"],
        ["sweep"],
        ["sweep", "--preset", "nope"],
        ["greens", "--omega", "10", "--source", "2", "0.5", "--grid", "15"],
    ],
)
def test_hard_errors_exit_nonzero(argv, capsys, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) != 0
    assert capsys.readouterr().err.startswith("error:")


def test_bad_config_reports_line(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"axis": "r",\n "values": [1}\n')
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_rho_writes_files(tmp_path):
    assert main(["rho", "--r", "1", "--xi-points", "20", "--out", str(tmp_path), "--seed", "3"]) == 0
    meta, rows = read_csv(tmp_path / "rho.csv")
    assert len(rows) == 20 and tuple(rows[0]) == RHO_COLUMNS
    assert meta["seed"] == "3" and meta["omega"] == "100.0"
    assert (tmp_path / "rho.svg").read_text().count("<polyline") == 1


def test_sweep_preset_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--preset", "fig1", "--out", str(a)]) == 0
    assert main(["sweep", "--preset", "fig1", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "fig1_L0.csv" in names and "fig1_L1_300.svg" in names
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    meta, rows = read_csv(a / "fig1_L0.csv")
    assert sorted({r["r"] for r in rows}) == [0.0, 0.1, 1.0, 10.0, 100.0]
    assert {r["N"] for r in rows} == {2} and {r["L_nominal"] for r in rows} == {0.0}
    assert meta["seed"] == "0"


def test_sweep_config_with_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"axis": "N", "values": [2, 4], "r": 1.0, "L": 0.01, "xi_points": 10, "panel": "p"}))
    assert main(["sweep", "--config", str(cfg), "--omega", "50", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "custom_p.csv")
    assert len(rows) == 20 and {r["omega"] for r in rows} == {50.0}


def test_greens_writes_field(tmp_path):
    assert main(["greens", "--omega", "10", "--r", "1", "--grid", "15", "--out", str(tmp_path)]) == 0
    meta, rows = read_csv(tmp_path / "greens_cavity.csv")
    assert len(rows) == 17 * 17 and meta["source"] == "0.5 0.5"
    assert (tmp_path / "greens_cavity_abs.svg").exists() and (tmp_path / "greens_cavity_real.svg").exists()


def test_run_schwarz_writes_reports(tmp_path, capsys):
    assert main(["run-schwarz", "--omega", "20", "--r", "1", "--grid", "63", "--iters", "30",
                 "--kmax", "3", "--out", str(tmp_path)]) == 0
    meta, norms = read_csv(tmp_path / "schwarz_norms.csv")
    assert meta["overlap_cells"] == "4" and len(norms) == 31
    _, modes = read_csv(tmp_path / "schwarz_modes.csv")
    assert [m["k"] for m in modes] == [1, 2, 3]
    assert "snapped L" in capsys.readouterr().out


def test_validate_subset(capsys):
    assert main(["validate", "--only", "1"]) == 0
    assert "[PASS]" in capsys.readouterr().out
