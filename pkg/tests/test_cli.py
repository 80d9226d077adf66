import json
import subprocess
import sys

import numpy as np
import pytest

from symstokes.cli import ConfigError, RunConfig, main
from symstokes.domain import CellGrid, write_domain
from symstokes.driver import read_summary


def write_config(tmp_path, **data):
    data.setdefault("output_dir", str(tmp_path / "out"))
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


def test_census_cavity(tmp_path, capsys):
    cfg = write_config(tmp_path, scenario={"name": "cavity2d", "resolution": [16, 16]})
    assert main(["census", str(cfg)]) == 0
    total, boundary, pct = capsys.readouterr().out.split()
    assert int(total) == 16**2 + 2 * 16 * 15
    assert pct == f"{100 * int(boundary) / int(total):.2f}%"


def test_census_all_exterior(tmp_path, capsys):
    write_domain(CellGrid(np.zeros((5, 4), dtype=np.int8), 0.25), tmp_path / "dom.txt")
    cfg = write_config(tmp_path, domain="dom.txt")
    assert main(["census", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "0 0 0.00%"


def test_run_writes_outputs(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        scenario={"name": "cavity2d", "resolution": [32, 32]},
        levels=3,
        emit={"csv": True, "vtk": True, "matrix": True},
    )
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    summary = read_summary(out / "summary.txt")
    assert summary["status"] == "converged"
    assert summary["unknowns"] == str(32**2 + 2 * 32 * 31)
    assert float(summary["final_residual"]) < 1e-8
    csv = (out / "history_mg-sqmr.csv").read_text().splitlines()
    assert csv[0] == "iteration,rel_residual,seconds"
    assert len(csv) == int(summary["iterations"]) + 2
    vtk = (out / "fields.vtk").read_text().splitlines()
    assert vtk[0].startswith("# vtk DataFile")
    assert "DIMENSIONS 35 35 1" in vtk
    assert "CELL_DATA 1156" in vtk
    assert (out / "operator.mtx").read_text().startswith("%%MatrixMarket matrix coordinate real")


def test_runs_are_deterministic(tmp_path):
    rows = []
    for k in range(2):
        cfg = write_config(
            tmp_path, scenario={"name": "cavity2d", "resolution": [16, 16]}, levels=2, output_dir=str(tmp_path / f"o{k}")
        )
        assert main(["run", str(cfg)]) == 0
        lines = (tmp_path / f"o{k}" / "history_mg-sqmr.csv").read_text().splitlines()
        rows.append([ln.split(",")[:2] for ln in lines])
    assert rows[0] == rows[1]


@pytest.mark.parametrize(
    "data",
    [
        {"scenario": "cavity2d", "method": "gmres"},
        {"scenario": "cavity2d", "cycle": "F"},
        {"scenario": "cavity2d", "levels": 0},
        {"scenario": "cavity2d", "tol": -1.0},
        {"scenario": "cavity2d", "colour": 1},
        {"scenario": {"name": "cavity2d", "resolution": [4, 4]}},
        {"scenario": "nowhere"},
        {},
        {"scenario": "cavity2d", "domain": "x.txt"},
        {"scenario": "cavity2d", "emit": {"png": True}},
        {"scenario": {"name": "cavity2d", "resolution": [16, 16]}, "levels": 9},
    ],
)
def test_bad_configs_exit_1(tmp_path, data):
    cfg = write_config(tmp_path, **data)
    assert main(["run", str(cfg)]) == 1


def test_unreadable_config(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "bad.json").write_text("{")
    assert main(["census", str(tmp_path / "bad.json")]) == 1
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])


def test_usage_errors():
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["--threads", "0", "verify"]) == 1


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMSTOKES_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": {"name": "cavity2d", "resolution": [16, 16]}, "levels": 2}))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "summary.txt").exists()


def test_stalled_run_exits_2(tmp_path):
    cfg = write_config(tmp_path, scenario={"name": "cavity2d", "resolution": [16, 16]}, levels=2, tol=1e-14, maxit=1)
    assert main(["run", str(cfg)]) == 2
    assert read_summary(tmp_path / "out" / "summary.txt")["status"] == "max-iterations"


def test_plain_sqmr_method(tmp_path):
    cfg = write_config(tmp_path, scenario={"name": "cavity2d", "resolution": [8, 8]}, method="sqmr", maxit=500)
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "out" / "history_sqmr.csv").exists()


def test_verify_small(capsys):
    assert main(["verify", "--max-n", "300"]) == 0
    out = capsys.readouterr().out.splitlines()
    passed, total = out[-1].split()[0].split("/")
    assert passed == total


def test_verify_skip_reverse_fails(capsys):
    assert main(["verify", "--max-n", "300", "--skip-reverse"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, scenario={"name": "cavity2d", "resolution": [8, 8]})
    proc = subprocess.run(
        [sys.executable, "-m", "symstokes", "census", str(cfg)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.split()[0] == str(8**2 + 2 * 8 * 7)
