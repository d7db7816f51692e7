import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

import plotkit.cli as cli
from plotkit import (ColumnMismatchError, PlotSpec, plot_current,
                     read_trajectory_csv)

HEADER = "t,J,trace_dev,min_eig,leakage"


def write_trajectory_csv(path: Path, points=6, stderr=False):
    header = HEADER + (",J_stderr" if stderr else "")
    rows = [header]
    for k in range(points):
        t = 0.1 * k
        j = 1.0e-3 * t
        row = [t, j, 1e-15, -1e-16, 1e-9]
        if stderr:
            row.append(2e-4)
        rows.append(",".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(rows) + "\n")
    return path


def write_report(path: Path, analytic=1.0e-3):
    payload = {"slope": {"numeric": analytic * (1 + 1e-12),
                         "analytic": analytic, "rel_dev": 1e-12}}
    path.write_text(json.dumps(payload))
    return path


def test_reader_accepts_both_contracts(tmp_path):
    traj = read_trajectory_csv(write_trajectory_csv(tmp_path / "t.csv"))
    assert traj["kind"] == "trajectory"
    assert traj["t"].size == 6
    ens = read_trajectory_csv(
        write_trajectory_csv(tmp_path / "e.csv", stderr=True))
    assert ens["kind"] == "ensemble"
    assert "J_stderr" in ens


def test_reader_rejects_mutated_columns(tmp_path):
    path = tmp_path / "bad.csv"
    write_trajectory_csv(path)
    text = path.read_text().replace("trace_dev", "tracedev")
    path.write_text(text)
    with pytest.raises(ColumnMismatchError) as err:
        read_trajectory_csv(path)
    assert "trace_dev" in str(err.value)
    assert "tracedev" in str(err.value)


def test_reader_rejects_non_numeric_rows(tmp_path):
    path = tmp_path / "nan.csv"
    write_trajectory_csv(path)
    path.write_text(path.read_text().replace("0.2", "zzz", 1))
    with pytest.raises(ColumnMismatchError):
        read_trajectory_csv(path)


def test_figure_with_report_lists_both_layers(tmp_path):
    csv_path = write_trajectory_csv(tmp_path / "traj.csv")
    report = write_report(tmp_path / "slope.json")
    out = tmp_path / "fig.png"
    spec = PlotSpec(csv_paths=(csv_path,), out_path=out, report_path=report,
                    title="canonical run")
    sidecar = plot_current(spec)
    assert out.exists()
    meta = json.loads((tmp_path / "fig.png.meta.json").read_text())
    assert meta == sidecar
    kinds = {layer["kind"] for layer in meta["layers"]}
    assert {"current", "slope_line"} <= kinds
    assert meta["title"] == "canonical run"
    assert not list(tmp_path.glob("*.tmp"))


def test_ensemble_band_layer(tmp_path):
    csv_path = write_trajectory_csv(tmp_path / "ens.csv", stderr=True)
    spec = PlotSpec(csv_paths=(csv_path,), out_path=tmp_path / "band.png")
    sidecar = plot_current(spec)
    kinds = [layer["kind"] for layer in sidecar["layers"]]
    assert "error_band" in kinds


def test_rendering_is_deterministic_and_preserves_inputs(tmp_path):
    csv_path = write_trajectory_csv(tmp_path / "traj.csv")
    before = csv_path.read_bytes()
    report = write_report(tmp_path / "slope.json")
    out_a, out_b = tmp_path / "a.png", tmp_path / "b.png"
    plot_current(PlotSpec(csv_paths=(csv_path,), out_path=out_a,
                          report_path=report))
    plot_current(PlotSpec(csv_paths=(csv_path,), out_path=out_b,
                          report_path=report))
    assert out_a.read_bytes() == out_b.read_bytes()
    meta_a = (tmp_path / "a.png.meta.json").read_text()
    meta_b = (tmp_path / "b.png.meta.json").read_text()
    assert meta_a.replace("a.png", "x") == meta_b.replace("b.png", "x")
    assert csv_path.read_bytes() == before


def test_cli_happy_path(tmp_path, capsys):
    csv_path = write_trajectory_csv(tmp_path / "traj.csv")
    report = write_report(tmp_path / "slope.json")
    out = tmp_path / "cli.png"
    code = cli.main([str(csv_path), "--report", str(report),
                     "--out", str(out), "--yscale", "linear"])
    assert code == 0
    assert out.exists()
    assert "layers" in capsys.readouterr().out


def test_cli_rejects_mutated_csv(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    write_trajectory_csv(path)
    path.write_text(path.read_text().replace("leakage", "leak"))
    code = cli.main([str(path), "--out", str(tmp_path / "no.png")])
    assert code == 2
    err = capsys.readouterr().err
    assert "leakage" in err and "leak" in err
    assert not (tmp_path / "no.png").exists()


def test_cli_missing_input(tmp_path):
    assert cli.main([str(tmp_path / "ghost.csv"),
                     "--out", str(tmp_path / "g.png")]) == 1


def test_cli_bad_report(tmp_path):
    csv_path = write_trajectory_csv(tmp_path / "t.csv")
    bad = tmp_path / "report.json"
    bad.write_text(json.dumps({"not_slope": 1}))
    assert cli.main([str(csv_path), "--report", str(bad),
                     "--out", str(tmp_path / "r.png")]) == 2


def test_renders_real_wellflow_outputs(tmp_path):
    # acceptance: canonical evolve CSV plus slope report, consumed purely
    # through the command-line interface of the primary package
    if shutil.which("wellflow") is None:
        pytest.skip("wellflow CLI not installed")
    cfg = {
        "model": {"T": 0.01, "U": 1.0, "eps1": 0.5, "eps2": 0.5,
                  "lambda": 0.05},
        "basis": {"n_max": 6},
        "initial_state": {"N": 2},
        "environment": {"kind": "exponential", "mu": 2.0,
                        "G": {"real": [[1.0, 0.0, 0.0, 0.3],
                                       [0.0, 1.0, 0.1, 0.0],
                                       [0.0, 0.1, 1.0, 0.0],
                                       [0.3, 0.0, 0.0, 1.0]]}},
        "scenario": "evolve-weak",
        "time_grid": {"t_max": 1.0, "points": 11},
        "output": {"stem": "acc"},
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    subprocess.run(["wellflow", "evolve", "--config", str(cfg_path),
                    "--out", str(tmp_path), "--quiet"], check=True)
    cfg["scenario"] = "slope-weak"
    cfg_path.write_text(json.dumps(cfg))
    subprocess.run(["wellflow", "slope", "--config", str(cfg_path),
                    "--out", str(tmp_path), "--quiet"], check=True)

    out = tmp_path / "canonical.png"
    code = cli.main([str(tmp_path / "acc_trajectory.csv"),
                     "--report", str(tmp_path / "acc_slope.json"),
                     "--out", str(out), "--title", "canonical"])
    assert code == 0
    meta = json.loads((tmp_path / "canonical.png.meta.json").read_text())
    kinds = {layer["kind"] for layer in meta["layers"]}
    assert {"current", "slope_line"} <= kinds

    mutated = tmp_path / "mutated.csv"
    text = (tmp_path / "acc_trajectory.csv").read_text()
    mutated.write_text(text.replace("min_eig", "mineig"))
    assert cli.main([str(mutated), "--out", str(tmp_path / "m.png")]) == 2
