"""Render wellflow trajectory/ensemble CSV files into figures.

Inputs are consumed strictly through the file contracts: trajectory CSV
columns ``t,J,trace_dev,min_eig,leakage`` (ensemble files append
``J_stderr``) and the slope-report JSON written by ``wellflow slope``.
Every figure gets a sidecar ``<figure>.meta.json`` listing data sources
and drawn layers, so tests can assert figure content without image
diffing.  Outputs are written atomically (temp file, then rename) and are
deterministic for identical inputs: fixed style, fixed metadata, no
timestamps.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

TRAJECTORY_COLUMNS = ("t", "J", "trace_dev", "min_eig", "leakage")
ENSEMBLE_COLUMNS = TRAJECTORY_COLUMNS + ("J_stderr",)
_PNG_METADATA = {"Software": "plotkit"}
_DIAG_FLOOR = 1e-18


class ColumnMismatchError(ValueError):
    """CSV columns do not match the trajectory/ensemble contract."""


class ReportFormatError(ValueError):
    """Slope-report JSON lacks the expected fields."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure: input CSVs, optional slope report, output path."""

    csv_paths: tuple
    out_path: Path
    report_path: Path | None = None
    title: str = ""
    yscale: str = "linear"

    def __post_init__(self):
        paths = tuple(Path(p) for p in self.csv_paths)
        if not paths:
            raise ValueError("at least one input CSV is required")
        if self.yscale not in ("linear", "log"):
            raise ValueError(f"yscale must be 'linear' or 'log', "
                             f"got {self.yscale!r}")
        object.__setattr__(self, "csv_paths", paths)
        object.__setattr__(self, "out_path", Path(self.out_path))
        if self.report_path is not None:
            object.__setattr__(self, "report_path", Path(self.report_path))


def _column_diff(found, expected):
    missing = [c for c in expected if c not in found]
    extra = [c for c in found if c not in expected]
    parts = []
    if missing:
        parts.append(f"missing {missing}")
    if extra:
        parts.append(f"unexpected {extra}")
    if not parts:
        parts.append(f"order differs: found {list(found)}")
    return "; ".join(parts)


def read_trajectory_csv(path: Path) -> dict:
    """Parse one CSV under the column contract; returns column arrays."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input CSV not found: {path}")
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ColumnMismatchError(f"{path}: empty file, no header")
    header = tuple(rows[0])
    if header == TRAJECTORY_COLUMNS:
        kind = "trajectory"
    elif header == ENSEMBLE_COLUMNS:
        kind = "ensemble"
    else:
        raise ColumnMismatchError(
            f"{path}: header does not match the contract "
            f"({_column_diff(header, ENSEMBLE_COLUMNS)})")
    body = rows[1:]
    if not body:
        raise ColumnMismatchError(f"{path}: no data rows")
    data = {}
    try:
        table = np.array([[float(cell) for cell in row] for row in body])
    except ValueError as exc:
        raise ColumnMismatchError(f"{path}: non-numeric cell ({exc})") from exc
    if table.shape[1] != len(header):
        raise ColumnMismatchError(
            f"{path}: row width {table.shape[1]} != header width {len(header)}")
    for k, name in enumerate(header):
        data[name] = table[:, k]
    data["kind"] = kind
    data["path"] = path
    return data


def read_slope_report(path: Path) -> dict:
    """Extract the slope block from a wellflow slope-report JSON."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"slope report not found: {path}")
    payload = json.loads(path.read_text())
    block = payload.get("slope")
    if not isinstance(block, dict) or "analytic" not in block:
        raise ReportFormatError(
            f"{path}: expected a 'slope' object with an 'analytic' entry")
    return {"analytic": float(block["analytic"]),
            "numeric": float(block.get("numeric", block["analytic"])),
            "path": path}


def _atomic_save(render, target: Path):
    tmp = target.with_name(target.name + ".tmp")
    try:
        render(tmp)
        os.replace(tmp, target)
    finally:
        if tmp.exists():
            tmp.unlink()


def plot_current(spec: PlotSpec) -> dict:
    """Render the figure and its sidecar; returns the sidecar payload."""
    tables = [read_trajectory_csv(p) for p in spec.csv_paths]
    report = (read_slope_report(spec.report_path)
              if spec.report_path is not None else None)

    fig, (ax_j, ax_diag) = plt.subplots(
        2, 1, figsize=(7.0, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1.0]})
    layers = []
    for table in tables:
        label = table["path"].name
        ax_j.plot(table["t"], table["J"], marker="o", markersize=3,
                  linewidth=1.2, label=label)
        layers.append({"kind": "current", "source": label})
        if table["kind"] == "ensemble":
            band = 3.0 * table["J_stderr"]
            ax_j.fill_between(table["t"], table["J"] - band,
                              table["J"] + band, alpha=0.25, linewidth=0)
            layers.append({"kind": "error_band", "source": label,
                           "half_width": "3*J_stderr"})
        ax_diag.semilogy(table["t"],
                         np.maximum(table["trace_dev"], _DIAG_FLOOR),
                         linewidth=1.0, label=f"trace dev {label}")
        ax_diag.semilogy(table["t"],
                         np.maximum(table["leakage"], _DIAG_FLOOR),
                         linewidth=1.0, linestyle="--",
                         label=f"leakage {label}")
        layers.append({"kind": "diagnostics", "source": label})
    if report is not None:
        t_all = np.concatenate([table["t"] for table in tables])
        t_line = np.array([0.0, t_all.max()])
        ax_j.plot(t_line, report["analytic"] * t_line, linestyle=":",
                  linewidth=1.5, color="black",
                  label=f"slope {report['analytic']:.3e}")
        layers.append({"kind": "slope_line", "source": report["path"].name,
                       "analytic": report["analytic"]})

    ax_j.set_ylabel("mean current")
    ax_j.set_yscale(spec.yscale)
    ax_j.legend(loc="best", fontsize=8)
    if spec.title:
        ax_j.set_title(spec.title)
    ax_diag.set_xlabel("time")
    ax_diag.set_ylabel("diagnostics")
    ax_diag.legend(loc="best", fontsize=7)
    fig.tight_layout()

    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_save(lambda tmp: fig.savefig(tmp, format=spec.out_path.suffix
                                         .lstrip(".") or "png",
                                         dpi=120, metadata=_PNG_METADATA),
                 spec.out_path)
    plt.close(fig)

    sidecar = {
        "figure": spec.out_path.name,
        "sources": [str(p) for p in spec.csv_paths],
        "report": str(spec.report_path) if spec.report_path else None,
        "layers": layers,
        "points": int(sum(t["t"].size for t in tables)),
        "title": spec.title,
        "yscale": spec.yscale,
    }
    sidecar_path = spec.out_path.with_name(spec.out_path.name + ".meta.json")
    _atomic_save(lambda tmp: tmp.write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n"), sidecar_path)
    return sidecar
