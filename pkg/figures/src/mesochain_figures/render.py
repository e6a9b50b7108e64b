"""Render comparison figures from mesochain CSV outputs.

Consumes only the documented CSV contract of the simulation package:

* ``snapshot_t*.csv`` with columns x, rho_bar, v_bar, Tc_exact, Tc_closed,
  Tc_zero, Tint_exact, Tint_closed, Tint_zero
* optional ``fields_t*.csv`` with columns y, J_exact, J_rec, J_zero,
  v_exact, v_rec, v_zero
* optional demo files ``demo_truth.csv``, ``demo_average.csv``,
  ``demo_reconstruction.csv``

Line styles follow the usual comparison convention: exact quantities as a
thin solid line, closed/reconstructed as a thick solid line, averages and
zero-order closures dashed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "FigureSpec",
    "MissingColumnError",
    "load_columns",
    "render",
    "render_run",
]

SNAPSHOT_COLUMNS = ["x", "rho_bar", "v_bar", "Tc_exact", "Tc_closed", "Tc_zero",
                    "Tint_exact", "Tint_closed", "Tint_zero"]
FIELD_COLUMNS = ["y", "J_exact", "J_rec", "J_zero", "v_exact", "v_rec", "v_zero"]

EXACT_STYLE = dict(color="tab:red", linewidth=0.9)
CLOSED_STYLE = dict(color="black", linewidth=1.8)
ZERO_STYLE = dict(color="tab:green", linewidth=1.2, linestyle="--")

_DPI = 130


class MissingColumnError(KeyError):
    """A required column is absent from a CSV header."""


@dataclass(frozen=True)
class Panel:
    title: str
    ylabel: str
    series: list[tuple[str, str, dict]]  # (column, label, style)


@dataclass(frozen=True)
class FigureSpec:
    """One output image: CSV source, panel layout and optional zoom window."""

    csv_path: Path
    panels: list[Panel]
    x_column: str = "x"
    zoom: tuple[float, float] | None = None
    title: str = ""


def load_columns(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    """Read a CSV into named float arrays, validating the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingColumnError(f"{path}: empty file")
        missing = [col for col in required if col not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing columns {missing}")
        index = {name: header.index(name) for name in header}
        rows = [[float(tok) for tok in row] for row in reader if row]
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for name, i in index.items()}


def render(spec: FigureSpec, out_path: Path) -> Path:
    """Render one figure spec to an image file; deterministic given inputs."""
    required = [spec.x_column] + [col for panel in spec.panels
                                  for col, _, _ in panel.series]
    data = load_columns(spec.csv_path, required)
    x = data[spec.x_column]
    if spec.zoom is not None:
        lo, hi = spec.zoom
        mask = (x >= lo) & (x <= hi)
    else:
        mask = slice(None)

    fig, axes = plt.subplots(1, len(spec.panels),
                             figsize=(5.2 * len(spec.panels), 3.4))
    if len(spec.panels) == 1:
        axes = [axes]
    for ax, panel in zip(axes, spec.panels):
        for column, label, style in panel.series:
            ax.plot(x[mask], data[column][mask], label=label, **style)
        ax.set_title(panel.title)
        ax.set_xlabel(spec.x_column)
        ax.set_ylabel(panel.ylabel)
        if spec.zoom is not None:
            ax.set_xlim(*spec.zoom)
        ax.legend(fontsize=8)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def _stress_spec(csv_path: Path, zoom) -> FigureSpec:
    return FigureSpec(
        csv_path=csv_path,
        panels=[
            Panel("convective stress", "T_c", [
                ("Tc_exact", "exact", EXACT_STYLE),
                ("Tc_closed", "closed", CLOSED_STYLE),
                ("Tc_zero", "zero-order", ZERO_STYLE),
            ]),
            Panel("interaction stress", "T_int", [
                ("Tint_exact", "exact", EXACT_STYLE),
                ("Tint_closed", "closed", CLOSED_STYLE),
                ("Tint_zero", "zero-order", ZERO_STYLE),
            ]),
        ],
        zoom=zoom,
        title=csv_path.stem,
    )


def _averages_spec(csv_path: Path, zoom) -> FigureSpec:
    return FigureSpec(
        csv_path=csv_path,
        panels=[
            Panel("average density", "rho_bar",
                  [("rho_bar", "rho_bar", CLOSED_STYLE)]),
            Panel("average velocity", "v_bar",
                  [("v_bar", "v_bar", CLOSED_STYLE)]),
        ],
        zoom=zoom,
        title=csv_path.stem,
    )


def _fields_spec(csv_path: Path, zoom) -> FigureSpec:
    return FigureSpec(
        csv_path=csv_path,
        x_column="y",
        panels=[
            Panel("velocity reconstruction", "v", [
                ("v_exact", "exact", EXACT_STYLE),
                ("v_rec", "reconstructed", CLOSED_STYLE),
                ("v_zero", "average", ZERO_STYLE),
            ]),
            Panel("Jacobian reconstruction", "J", [
                ("J_exact", "exact", EXACT_STYLE),
                ("J_rec", "reconstructed", CLOSED_STYLE),
                ("J_zero", "average", ZERO_STYLE),
            ]),
        ],
        zoom=zoom,
        title=csv_path.stem,
    )


def _render_demo(run_dir: Path, out_dir: Path, zoom) -> list[Path]:
    truth = run_dir / "demo_truth.csv"
    average = run_dir / "demo_average.csv"
    recon = run_dir / "demo_reconstruction.csv"
    if not (truth.exists() and average.exists() and recon.exists()):
        return []
    out = []
    out.append(render(FigureSpec(
        csv_path=truth,
        x_column="y",
        panels=[
            Panel("profile", "g", [("clean", "clean", CLOSED_STYLE)]),
            Panel("profile with noise", "g", [("noisy", "noisy", EXACT_STYLE)]),
        ],
        zoom=zoom, title="demo ground truth"),
        out_dir / "demo_truth.png"))
    out.append(render(FigureSpec(
        csv_path=average, x_column="x",
        panels=[Panel("average", "g_bar", [("g_bar", "average", ZERO_STYLE)])],
        zoom=zoom, title="demo average"),
        out_dir / "demo_average.png"))
    out.append(render(FigureSpec(
        csv_path=recon, x_column="y",
        panels=[Panel("reconstruction", "g", [
            ("reconstruction", "reconstruction", CLOSED_STYLE)])],
        zoom=zoom, title="demo reconstruction"),
        out_dir / "demo_reconstruction.png"))
    return out


def render_run(run_dir: str | Path, zoom: tuple[float, float] | None = None,
               out_dir: str | Path | None = None) -> list[Path]:
    """Render every recognized CSV in a run directory; returns written paths.

    Read-only with respect to the run directory: images go to ``out_dir``
    (default ``<run_dir>/figures``).
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory {run_dir} does not exist")
    out = Path(out_dir) if out_dir is not None else run_dir / "figures"
    written: list[Path] = []
    for csv_path in sorted(run_dir.glob("snapshot_t*.csv")):
        stem = csv_path.stem
        written.append(render(_stress_spec(csv_path, zoom),
                              out / f"{stem}_stress.png"))
        written.append(render(_averages_spec(csv_path, zoom),
                              out / f"{stem}_averages.png"))
    for csv_path in sorted(run_dir.glob("fields_t*.csv")):
        written.append(render(_fields_spec(csv_path, zoom),
                              out / f"{csv_path.stem}_reconstruction.png"))
    written.extend(_render_demo(run_dir, out, zoom))
    if not written:
        raise FileNotFoundError(f"no mesochain CSV outputs found in {run_dir}")
    return written
