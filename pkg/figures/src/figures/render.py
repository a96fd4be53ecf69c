"""Render convergence curves from run CSVs.

The input contract is the experiment runner's CSV schema:

    t,mean_d2,stderr_d2[,mean_j2,stderr_j2,mean_combined]

Rendering is a pure read: values go onto the axes untouched (mean curve
plus a +-1 stderr band where the series has one), statistics are never
recomputed, and inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("t", "mean_d2", "stderr_d2")
OPTIONAL_COLUMNS = ("mean_j2", "stderr_j2", "mean_combined")

# series name -> (mean column, stderr column or None, axis label)
SERIES = {
    "d2": ("mean_d2", "stderr_d2", "squared distance to the solution set"),
    "j2": ("mean_j2", "stderr_j2", "squared reward-rate error"),
    "combined": ("mean_combined", None, "combined squared error"),
}


class SchemaError(ValueError):
    """The CSV does not carry the expected columns."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: labelled input CSVs, one series, axis scales."""

    inputs: tuple[tuple[str, str], ...]  # (path, label) pairs
    series: str = "d2"
    xscale: str = "log"
    yscale: str = "log"
    output: str = "figure.png"
    title: str | None = None

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("need at least one input CSV")
        labels = [label for _, label in self.inputs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique, got {labels}")
        if self.series not in SERIES:
            raise ValueError(f"unknown series {self.series!r}, "
                             f"expected one of {sorted(SERIES)}")
        for scale in (self.xscale, self.yscale):
            if scale not in ("log", "linear"):
                raise ValueError(f"axis scale must be log or linear, got {scale!r}")

    @classmethod
    def from_dict(cls, payload: dict) -> "PlotSpec":
        inputs = tuple((str(item["path"]), str(item["label"]))
                       for item in payload.get("inputs", []))
        return cls(inputs=inputs,
                   series=payload.get("series", "d2"),
                   xscale=payload.get("xscale", "log"),
                   yscale=payload.get("yscale", "log"),
                   output=payload.get("output", "figure.png"),
                   title=payload.get("title"))


def read_run_csv(path) -> dict[str, np.ndarray]:
    """Parse a run CSV, enforcing the schema."""
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    names = lines[0].split(",")
    expected_prefix = list(REQUIRED_COLUMNS)
    if names[: len(expected_prefix)] != expected_prefix:
        missing = [c for c in expected_prefix if c not in names]
        offender = missing[0] if missing else names[0]
        raise SchemaError(f"{path}: missing or misplaced column {offender!r}")
    extra = [c for c in names[len(expected_prefix):]]
    if extra and extra != list(OPTIONAL_COLUMNS):
        offender = next((c for c in extra if c not in OPTIONAL_COLUMNS), extra[0])
        raise SchemaError(f"{path}: unexpected column {offender!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(names):
            raise SchemaError(f"{path}: row has {len(parts)} fields, "
                              f"header has {len(names)}")
        rows.append([float(p) for p in parts])
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(names)}


def render(spec: PlotSpec):
    """Draw the spec onto a fresh figure and write it to spec.output.

    Returns the matplotlib Figure so callers can inspect the plotted
    arrays; every curve's data is exactly the CSV's columns.
    """
    mean_col, err_col, ylabel = SERIES[spec.series]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for path, label in spec.inputs:
        data = read_run_csv(path)
        if mean_col not in data:
            raise SchemaError(f"{path}: series {spec.series!r} needs column "
                              f"{mean_col!r}, which is absent")
        t, mean = data["t"], data[mean_col]
        line, = ax.plot(t, mean, label=label, linewidth=1.4)
        if err_col is not None:
            err = data[err_col]
            ax.fill_between(t, mean - err, mean + err,
                            color=line.get_color(), alpha=0.25, linewidth=0)
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    return fig
