"""Render empirical-CDF CSV files as step plots.

Input files carry two columns — a value column (any name; the header
becomes the default x-label) and `cdf` — with both columns weakly
increasing and the cdf inside [0, 1].  Several files overlay into one
figure for side-by-side comparison.  Strictly read-only: nothing is
recomputed from the samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


@dataclass
class PlotSpec:
    """One figure: input CSVs, output image, labels, optional markers."""

    csv_paths: list[str]
    output: str
    labels: list[str] | None = None   # legend entries, one per input
    xlabel: str | None = None         # default: value column header
    ylabel: str = "CDF"
    title: str | None = None
    vline: float | None = None        # vertical marker (e.g. SINR target, dB)
    hline: float | None = None        # horizontal marker (e.g. outage budget)
    figsize: tuple = (6.0, 4.0)

    def validate(self) -> None:
        if not self.csv_paths:
            raise ValueError("need at least one input CSV")
        if self.labels is not None and len(self.labels) != len(self.csv_paths):
            raise ValueError("one label per input CSV required")
        if not self.output:
            raise ValueError("output path must be non-empty")


def read_cdf_csv(path: str):
    """Parse one CDF CSV into (header, values, cdf) lists.

    Raises ValueError on anything malformed: missing/extra columns,
    non-numeric cells, an empty body, a cdf outside [0, 1], or either
    column decreasing.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(header) != 2 or header[1] != "cdf":
            raise ValueError(
                f"{path}: expected header '<value>,cdf', got {header!r}")
        values: list[float] = []
        cdf: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            try:
                v, c = float(row[0]), float(row[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric cell {row!r}") from None
            values.append(v)
            cdf.append(c)
    if not values:
        raise ValueError(f"{path}: no data rows")
    for i in range(1, len(values)):
        if values[i] < values[i - 1] or cdf[i] < cdf[i - 1]:
            raise ValueError(f"{path}: columns must be weakly increasing "
                             f"(row {i + 2})")
    if cdf[0] < 0.0 or cdf[-1] > 1.0:
        raise ValueError(f"{path}: cdf outside [0, 1]")
    return header[0], values, cdf


def plot_cdf(spec: PlotSpec) -> str:
    """Draw the step plot described by `spec`; returns the output path."""
    spec.validate()
    curves = [read_cdf_csv(p) for p in spec.csv_paths]

    fig, ax = plt.subplots(figsize=spec.figsize)
    try:
        for i, (value_name, values, cdf) in enumerate(curves):
            label = spec.labels[i] if spec.labels else None
            ax.step(values, cdf, where="post", label=label)
        if spec.vline is not None:
            ax.axvline(spec.vline, color="gray", linestyle="--",
                       linewidth=1.0)
        if spec.hline is not None:
            ax.axhline(spec.hline, color="gray", linestyle="--",
                       linewidth=1.0)
        ax.set_xlabel(spec.xlabel if spec.xlabel is not None
                      else curves[0][0])
        ax.set_ylabel(spec.ylabel)
        ax.set_ylim(0.0, 1.02)
        ax.grid(True, alpha=0.3)
        if spec.title:
            ax.set_title(spec.title)
        if spec.labels:
            ax.legend(loc="best")
        fig.savefig(spec.output, bbox_inches="tight")
    finally:
        plt.close(fig)
    return spec.output
