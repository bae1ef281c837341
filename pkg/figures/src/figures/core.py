"""Power-curve panels and the empirical-size text table.

Input is the results CSV emitted by the experiment harness (header
``n,p,design,method,s,rejection_rate,mc_se,replications,B,wall_time_s``);
the file is only ever read.  Rendering is static and deterministic:
the Agg backend is selected at import so repeated renders of the same
CSV produce byte-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

__all__ = [
    "ColumnMissing",
    "EmptySelection",
    "FigureSpec",
    "PanelInfo",
    "load_results",
    "render_power_curves",
    "render_size_table",
]

# Canonical display order for known methods; unknown labels follow
# alphabetically after these.
_METHOD_ORDER = ("CC", "MAX", "MAX_BOOT", "SUM", "COM")

_MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")

_MISSING_CELL = "—"  # em dash


class ColumnMissing(ValueError):
    """The input CSV lacks a column the renderer needs."""


class EmptySelection(ValueError):
    """No rows remain after selecting what the renderer plots."""


@dataclass(frozen=True)
class FigureSpec:
    """What to read, where to render, and which columns drive the plot."""

    input_csv_path: Path
    output_dir: Path
    panel_key: str = "design"
    x_key: str = "s"
    series_key: str = "method"
    y_key: str = "rejection_rate"
    image_format: str = "png"
    dpi: int = 150
    alpha: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "input_csv_path", Path(self.input_csv_path))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.dpi < 1:
            raise ValueError(f"dpi: must be >= 1, got {self.dpi}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha: must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class PanelInfo:
    """Summary of one rendered panel: output path and series sizes."""

    panel: str
    path: Path
    series: dict[str, int] = field(default_factory=dict)


def load_results(path) -> pd.DataFrame:
    """Read a harness results CSV without modifying the file."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"design": str, "method": str})
    except OSError as exc:
        raise OSError(f"failed reading results CSV {path}: {exc}") from exc
    return frame


def _require_columns(frame: pd.DataFrame, columns, path) -> None:
    for column in columns:
        if column not in frame.columns:
            raise ColumnMissing(f"{path}: missing column {column!r}")


def _method_sort_key(label: str):
    try:
        return (0, _METHOD_ORDER.index(label))
    except ValueError:
        return (1, label)


def render_power_curves(spec: FigureSpec) -> tuple[PanelInfo, ...]:
    """Render one rejection-rate-versus-sparsity panel per design.

    Each panel holds one line per method, the y-axis spans [0, 1], and
    a dashed horizontal line marks the nominal level.  Files are named
    ``power_<panel>.<format>`` inside the output directory.
    """
    frame = load_results(spec.input_csv_path)
    _require_columns(
        frame,
        (spec.panel_key, spec.x_key, spec.series_key, spec.y_key),
        spec.input_csv_path,
    )
    frame = frame[frame[spec.x_key].notna()]
    if frame.empty:
        raise EmptySelection(
            f"{spec.input_csv_path}: no rows with a {spec.x_key!r} value to plot"
        )

    spec.output_dir.mkdir(parents=True, exist_ok=True)
    panels = []
    for panel_value in sorted(frame[spec.panel_key].unique()):
        subset = frame[frame[spec.panel_key] == panel_value]
        labels = sorted(subset[spec.series_key].unique(), key=_method_sort_key)
        fig, ax = plt.subplots(figsize=(5.0, 3.75))
        series_sizes: dict[str, int] = {}
        for i, label in enumerate(labels):
            line = subset[subset[spec.series_key] == label].sort_values(spec.x_key)
            ax.plot(
                line[spec.x_key],
                line[spec.y_key],
                marker=_MARKERS[i % len(_MARKERS)],
                markersize=4,
                linewidth=1.2,
                label=str(label),
            )
            series_sizes[str(label)] = len(line)
        ax.axhline(
            spec.alpha, color="gray", linestyle="--", linewidth=1.0,
            label=f"level {spec.alpha:g}",
        )
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel(spec.x_key)
        ax.set_ylabel(spec.y_key.replace("_", " "))
        ax.set_title(f"{spec.panel_key} {panel_value}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        out = spec.output_dir / f"power_{panel_value}.{spec.image_format}"
        fig.savefig(out, dpi=spec.dpi)
        plt.close(fig)
        panels.append(PanelInfo(panel=str(panel_value), path=out, series=series_sizes))
    return tuple(panels)


def _format_block(block: pd.DataFrame, n_value) -> list[str]:
    designs = sorted(block["design"].unique())
    ps = sorted(block["p"].unique())
    methods = sorted(block["method"].unique(), key=_method_sort_key)

    cells: dict[tuple[str, int, str], str] = {}
    for row in block.itertuples(index=False):
        key = (row.design, row.p, row.method)
        if key in cells:
            raise ValueError(
                f"duplicate rows for n={n_value}, design={row.design}, "
                f"p={row.p}, method={row.method}"
            )
        cells[key] = f"{row.rejection_rate * 100.0:.1f}"

    label_width = max(
        len("design"), len("p"), max(len(m) for m in methods)
    )
    value_width = max(
        6,
        max(len(str(p)) for p in ps),
        max(len(d) for d in designs),
    )

    def line(head: str, values) -> str:
        out = head.ljust(label_width)
        for value in values:
            out += " " + str(value).rjust(value_width)
        return out

    columns = [(d, p) for d in designs for p in ps]
    lines = [f"n = {n_value}"]
    lines.append(line("design", [d for d, _ in columns]))
    lines.append(line("p", [p for _, p in columns]))
    for method in methods:
        lines.append(
            line(method, [cells.get((d, p, method), _MISSING_CELL) for d, p in columns])
        )
    return lines


def render_size_table(input_csv, out_path) -> str:
    """Write the empirical-size table and return its text.

    One block per sample size: a ``design`` header row, a ``p`` header
    row, then one row per method with rejection rates in percent to one
    decimal.  Cells with no matching row render as an em dash.
    """
    input_csv = Path(input_csv)
    frame = load_results(input_csv)
    _require_columns(
        frame, ("n", "p", "design", "method", "rejection_rate"), input_csv
    )
    if frame.empty:
        raise EmptySelection(f"{input_csv}: no rows to tabulate")

    blocks = []
    for n_value in sorted(frame["n"].unique()):
        blocks.append("\n".join(_format_block(frame[frame["n"] == n_value], n_value)))
    text = "\n\n".join(blocks) + "\n"

    out_path = Path(out_path)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return text
