"""Render divsum experiment CSVs as static images.

One recipe per experiment id.  Rendering is deterministic: fixed style, fixed
canvas, no timestamps, so the same CSV always produces the same bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


class SchemaError(Exception):
    """The CSV does not carry a column the recipe needs."""


class NoDataError(Exception):
    """The CSV has no data rows."""


#: Fixed rendering style; never derived from the environment.
_STYLE = {
    "figure.figsize": (8.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 4.5,
    "font.size": 9,
    "svg.hashsalt": "figs",
}

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2"]


@dataclass(frozen=True)
class FigureRecipe:
    """What to draw for one experiment id."""

    experiment: str
    csv_in: str
    img_out: str
    x_column: str
    y_columns: tuple[str, ...]
    group_column: str | None = None
    log_x: bool = False
    log_y: bool = False
    split_column: str | None = None  # one subplot per value


RECIPES: dict[str, dict] = {
    "gibbs": dict(
        x_column="t",
        y_columns=("norm_fourier", "norm_cesaro"),
        group_column="structure",
        log_y=True,
    ),
    "neumann": dict(
        x_column="matrix_index",
        y_columns=("backward_error",),
        group_column="method",
        log_y=True,
    ),
    "euler": dict(
        x_column="alpha",
        y_columns=("mean_log10_forward_error",),
        group_column="method",
    ),
    "lambert": dict(
        x_column="m",
        y_columns=("value_norm",),
        group_column="delta",
        log_y=True,
    ),
    "floatsum": dict(
        x_column="size",
        y_columns=("forward_error",),
        group_column="kernel",
        log_x=True,
        log_y=True,
        split_column="sweep",
    ),
}


def recipe_for(experiment: str, csv_in: str, img_out: str) -> FigureRecipe:
    if experiment not in RECIPES:
        raise SchemaError(f"no recipe for experiment {experiment!r}; known: {sorted(RECIPES)}")
    return FigureRecipe(experiment=experiment, csv_in=csv_in, img_out=img_out, **RECIPES[experiment])


def _read_rows(path: str) -> tuple[list[str], list[dict]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise NoDataError(f"{path}: empty CSV")
        rows = list(reader)
    if not rows:
        raise NoDataError(f"{path}: no data rows")
    return list(reader.fieldnames), rows


def _column(rows: list[dict], name: str, path: str) -> list[str]:
    out = []
    for row in rows:
        if name not in row or row[name] is None:
            raise SchemaError(f"{path}: missing column {name!r}")
        out.append(row[name])
    return out


def _floats(values: list[str]) -> list[float]:
    return [float(v) for v in values]


def render(recipe: FigureRecipe) -> str:
    """Draw the recipe and write the image; returns the output path."""
    _, rows = _read_rows(recipe.csv_in)
    # Validate every referenced column up front so errors name the column.
    for col in (recipe.x_column, *recipe.y_columns):
        _column(rows, col, recipe.csv_in)
    if recipe.group_column:
        _column(rows, recipe.group_column, recipe.csv_in)
    if recipe.split_column:
        _column(rows, recipe.split_column, recipe.csv_in)

    with plt.rc_context(_STYLE):
        if recipe.split_column:
            splits = sorted({row[recipe.split_column] for row in rows})
            fig, axes = plt.subplots(1, len(splits), figsize=(8.0 * len(splits) / 1.6, 5.0))
            if len(splits) == 1:
                axes = [axes]
            for ax, split in zip(axes, splits):
                subset = [r for r in rows if r[recipe.split_column] == split]
                _draw(ax, recipe, subset)
                ax.set_title(f"{recipe.experiment}: {recipe.split_column}={split}")
        else:
            fig, ax = plt.subplots()
            _draw(ax, recipe, rows)
            ax.set_title(recipe.experiment)
        fig.tight_layout()
        Path(recipe.img_out).parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(recipe.img_out, metadata=_metadata_for(recipe.img_out))
        plt.close(fig)
    return recipe.img_out


def _metadata_for(path: str):
    # Strip environment-dependent metadata; PNG would otherwise embed the
    # matplotlib version and SVG/PDF a creation date.
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return {"Software": "figs"}
    if suffix == ".svg":
        return {"Date": None}
    return None


def _draw(ax, recipe: FigureRecipe, rows: list[dict]) -> None:
    groups: list[tuple[str, list[dict]]]
    if recipe.group_column:
        keys = []
        for row in rows:
            key = row[recipe.group_column]
            if key not in keys:
                keys.append(key)
        groups = [(k, [r for r in rows if r[recipe.group_column] == k]) for k in keys]
    else:
        groups = [("", rows)]

    color_index = 0
    for key, subset in groups:
        xs = _floats(_column(subset, recipe.x_column, recipe.csv_in))
        for y_col in recipe.y_columns:
            ys = _floats(_column(subset, y_col, recipe.csv_in))
            pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
            if not pts:
                continue
            pts.sort(key=lambda p: p[0])
            label = f"{key} {y_col}".strip()
            color = _COLORS[color_index % len(_COLORS)]
            color_index += 1
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label, color=color)
    if recipe.log_x:
        ax.set_xscale("log", base=10)
    if recipe.log_y:
        ax.set_yscale("log", base=10)
    ax.set_xlabel(recipe.x_column)
    ax.set_ylabel(", ".join(recipe.y_columns))
    ax.legend(loc="best", fontsize=7)
