"""Figure rendering for fdrelay sweep CSVs.

A render is a pure function of (CSV bytes, recipe): fixed figure geometry,
fixed style tables, no clock or environment lookups, and PNG metadata
stripped, so byte-identical inputs give byte-identical images under a pinned
toolkit version.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_HEADER = ["axis", "scheme", "engine", "value", "ci95"]
FAMILIES = ("throughput-vs-alpha", "outage-vs-ps", "delay-vs-alpha", "delay-vs-li")
SCHEMES = ("opt", "tzf", "rzf", "mrc")
ENGINES = ("analytic", "asymptotic", "mc")

_COLORS = {"opt": "#1f77b4", "tzf": "#d62728", "rzf": "#2ca02c", "mrc": "#9467bd"}
_LABELS = {"opt": "optimum", "tzf": "TZF", "rzf": "RZF", "mrc": "MRC/MRT"}
_MARKERS = {"opt": "o", "tzf": "s", "rzf": "^", "mrc": "v"}

DPI = 120


class SchemaError(ValueError):
    """CSV does not match the sweep contract."""


@dataclass(frozen=True)
class FigureRecipe:
    csv_path: str
    figure_family: str
    x_label: str
    y_label: str
    log_y: bool
    out_path: str

    def __post_init__(self) -> None:
        if self.figure_family not in FAMILIES:
            raise ValueError(f"unknown figure family: {self.figure_family!r}")

    @classmethod
    def from_json_file(cls, path: str) -> "FigureRecipe":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("recipe must be a flat JSON object")
        keys = {"csv_path", "figure_family", "x_label", "y_label", "log_y", "out_path"}
        missing = keys - raw.keys()
        if missing:
            raise ValueError(f"recipe missing keys: {sorted(missing)}")
        extra = raw.keys() - keys
        if extra:
            raise ValueError(f"recipe has unknown keys: {sorted(extra)}")
        return cls(csv_path=str(raw["csv_path"]),
                   figure_family=str(raw["figure_family"]),
                   x_label=str(raw["x_label"]), y_label=str(raw["y_label"]),
                   log_y=bool(raw["log_y"]), out_path=str(raw["out_path"]))


def parse_rows(text: str):
    """Validate the sweep CSV schema and return typed rows."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: expected header "
                          + ",".join(EXPECTED_HEADER)) from None
    if header != EXPECTED_HEADER:
        raise SchemaError(f"bad header: expected {EXPECTED_HEADER}, got {header}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise SchemaError(f"line {lineno}: expected 5 columns, got {len(row)}")
        axis_s, scheme, engine, value_s, ci_s = row
        if scheme not in SCHEMES:
            raise SchemaError(f"line {lineno}: unknown scheme {scheme!r}")
        if engine not in ENGINES:
            raise SchemaError(f"line {lineno}: unknown engine {engine!r}")
        try:
            rows.append((float(axis_s), scheme, engine, float(value_s), float(ci_s)))
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    return rows


def render(recipe: FigureRecipe) -> str:
    """Render one recipe to its output image; returns the output path."""
    with open(recipe.csv_path, "r", encoding="utf-8") as fh:
        rows = parse_rows(fh.read())

    series: dict = {}
    for axis, scheme, engine, value, ci in rows:
        series.setdefault((scheme, engine), []).append((axis, value, ci))

    fig, ax = plt.subplots(figsize=(6.4, 4.6), dpi=DPI)
    for scheme in SCHEMES:
        for engine in ENGINES:
            pts = series.get((scheme, engine))
            if not pts:
                continue
            pts.sort()
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            cis = [p[2] for p in pts]
            color = _COLORS[scheme]
            if engine == "analytic":
                ax.plot(xs, ys, "-", color=color, linewidth=1.6,
                        label=f"{_LABELS[scheme]} (analytic)")
            elif engine == "asymptotic":
                ax.plot(xs, ys, "--", color=color, linewidth=1.2,
                        label=f"{_LABELS[scheme]} (asymptotic)")
            else:
                ax.errorbar(xs, ys, yerr=cis, fmt=_MARKERS[scheme], color=color,
                            markersize=4.5, linestyle="none", capsize=2.5,
                            label=f"{_LABELS[scheme]} (simulation)")
    if recipe.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(recipe.x_label)
    ax.set_ylabel(recipe.y_label)
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    # strip writer metadata so identical inputs hash identically
    fig.savefig(recipe.out_path, format="png", dpi=DPI,
                metadata={"Software": None})
    plt.close(fig)
    return recipe.out_path
