"""Figure construction from bench/analyze CSV files.

Figures are regeneration artifacts: rendering is read-only over the CSV
and every plotted series comes verbatim from its columns, so identical CSV
input yields identical series data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("work-precision", "seq-work-precision", "speedup-vs-threads", "scaled-stability")


class FigureKitError(ValueError):
    pass


class MissingColumnsError(FigureKitError):
    def __init__(self, missing, available):
        super().__init__(
            f"CSV is missing column(s) {sorted(missing)}; available: {sorted(available)}"
        )
        self.missing = sorted(missing)
        self.available = sorted(available)


@dataclass
class FigureSpec:
    kind: str
    csv_paths: list[str]
    out_path: str
    theory_order: int | None = None
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureKitError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.csv_paths:
            raise FigureKitError("at least one CSV path is required")


def read_rows(path) -> list[dict]:
    """Parse one CSV file, skipping '#' provenance comments."""
    text = Path(path).read_text().splitlines()
    lines = [ln for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FigureKitError(f"{path}: empty CSV")
    rows = list(csv.DictReader(lines))
    if not rows:
        raise FigureKitError(f"{path}: CSV has a header but no data rows")
    return rows


def _require(rows, columns, path):
    available = set(rows[0].keys())
    missing = set(columns) - available
    if missing:
        raise MissingColumnsError(missing, available)


def _series_by(rows, key):
    order = []
    groups = {}
    for row in rows:
        k = row[key]
        if k not in groups:
            groups[k] = []
            order.append(k)
        groups[k].append(row)
    return [(k, groups[k]) for k in order]


def make_figure(spec: FigureSpec):
    """Build the matplotlib figure; returns (figure, series_data).

    series_data maps label -> (x_list, y_list) exactly as plotted, for
    verification against the CSV.
    """
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path))
    builder = {
        "work-precision": _work_precision,
        "seq-work-precision": _work_precision_seq,
        "speedup-vs-threads": _speedup,
        "scaled-stability": _scaled_stability,
    }[spec.kind]
    fig, data = builder(spec, rows)
    if spec.title:
        fig.axes[0].set_title(spec.title)
    return fig, data


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.out_path; returns the path written."""
    fig, _ = make_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return str(out)


def _finite_ok(row):
    return row.get("status", "ok").startswith("ok") or row.get("status", "") == ""


def _work_precision_core(spec, rows, cost_column):
    _require(rows, ("method", "error", cost_column), spec.csv_paths[0])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    data = {}
    for label, group in _series_by(rows, "method"):
        pts = [
            (float(r["error"]), float(r[cost_column]))
            for r in group
            if _finite_ok(r) and math.isfinite(float(r["error"]))
        ]
        if not pts:
            continue
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.loglog(xs, ys, marker="o", label=label)
        data[label] = (xs, ys)
    if not data:
        raise FigureKitError("no plottable rows (all failed or non-finite)")
    ax.set_xlabel(spec.xlabel or "error")
    ax.set_ylabel(spec.ylabel or cost_column.replace("_", " "))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return fig, data


def _work_precision(spec, rows):
    return _work_precision_core(spec, rows, "f_evals")


def _work_precision_seq(spec, rows):
    return _work_precision_core(spec, rows, "f_evals_seq")


def _speedup(spec, rows):
    _require(rows, ("method", "workers", "wall_time"), spec.csv_paths[0])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    data = {}
    for label, group in _series_by(rows, "method"):
        by_workers = {}
        for r in group:
            if _finite_ok(r):
                by_workers.setdefault(int(r["workers"]), []).append(float(r["wall_time"]))
        if 1 not in by_workers:
            raise FigureKitError(
                f"{label}: speedup needs a workers=1 baseline; have {sorted(by_workers)}"
            )
        base = min(by_workers[1])
        xs = sorted(by_workers)
        ys = [base / min(by_workers[w]) for w in xs]
        ax.plot(xs, ys, marker="o", label=label)
        data[label] = (xs, ys)
    if spec.theory_order:
        p = spec.theory_order
        theory = (p * p + 4) / (4 * p)
        ax.axhline(theory, linestyle=":", color="k", label=f"theory {theory:.2f}")
        data["theory"] = ([], [theory])
    ax.set_xlabel(spec.xlabel or "threads")
    ax.set_ylabel(spec.ylabel or "speedup")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig, data


def _scaled_stability(spec, rows):
    _require(rows, ("label", "s", "I_real"), spec.csv_paths[0])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    labels = [r["label"] for r in rows]
    values = [float(r["I_real"]) / float(r["s"]) for r in rows]
    ax.bar(range(len(labels)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(spec.ylabel or "I_real / s")
    ax.grid(True, axis="y", alpha=0.3)
    return fig, {"scaled-stability": (labels, values)}
