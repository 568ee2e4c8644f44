"""Report rendering: plain-text tables, CSV rows and matplotlib figures.

The CLI's evaluate/detect paths call into here so every report exists both as
delimited output (machine-readable) and, on request, as a rendered figure.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bites import BiteSet
from .meals import MealIntervalSet
from .metrics import EvalReport

BITE_COLUMNS = ["label", "tp", "fp", "fn", "precision", "recall", "f1"]
MEAL_COLUMNS = [
    "label", "tp", "fp", "fn", "tn", "precision", "recall", "specificity",
    "f1", "accuracy", "weighted_accuracy", "jaccard",
]


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def bite_report_row(label: str, report: EvalReport) -> dict:
    c = report.confusion
    return {
        "label": label, "tp": c.tp, "fp": c.fp, "fn": c.fn,
        "precision": report.precision, "recall": report.recall, "f1": report.f1,
    }


def meal_report_row(label: str, report: EvalReport) -> dict:
    c = report.confusion
    return {
        "label": label, "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
        "precision": report.precision, "recall": report.recall,
        "specificity": report.specificity, "f1": report.f1,
        "accuracy": report.accuracy,
        "weighted_accuracy": report.weighted_accuracy,
        "jaccard": report.jaccard,
    }


def format_table(columns: list[str], rows: list[dict]) -> str:
    cells = [[_fmt(row.get(col)) for col in columns] for row in rows]
    widths = [
        max(len(col), *(len(r[i]) for r in cells)) if cells else len(col)
        for i, col in enumerate(columns)
    ]
    lines = ["  ".join(col.ljust(w) for col, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def write_csv(path: str | Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in columns})


def save_prediction_figure(
    path: str | Path,
    probs: np.ndarray,
    fs_hz: float,
    bites: BiteSet,
    lambda_p: float,
    downsample: int = 4,
) -> None:
    """Prediction series with the detection threshold and picked peaks."""
    t = np.arange(len(probs)) * downsample / fs_hz
    fig, ax = plt.subplots(figsize=(10, 3.2))
    ax.plot(t, probs, lw=0.7, color="tab:blue", label="bite probability")
    ax.axhline(lambda_p, color="tab:red", ls="--", lw=0.8, label=f"threshold {lambda_p}")
    if len(bites):
        idx = np.clip((bites.timestamps_s * fs_hz / downsample).astype(int), 0, len(probs) - 1)
        ax.plot(bites.timestamps_s, probs[idx], "x", color="tab:red", ms=7,
                label="detected bite")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_localization_figure(
    path: str | Path,
    smoothed: np.ndarray,
    fs_hz: float,
    lambda_s: float,
    est: MealIntervalSet,
    truth: MealIntervalSet | None = None,
    downsample: int = 4,
) -> None:
    """Smoothed bite density, the region threshold and the final intervals."""
    t = np.arange(len(smoothed)) * downsample / fs_hz
    fig, ax = plt.subplots(figsize=(10, 3.2))
    ax.plot(t, smoothed, lw=0.8, color="tab:blue", label="smoothed bite density")
    ax.axhline(lambda_s, color="tab:red", ls="--", lw=0.8, label="region threshold")
    for i, (start, end) in enumerate(est.intervals):
        ax.axvspan(start, end, color="tab:green", alpha=0.3,
                   label="estimated meal" if i == 0 else None)
    if truth is not None:
        for i, (start, end) in enumerate(truth.intervals):
            ax.axvspan(start, end, color="tab:gray", alpha=0.25,
                       label="true meal" if i == 0 else None)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("density")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bite_match_figure(
    path: str | Path,
    detections: BiteSet,
    truth_intervals,
    duration_s: float,
) -> None:
    """Ground-truth intake intervals with detected instants on top."""
    fig, ax = plt.subplots(figsize=(10, 2.0))
    for i, b in enumerate(truth_intervals):
        ax.axvspan(b.start_s, b.end_s, color="tab:gray", alpha=0.4,
                   label="truth interval" if i == 0 else None)
    if len(detections):
        ax.plot(detections.timestamps_s, np.full(len(detections), 0.5), "x",
                color="tab:red", ms=7, label="detection")
    ax.set_xlim(0, duration_s)
    ax.set_yticks([])
    ax.set_xlabel("time (s)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_interval_timeline_figure(
    path: str | Path,
    est: MealIntervalSet,
    truth: MealIntervalSet,
    duration_s: float,
) -> None:
    """Estimated vs. true meal intervals as two horizontal lanes."""
    fig, ax = plt.subplots(figsize=(10, 2.2))
    for start, end in truth.intervals:
        ax.barh(1, end - start, left=start, height=0.6, color="tab:gray", alpha=0.7)
    for start, end in est.intervals:
        ax.barh(0, end - start, left=start, height=0.6, color="tab:green", alpha=0.7)
    ax.set_yticks([0, 1], labels=["estimated", "truth"])
    ax.set_xlim(0, duration_s)
    ax.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
