"""Detection and localization metrics.

Bite matching pairs detected timestamps with ground-truth intake intervals
(at most one detection per interval, so true negatives are undefined). Meal
localization is scored on a discretized timeline, which also yields
specificity, accuracy, a weighted accuracy that compensates for the small
fraction of the day spent eating, and the Jaccard index of interval overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bites import BiteSet
from .imu import ACCEL, ImuRecording
from .meals import MealIntervalSet
from .windows import BiteAnnotation


@dataclass(frozen=True)
class BiteConfusion:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class MealConfusion:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvalReport:
    """Metric bundle; fields that need true negatives are None for bites."""

    precision: float
    recall: float
    f1: float
    specificity: float | None = None
    accuracy: float | None = None
    weighted_accuracy: float | None = None
    jaccard: float | None = None
    confusion: BiteConfusion | MealConfusion | None = None


def match_bites(detections: BiteSet, truth: list[BiteAnnotation]) -> BiteConfusion:
    """Associate detections with truth intervals, at most one per interval.

    Detections are claimed in ascending order: the first detection inside an
    unclaimed interval is a TP, further detections in the same interval and
    detections outside every interval are FPs, unclaimed intervals are FNs.
    """
    ivs = sorted((t.start_s, t.end_s) for t in truth)
    for (s0, e0), (s1, _) in zip(ivs, ivs[1:]):
        if s1 < e0:
            raise ValueError("overlapping truth intervals")
    starts = np.array([iv[0] for iv in ivs])
    ends = np.array([iv[1] for iv in ivs])
    claimed = np.zeros(len(ivs), dtype=bool)
    tp = fp = 0
    for b in detections.timestamps_s:
        idx = np.searchsorted(starts, b, side="right") - 1
        if idx >= 0 and b <= ends[idx]:
            if claimed[idx]:
                fp += 1
            else:
                claimed[idx] = True
                tp += 1
        else:
            fp += 1
    return BiteConfusion(tp=tp, fp=fp, fn=int((~claimed).sum()))


def precision_recall_f1(c) -> tuple[float, float, float]:
    """Precision, recall and F1 from any confusion with tp/fp/fn counts.

    Zero denominators yield 0 by convention.
    """
    prec = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    rec = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return prec, rec, f1


def meal_confusion(est: MealIntervalSet, truth: MealIntervalSet,
                   duration_s: float, resolution_s: float = 1.0) -> MealConfusion:
    """Sample-level confusion on a discretized timeline.

    Sample k (at time k * resolution_s) counts as positive for an interval
    set when start <= k * resolution_s < end for some interval.
    """
    n = int(round(duration_s / resolution_s))

    def mask(ivs: MealIntervalSet) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        for start, end in ivs.intervals:
            lo = max(0, math.ceil(start / resolution_s - 1e-9))
            hi = min(n, math.ceil(end / resolution_s - 1e-9))
            m[lo:hi] = True
        return m

    e, t = mask(est), mask(truth)
    return MealConfusion(
        tp=int((e & t).sum()),
        fp=int((e & ~t).sum()),
        fn=int((~e & t).sum()),
        tn=int((~e & ~t).sum()),
    )


def specificity(c: MealConfusion) -> float:
    return c.tn / (c.tn + c.fp) if c.tn + c.fp else 0.0


def accuracy(c: MealConfusion) -> float:
    return (c.tp + c.tn) / c.total if c.total else 0.0


def weighted_accuracy(c: MealConfusion, ratio: float) -> float:
    """Accuracy with true positives weighted ``ratio`` times a true negative."""
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    denom = (c.tp + c.fn) * ratio + c.fp + c.tn
    return (c.tp * ratio + c.tn) / denom if denom else 0.0


def duration_ratio(total_s: float, meal_s: float) -> float:
    """Recording-to-meal duration ratio at 1-decimal reporting precision.

    The ratio is truncated (not rounded) to one decimal, the convention the
    source tables follow (e.g. 14774.8/6023.07 -> 2.4, 77.32/5.42 -> 14.2,
    35.39/1.6 -> 22.1).
    """
    if not meal_s > 0:
        raise ValueError("meal duration must be positive")
    return math.floor(total_s / meal_s * 10.0) / 10.0


def meal_duration_ratio(truth: MealIntervalSet, duration_s: float) -> float:
    """Weighting ratio computed from ground-truth meals of one timeline."""
    return duration_ratio(duration_s, truth.total_seconds())


def _merge(ivs: np.ndarray) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for start, end in sorted(map(tuple, ivs)):
        if out and start <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], end))
        else:
            out.append((start, end))
    return out


def jaccard_index(est: MealIntervalSet, truth: MealIntervalSet) -> float:
    """Interval overlap over union in seconds; both empty counts as 1."""
    a, b = _merge(est.intervals), _merge(truth.intervals)
    inter = 0.0
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            inter += hi - lo
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    len_a = sum(e - s for s, e in a)
    len_b = sum(e - s for s, e in b)
    union = len_a + len_b - inter
    return inter / union if union > 0 else 1.0


def wrist_motion_energy(rec: ImuRecording, window_s: float) -> np.ndarray:
    """Centered moving average of |ax| + |ay| + |az|.

    Interior positions divide by W+1 samples (W = window_s * fs, required
    even); edge positions use the truncated window with matching
    normalization. The caller passes the smoothed recording.
    """
    fs = rec.sample_rate_hz
    w = int(round(window_s * fs))
    if w % 2 != 0:
        raise ValueError("window must span an even number of samples")
    a = np.abs(rec.data[:, ACCEL]).sum(axis=1)
    m = a.size
    csum = np.concatenate([[0.0], np.cumsum(a)])
    idx = np.arange(m)
    lo = np.maximum(0, idx - w // 2)
    hi = np.minimum(m - 1, idx + w // 2)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def bite_report(c: BiteConfusion) -> EvalReport:
    prec, rec, f1 = precision_recall_f1(c)
    return EvalReport(precision=prec, recall=rec, f1=f1, confusion=c)


def meal_report(c: MealConfusion, ratio: float,
                jaccard: float | None = None) -> EvalReport:
    prec, rec, f1 = precision_recall_f1(c)
    return EvalReport(
        precision=prec,
        recall=rec,
        f1=f1,
        specificity=specificity(c),
        accuracy=accuracy(c),
        weighted_accuracy=weighted_accuracy(c, ratio),
        jaccard=jaccard,
        confusion=c,
    )
