"""Sliding-window extraction, labeling, rotation augmentation and batching.

Training examples are fixed-length frames cut from a recording; each frame is
labeled by the annotation state at its right edge. In-meal recordings label a
window positive when its end falls within +/- epsilon of a bite's end;
free-living recordings mark windows inside self-reported meals NotApplicable
(too uncertain to use) and everything else negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .imu import ImuRecording


class Label(Enum):
    POSITIVE = 1
    NEGATIVE = -1
    NOT_APPLICABLE = 0


@dataclass(frozen=True)
class BiteAnnotation:
    """Ground-truth intake cycle interval, in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError("bite annotation must have start < end")


@dataclass(frozen=True)
class MealAnnotation:
    """Ground-truth meal interval, in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError("meal annotation must have start < end")


@dataclass(frozen=True)
class WindowConfig:
    w_l_s: float = 5.0
    w_s_s: float = 0.05
    epsilon_s: float = 0.1

    def __post_init__(self):
        if min(self.w_l_s, self.w_s_s, self.epsilon_s) <= 0:
            raise ValueError("window parameters must be positive")
        if self.w_s_s > self.w_l_s:
            raise ValueError("window step cannot exceed window length")

    @classmethod
    def in_meal(cls) -> "WindowConfig":
        return cls(w_s_s=0.05)

    @classmethod
    def free_living(cls) -> "WindowConfig":
        return cls(w_s_s=1.0)


@dataclass(frozen=True, eq=False)
class LabeledWindow:
    frame: np.ndarray  # w_l x 6, a view into the source recording
    end_time_s: float
    label: Label


def slide_windows(rec: ImuRecording, cfg: WindowConfig) -> list[tuple[np.ndarray, float]]:
    """Extract frames at starts 0, w_s, 2*w_s, ... while the window fits.

    Frames are views into the recording (no copy). A recording shorter than
    the window yields an empty list.
    """
    fs = rec.sample_rate_hz
    w_l = int(round(cfg.w_l_s * fs))
    step = max(1, int(round(cfg.w_s_s * fs)))
    out = []
    for start in range(0, rec.num_samples - w_l + 1, step):
        out.append((rec.data[start : start + w_l], (start + w_l) / fs))
    return out


def assign_label(
    end_time_s: float,
    cfg: WindowConfig,
    *,
    bites: list[BiteAnnotation] | None = None,
    meals: list[MealAnnotation] | None = None,
) -> Label:
    """Label a window by its right edge.

    Exactly one of ``bites`` (in-meal mode) or ``meals`` (free-living mode)
    must be given.
    """
    if (bites is None) == (meals is None):
        raise ValueError("pass exactly one of bites or meals")
    if bites is not None:
        for b in bites:
            if abs(end_time_s - b.end_s) <= cfg.epsilon_s:
                return Label.POSITIVE
        return Label.NEGATIVE
    for m in meals:
        if m.start_s <= end_time_s <= m.end_s:
            return Label.NOT_APPLICABLE
    return Label.NEGATIVE


def label_windows(
    rec: ImuRecording,
    cfg: WindowConfig,
    *,
    bites: list[BiteAnnotation] | None = None,
    meals: list[MealAnnotation] | None = None,
) -> list[LabeledWindow]:
    """Slide windows over a recording and label each at its right edge."""
    if (bites is None) == (meals is None):
        raise ValueError("pass exactly one of bites or meals")
    windows = slide_windows(rec, cfg)
    if not windows:
        return []
    ends = np.array([w[1] for w in windows])
    if bites is not None:
        bite_ends = np.array(sorted(b.end_s for b in bites))
        labels = np.full(len(ends), Label.NEGATIVE, dtype=object)
        if bite_ends.size:
            idx = np.searchsorted(bite_ends, ends)
            lo = np.clip(idx - 1, 0, bite_ends.size - 1)
            hi = np.clip(idx, 0, bite_ends.size - 1)
            nearest = np.minimum(
                np.abs(ends - bite_ends[lo]), np.abs(ends - bite_ends[hi])
            )
            labels[nearest <= cfg.epsilon_s] = Label.POSITIVE
    else:
        labels = np.full(len(ends), Label.NEGATIVE, dtype=object)
        for m in meals:
            labels[(ends >= m.start_s) & (ends <= m.end_s)] = Label.NOT_APPLICABLE
    return [
        LabeledWindow(frame, end, lab)
        for (frame, end), lab in zip(windows, labels)
    ]


def rotation_matrix_x(deg: float) -> np.ndarray:
    """Right-handed counterclockwise rotation about the x axis."""
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_matrix_z(deg: float) -> np.ndarray:
    """Right-handed counterclockwise rotation about the z axis."""
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate_frame(frame: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Apply one 3x3 rotation to the accel and gyro triples of every row."""
    out = np.empty_like(frame, dtype=np.float64)
    out[:, :3] = frame[:, :3] @ q.T
    out[:, 3:] = frame[:, 3:] @ q.T
    return out


def rotation_augment(
    frame: np.ndarray,
    rng: np.random.Generator,
    *,
    angle_std_deg: float = 10.0,
    apply_prob: float = 0.5,
) -> np.ndarray:
    """Randomly re-orient a frame to mimic watch placement variability.

    With probability 1 - apply_prob the frame is returned untouched.
    Otherwise angles about x and z are drawn from N(0, angle_std_deg) and one
    of {Qx, Qz, Qx.Qz, Qz.Qx} is applied to both sensor triples. No rotation
    about y is ever generated.
    """
    if rng.random() >= apply_prob:
        return frame
    theta_x, theta_z = rng.normal(0.0, angle_std_deg, size=2)
    qx = rotation_matrix_x(theta_x)
    qz = rotation_matrix_z(theta_z)
    q = (qx, qz, qx @ qz, qz @ qx)[rng.integers(4)]
    return rotate_frame(frame, q)


def make_balanced_batches(
    pool: list[LabeledWindow],
    batch_size: int,
    rng: np.random.Generator,
) -> list[list[LabeledWindow]]:
    """Build exactly class-balanced batches for one epoch.

    Each batch holds batch_size/2 positives and batch_size/2 negatives. Both
    classes are drawn without replacement; once a class runs out it is
    resampled with replacement so balance is preserved. The epoch covers the
    larger class once: ceil(max_class / (batch_size/2)) batches.
    """
    if batch_size % 2 != 0:
        raise ValueError("batch_size must be even")
    half = batch_size // 2
    pos = [i for i, w in enumerate(pool) if w.label is Label.POSITIVE]
    neg = [i for i, w in enumerate(pool) if w.label is Label.NEGATIVE]
    if len(pos) + len(neg) != len(pool):
        raise ValueError("pool must not contain NotApplicable windows")
    if len(pos) < half or len(neg) < half:
        raise ValueError("pool too small for one balanced batch")

    n_batches = math.ceil(max(len(pos), len(neg)) / half)

    def draws(indices: list[int]) -> np.ndarray:
        perm = rng.permutation(len(indices))
        need = n_batches * half
        if need > len(indices):
            extra = rng.integers(0, len(indices), size=need - len(indices))
            perm = np.concatenate([perm, extra])
        return np.asarray(indices)[perm[:need]]

    pos_draws = draws(pos)
    neg_draws = draws(neg)
    batches = []
    for b in range(n_batches):
        take = np.concatenate(
            [pos_draws[b * half : (b + 1) * half], neg_draws[b * half : (b + 1) * half]]
        )
        rng.shuffle(take)
        batches.append([pool[i] for i in take])
    return batches
