"""Turn the network's prediction vector into discrete bite timestamps.

Predictions live on the N-timeline (one step per ``downsample`` input
samples, i.e. fs/4 Hz for the default architecture), so step n maps to
t = n * 4 / fs seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BiteDetectConfig:
    lambda_p: float = 0.89
    min_gap_s: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.lambda_p < 1.0:
            raise ValueError("lambda_p must lie in (0, 1)")
        if not self.min_gap_s > 0:
            raise ValueError("min_gap_s must be positive")


@dataclass(frozen=True, eq=False)
class BiteSet:
    """Strictly increasing bite timestamps in seconds."""

    timestamps_s: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps_s, dtype=np.float64).reshape(-1)
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps_s", ts)

    def __len__(self) -> int:
        return self.timestamps_s.size

    @classmethod
    def empty(cls) -> "BiteSet":
        return cls(np.empty(0))


def plateau_peaks(values: np.ndarray) -> list[int]:
    """Indices of strictly positive local maxima; plateaus report their first index.

    Index n qualifies when values[n] > 0, values[n] exceeds its left neighbor
    (or sits at the boundary), and the next differing value to the right (if
    any) is smaller. Only nonzero stretches are scanned, so long empty
    timelines cost next to nothing.
    """
    v = np.asarray(values)
    nz = np.flatnonzero(v > 0)
    if nz.size == 0:
        return []
    peaks = []
    # contiguous nonzero segments; zeros between them can never be peaks
    breaks = np.flatnonzero(np.diff(nz) > 1)
    seg_starts = np.concatenate([[nz[0]], nz[breaks + 1]])
    seg_ends = np.concatenate([nz[breaks], [nz[-1]]])  # inclusive
    n = v.size
    for s, e in zip(seg_starts, seg_ends):
        i = s
        while i <= e:
            if i > 0 and v[i] <= v[i - 1]:
                i += 1
                continue
            j = i
            while j + 1 < n and v[j + 1] == v[i]:
                j += 1
            if j + 1 == n or v[j + 1] < v[i]:
                peaks.append(int(i))
            i = j + 1
    return peaks


def detect_bites(
    p: np.ndarray, fs_hz: float, cfg: BiteDetectConfig | None = None, downsample: int = 4
) -> BiteSet:
    """Threshold the prediction vector and pick spaced local maxima.

    Entries below lambda_p are zeroed; surviving local maxima are kept
    greedily by descending height (ties to the earlier index) subject to a
    pairwise spacing of min_gap_s on the input timeline.
    """
    cfg = cfg or BiteDetectConfig()
    p = np.asarray(p, dtype=np.float64)
    q = np.where(p >= cfg.lambda_p, p, 0.0)
    candidates = plateau_peaks(q)
    min_gap = cfg.min_gap_s * fs_hz / downsample
    order = sorted(candidates, key=lambda n: (-q[n], n))
    accepted: list[int] = []
    for n in order:
        if all(abs(n - m) >= min_gap for m in accepted):
            accepted.append(n)
    accepted.sort()
    return BiteSet(np.asarray(accepted, dtype=np.float64) * downsample / fs_hz)


def union_bites(a: BiteSet, b: BiteSet) -> BiteSet:
    """Sorted union of two bite sets; equal timestamps collapse to one."""
    return BiteSet(np.union1d(a.timestamps_s, b.timestamps_s))
