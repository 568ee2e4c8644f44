"""Meal start/end estimation from the temporal density of detected bites.

The pipeline plants a unit impulse per bite on the prediction timeline,
smooths with a wide unit-area Gaussian (closing gaps between bite groups the
way a morphological closing would), binarizes at a density threshold chosen
to reject single isolated bites, finds region edges with a differentiation
filter, pairs consecutive edges into intervals, then merges nearby intervals
and rejects short ones. A 1D density-clustering baseline is included for
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .bites import BiteSet, plateau_peaks


@dataclass(frozen=True)
class LocalizerConfig:
    gauss_len_s: float = 240.0
    gauss_std_s: float = 45.0
    lambda_s: float = 5e-4
    merge_gap_s: float = 180.0
    min_duration_s: float = 180.0
    edge_sidelobe_s: float = 1.0

    def __post_init__(self):
        vals = (self.gauss_len_s, self.gauss_std_s, self.lambda_s,
                self.merge_gap_s, self.min_duration_s, self.edge_sidelobe_s)
        if min(vals) <= 0:
            raise ValueError("localizer parameters must be positive")
        if not self.gauss_std_s < self.gauss_len_s:
            raise ValueError("gauss_std_s must be below gauss_len_s")


@dataclass(frozen=True, eq=False)
class MealIntervalSet:
    """Sorted, pairwise-disjoint [start, end] intervals in seconds."""

    intervals: np.ndarray  # (V, 2)

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        if iv.size:
            if not np.all(iv[:, 0] < iv[:, 1]):
                raise ValueError("each interval needs start < end")
            if not np.all(iv[1:, 0] >= iv[:-1, 1]):
                raise ValueError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", iv)

    def __len__(self) -> int:
        return self.intervals.shape[0]

    def total_seconds(self) -> float:
        if not len(self):
            return 0.0
        return float((self.intervals[:, 1] - self.intervals[:, 0]).sum())

    @classmethod
    def empty(cls) -> "MealIntervalSet":
        return cls(np.empty((0, 2)))

    @classmethod
    def from_pairs(cls, pairs) -> "MealIntervalSet":
        return cls(np.asarray(sorted(pairs), dtype=np.float64).reshape(-1, 2))


def impulse_train(bites: BiteSet, duration_s: float, fs_hz: float,
                  downsample: int = 4) -> np.ndarray:
    """Unit impulses at bite positions on the N-timeline."""
    n = int(round(duration_s * fs_hz / downsample))
    s = np.zeros(n)
    for b in bites.timestamps_s:
        if b < 0 or b > duration_s:
            raise ValueError("bite outside recording duration")
        s[min(int(round(b * fs_hz / downsample)), n - 1)] = 1.0
    return s


def gaussian_kernel(length: int, std: float) -> np.ndarray:
    """Discrete Gaussian normalized to unit area (sum 1)."""
    n = np.arange(length)
    g = np.exp(-0.5 * ((n - (length - 1) / 2.0) / std) ** 2)
    return g / g.sum()


def smooth_close(s: np.ndarray, cfg: LocalizerConfig, fs_hz: float,
                 downsample: int = 4) -> np.ndarray:
    """Same-length convolution with the configured unit-area Gaussian."""
    length = int(round(cfg.gauss_len_s * fs_hz / downsample))
    std = cfg.gauss_std_s * fs_hz / downsample
    return signal.fftconvolve(s, gaussian_kernel(length, std), mode="same")


def edge_detector(fs_hz: float, downsample: int = 4,
                  sidelobe_s: float = 1.0) -> np.ndarray:
    """Odd differentiation filter [1, 2, ..., K, 0, -K, ..., -2, -1]."""
    k = int(round(sidelobe_s * fs_hz / downsample))
    return np.concatenate([np.arange(1, k + 1), [0], np.arange(-k, 0)]).astype(float)


def extract_edge_intervals(s_smoothed: np.ndarray, cfg: LocalizerConfig,
                           fs_hz: float, downsample: int = 4) -> MealIntervalSet:
    """Binarize at lambda_s, detect region edges, pair them into intervals.

    The binarized series is zero beyond both ends (implicit zero padding of
    same-mode convolution), so regions touching a boundary still produce a
    pair of edges. An odd number of edges indicates an internal error.
    """
    binary = (np.asarray(s_smoothed) >= cfg.lambda_s).astype(np.float64)
    h = edge_detector(fs_hz, downsample, cfg.edge_sidelobe_s)
    # direct convolution keeps the zero stretches exactly zero
    d = np.convolve(binary, h, mode="same")
    edges = plateau_peaks(np.abs(d))
    if len(edges) % 2 != 0:
        raise ValueError("unpaired edge")
    step = downsample / fs_hz
    pairs = [(edges[i] * step, edges[i + 1] * step) for i in range(0, len(edges), 2)]
    return MealIntervalSet.from_pairs(pairs)


def refine_intervals(q: MealIntervalSet, cfg: LocalizerConfig) -> MealIntervalSet:
    """Merge intervals with gaps <= merge_gap_s, then drop short ones.

    Merging runs to a fixpoint; for a sorted disjoint list a single
    left-to-right pass reaches it. Intervals shorter than min_duration_s are
    rejected afterwards.
    """
    if not len(q):
        return q
    merged = [list(q.intervals[0])]
    for start, end in q.intervals[1:]:
        if start - merged[-1][1] <= cfg.merge_gap_s:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    kept = [iv for iv in merged if iv[1] - iv[0] >= cfg.min_duration_s]
    return MealIntervalSet(np.asarray(kept).reshape(-1, 2))


def localize_meals(bites: BiteSet, duration_s: float, fs_hz: float,
                   cfg: LocalizerConfig | None = None,
                   downsample: int = 4) -> MealIntervalSet:
    """Full pipeline: impulse train -> smooth -> edge pairing -> refine."""
    cfg = cfg or LocalizerConfig()
    s = impulse_train(bites, duration_s, fs_hz, downsample)
    smoothed = smooth_close(s, cfg, fs_hz, downsample)
    crude = extract_edge_intervals(smoothed, cfg, fs_hz, downsample)
    return refine_intervals(crude, cfg)


def dbscan_localize(bites: BiteSet, eps_s: float = 180.0,
                    min_pts: int = 2) -> MealIntervalSet:
    """1D density clustering of bite timestamps; clusters emit [min, max].

    A point is core when at least min_pts points (itself included) lie within
    eps_s. Clusters grow through chains of core points; non-core points join
    the cluster of the first core point that reaches them. Noise points and
    degenerate single-point clusters emit nothing.
    """
    ts = bites.timestamps_s
    n = ts.size
    if n == 0:
        return MealIntervalSet.empty()
    lo = np.searchsorted(ts, ts - eps_s, side="left")
    hi = np.searchsorted(ts, ts + eps_s, side="right")
    core = (hi - lo) >= min_pts
    labels = np.full(n, -1)
    cluster = -1
    for i in range(n):
        if not core[i] or labels[i] != -1:
            continue
        cluster += 1
        frontier = [i]
        labels[i] = cluster
        while frontier:
            j = frontier.pop()
            for k in range(lo[j], hi[j]):
                if labels[k] == -1:
                    labels[k] = cluster
                    if core[k]:
                        frontier.append(k)
    pairs = []
    for c in range(cluster + 1):
        member = ts[labels == c]
        if member.size >= 2 and member.min() < member.max():
            pairs.append((float(member.min()), float(member.max())))
    return MealIntervalSet.from_pairs(pairs)
