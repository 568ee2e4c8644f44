import numpy as np
import pytest

from bitewatch.bites import (BiteDetectConfig, BiteSet, detect_bites,
                             union_bites)


def oracle_detect(p, fs_hz, lambda_p=0.89, min_gap_s=2.0, downsample=4):
    """Exhaustive O(N^2) reference: threshold, enumerate plateau-first local
    maxima by direct neighbor scanning, then greedily suppress by height
    (ties to the earlier index)."""
    q = [v if v >= lambda_p else 0.0 for v in p]
    n = len(q)
    candidates = []
    for i in range(n):
        if q[i] <= 0:
            continue
        if i > 0 and q[i] <= q[i - 1]:
            continue
        j = i
        while j + 1 < n and q[j + 1] == q[i]:
            j += 1
        if j + 1 == n or q[j + 1] < q[i]:
            candidates.append(i)
    min_gap = min_gap_s * fs_hz / downsample
    remaining = list(candidates)
    accepted = []
    while remaining:
        best = remaining[0]
        for c in remaining[1:]:
            if q[c] > q[best]:
                best = c
        remaining.remove(best)
        if all(abs(best - a) >= min_gap for a in accepted):
            accepted.append(best)
    return sorted(a * downsample / fs_hz for a in accepted)


class TestDetectBites:
    def test_single_peak_maps_to_seconds(self):
        p = np.zeros(300)
        p[100] = 0.95
        out = detect_bites(p, 100.0)
        assert np.allclose(out.timestamps_s, [4.0])

    def test_close_peaks_suppressed_by_height(self):
        p = np.zeros(300)
        p[100] = 0.95
        p[130] = 0.92  # 1.2 s apart < 2 s
        out = detect_bites(p, 100.0)
        assert np.allclose(out.timestamps_s, [4.0])

    def test_all_below_threshold_empty(self):
        p = np.full(500, 0.88)
        assert len(detect_bites(p, 100.0)) == 0

    def test_at_threshold_survives(self):
        p = np.zeros(100)
        p[50] = 0.89
        assert len(detect_bites(p, 100.0)) == 1

    def test_plateau_first_index(self):
        p = np.zeros(200)
        p[60:64] = 0.95
        out = detect_bites(p, 100.0)
        assert np.allclose(out.timestamps_s, [60 * 4 / 100.0])

    def test_matches_oracle_random_vectors(self):
        rng = np.random.default_rng(0)
        for trial in range(60):
            n = int(rng.integers(10, 2000))
            p = rng.random(n)
            if trial % 3 == 0:
                # sparse spiky vectors exercise the threshold path
                p = np.where(rng.random(n) < 0.02, p, p * 0.5)
            if trial % 5 == 0:
                p = np.round(p, 2)  # force plateaus and height ties
            fs = float(rng.choice([64.0, 100.0, 128.0]))
            got = detect_bites(p, fs).timestamps_s
            expect = oracle_detect(p, fs)
            assert np.allclose(got, expect), f"trial {trial}"

    def test_every_bite_has_high_probability(self):
        rng = np.random.default_rng(1)
        p = rng.random(3000)
        out = detect_bites(p, 100.0)
        idx = np.round(out.timestamps_s * 100.0 / 4).astype(int)
        assert np.all(p[idx] >= 0.89)

    def test_raising_threshold_never_adds_bites(self):
        rng = np.random.default_rng(2)
        p = rng.random(2000)
        lo = detect_bites(p, 100.0, BiteDetectConfig(lambda_p=0.85))
        hi = detect_bites(p, 100.0, BiteDetectConfig(lambda_p=0.95))
        assert set(hi.timestamps_s) <= set(lo.timestamps_s)

    def test_timestamps_within_range(self):
        rng = np.random.default_rng(3)
        n = 1500
        p = rng.random(n)
        out = detect_bites(p, 100.0)
        assert np.all(out.timestamps_s >= 0)
        assert np.all(out.timestamps_s <= n * 4 / 100.0)

    def test_spacing_respected(self):
        rng = np.random.default_rng(4)
        p = rng.random(5000)
        out = detect_bites(p, 100.0)
        assert np.all(np.diff(out.timestamps_s) >= 2.0 - 1e-12)


class TestBiteSet:
    def test_strictly_increasing_enforced(self):
        with pytest.raises(ValueError):
            BiteSet(np.array([1.0, 1.0, 2.0]))

    def test_union(self):
        a = BiteSet(np.array([1.0, 3.0]))
        b = BiteSet(np.array([2.0]))
        assert np.allclose(union_bites(a, b).timestamps_s, [1.0, 2.0, 3.0])

    def test_union_collapses_duplicates(self):
        a = BiteSet(np.array([1.0]))
        assert np.allclose(union_bites(a, a).timestamps_s, [1.0])

    def test_union_identity(self):
        b = BiteSet(np.array([4.0, 9.5]))
        out = union_bites(BiteSet.empty(), b)
        assert np.allclose(out.timestamps_s, b.timestamps_s)
