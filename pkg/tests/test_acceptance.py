"""Acceptance suite: one test per desk-scale acceptance criterion.

Every test pins its stated tolerance and runtime budget and prints one
pass/fail line (visible with ``pytest -s tests/test_acceptance.py``). The
end-to-end pipeline test trains a reduced network on a synthetic corpus and
is the long pole (a few minutes on a desktop CPU).
"""

import math
import time

import numpy as np
import pytest

import bitewatch as bw
from bitewatch.bites import BiteDetectConfig, BiteSet, detect_bites
from bitewatch.imu import (ImuRecording, MIRROR_SIGNS, PreprocessConfig,
                           apply_mirror, highpass_kernel, mirror_hand,
                           moving_average_kernel, preprocess)
from bitewatch.meals import LocalizerConfig, gaussian_kernel, localize_meals, smooth_close
from bitewatch.metrics import (BiteConfusion, MealConfusion, accuracy,
                               duration_ratio, jaccard_index, match_bites,
                               meal_confusion, precision_recall_f1,
                               weighted_accuracy, wrist_motion_energy)
from bitewatch.net import (NetConfig, TrainConfig, count_params,
                           forward_sequence, gradient_check, init_params,
                           train)
from bitewatch.synth import SynthSpec, generate_recording
from bitewatch.windows import Label, WindowConfig, label_windows


class Criterion:
    """Times a criterion and prints its pass/fail line on exit."""

    def __init__(self, name, budget_s):
        self.name = name
        self.budget_s = budget_s
        self.detail = ""

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.time() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{status}] {self.name}: {self.detail} ({elapsed:.1f} s)")
        if exc_type is None:
            assert elapsed < self.budget_s, (
                f"{self.name} exceeded its {self.budget_s} s budget"
            )
        return False


def same_convolution_oracle(x, kernel):
    """Direct evaluation of same-mode zero-padded convolution (dot per tap)."""
    m, k = len(x), len(kernel)
    shift = (k - 1) // 2
    xq = np.concatenate([np.zeros(k - 1 - shift), x, np.zeros(shift)])
    rev = kernel[::-1]
    return np.array([np.dot(rev, xq[n : n + k]) for n in range(m)])


def test_exact_parameter_count():
    with Criterion("exact parameter count", budget_s=1.0) as c:
        n = count_params(init_params(NetConfig(), seed=0))
        c.detail = f"count_params(default) = {n}"
        assert n == 163_617


def test_shape_law():
    with Criterion("shape law N = floor(M/4)", budget_s=5.0) as c:
        cfg = NetConfig(conv_filters=(2, 2, 2), conv_kernels=(5, 3, 3),
                        pool_after=(True, True, False), lstm_units=4)
        params = init_params(cfg, seed=0)
        rng = np.random.default_rng(0)
        lengths = {}
        for m in (96, 100, 1000, 7000):
            lengths[m] = len(forward_sequence(params, rng.normal(size=(m, 6))))
            assert lengths[m] == m // 4
        c.detail = f"lengths {lengths}"


def test_gradient_check_tiny_config():
    with Criterion("gradient check", budget_s=60.0) as c:
        cfg = NetConfig(conv_filters=(2, 2, 2), conv_kernels=(5, 3, 3),
                        pool_after=(True, True, False), lstm_units=4)
        worst = 0.0
        for seed in (3, 11):
            params = init_params(cfg, seed=seed)
            frame = np.random.default_rng(seed + 100).normal(size=(32, 6))
            worst = max(worst, gradient_check(params, frame,
                                              target=float(seed % 2)))
        c.detail = f"max relative error {worst:.2e}"
        assert worst < 1e-4


def test_filter_and_metric_oracle_equivalence():
    with Criterion("oracle equivalence (100 random inputs each)",
                   budget_s=60.0) as c:
        rng = np.random.default_rng(42)
        fs = 100.0

        # preprocess vs direct convolution
        cfg = PreprocessConfig()
        ma = moving_average_kernel(cfg)
        hp = highpass_kernel(cfg.hp_len, cfg.hp_cutoff_hz, fs)
        for _ in range(100):
            data = rng.normal(size=(600, 6))
            out = preprocess(ImuRecording(data, fs), cfg)
            ch = int(rng.integers(6))
            expect = same_convolution_oracle(data[:, ch], ma)
            if ch < 3:
                expect = same_convolution_oracle(expect, hp)
            scale = max(np.max(np.abs(expect)), 1e-30)
            assert np.max(np.abs(out.data[:, ch] - expect)) < 1e-10 * scale

        # smooth_close vs direct convolution (default wide kernel)
        loc = LocalizerConfig()
        kernel = gaussian_kernel(int(loc.gauss_len_s * fs / 4),
                                 loc.gauss_std_s * fs / 4)
        for _ in range(100):
            n = int(rng.integers(400, 1200))
            s = np.zeros(n)
            s[rng.integers(0, n, size=rng.integers(1, 12))] = 1.0
            got = smooth_close(s, loc, fs)
            expect = same_convolution_oracle(s, kernel)
            scale = max(np.max(np.abs(expect)), 1e-30)
            assert np.max(np.abs(got - expect)) < 1e-10 * scale

        # wrist motion energy vs direct summation
        for _ in range(100):
            data = rng.normal(size=(300, 6))
            rec = ImuRecording(data, fs)
            got = wrist_motion_energy(rec, 0.5)
            a = np.abs(data[:, :3]).sum(axis=1)
            w = 50
            idx = int(rng.integers(300))
            lo, hi = max(0, idx - w // 2), min(299, idx + w // 2)
            expect = a[lo : hi + 1].sum() / (hi - lo + 1)
            assert abs(got[idx] - expect) < 1e-10 * max(abs(expect), 1e-30)

        # detect_bites vs exhaustive threshold + suppression
        for trial in range(100):
            n = int(rng.integers(50, 10_000))
            p = rng.random(n)
            if trial % 3 == 0:
                p = np.round(p, 2)
            got = detect_bites(p, fs).timestamps_s
            expect = nms_oracle(p, fs)
            assert np.array_equal(got, np.asarray(expect))
        c.detail = "preprocess, smooth_close, wrist_motion_energy, detect_bites"


def nms_oracle(p, fs_hz, lambda_p=0.89, min_gap_s=2.0):
    q = [v if v >= lambda_p else 0.0 for v in p]
    n = len(q)
    candidates = []
    for i in range(n):
        if q[i] <= 0 or (i > 0 and q[i] <= q[i - 1]):
            continue
        j = i
        while j + 1 < n and q[j + 1] == q[i]:
            j += 1
        if j + 1 == n or q[j + 1] < q[i]:
            candidates.append(i)
    min_gap = min_gap_s * fs_hz / 4
    remaining = list(candidates)
    accepted = []
    while remaining:
        best = remaining[0]
        for cand in remaining[1:]:
            if q[cand] > q[best]:
                best = cand
        remaining.remove(best)
        if all(abs(best - a) >= min_gap for a in accepted):
            accepted.append(best)
    return [a * 4 / fs_hz for a in sorted(accepted)]


def test_mirroring_laws():
    with Criterion("mirroring laws", budget_s=5.0) as c:
        rng = np.random.default_rng(7)
        for _ in range(200):
            data = rng.normal(size=(int(rng.integers(1, 60)), 6))
            mirrored = apply_mirror(data)
            assert np.array_equal(mirrored, data * MIRROR_SIGNS)
            assert np.array_equal(apply_mirror(mirrored), data)
            left = ImuRecording(data, 100.0, "L")
            out = mirror_hand(left)
            assert out.handedness == "R"
            assert np.array_equal(out.data, mirrored)
            right = ImuRecording(data, 100.0, "R")
            assert mirror_hand(right) is right
        c.detail = "sign pattern, involution, right-hand identity (200 cases)"


def test_isolated_bite_rejection():
    with Criterion("isolated-bite rejection", budget_s=10.0) as c:
        rng = np.random.default_rng(11)
        for _ in range(100):
            t = float(rng.uniform(0.0, 7200.0))
            out = localize_meals(BiteSet(np.array([t])), 7200.0, 100.0)
            assert len(out) == 0
        c.detail = "100 single-bite placements all rejected"


def test_metric_identities():
    with Criterion("metric identities", budget_s=5.0) as c:
        rng = np.random.default_rng(13)
        for _ in range(50):
            conf = MealConfusion(*(int(v) for v in rng.integers(1, 400, 4)))
            assert weighted_accuracy(conf, 1.0) == pytest.approx(
                accuracy(conf), rel=1e-12)
        ratio = duration_ratio(77.32, 5.42)
        assert abs(ratio - 14.2) <= 0.05
        # hand-computed confusion fixtures
        est = bw.MealIntervalSet.from_pairs([(100, 200)])
        truth = bw.MealIntervalSet.from_pairs([(150, 250)])
        conf = meal_confusion(est, truth, 1000.0, 1.0)
        assert (conf.tp, conf.fp, conf.fn, conf.tn) == (50, 50, 50, 850)
        assert weighted_accuracy(conf, 10.0) == pytest.approx(1350 / 1900,
                                                              rel=1e-12)
        bites = BiteSet(np.array([2.0, 3.0, 20.0]))
        truth_b = [bw.BiteAnnotation(0, 4), bw.BiteAnnotation(10, 14)]
        cb = match_bites(bites, truth_b)
        assert (cb.tp, cb.fp, cb.fn) == (1, 2, 1)
        c.detail = f"ratio 77.32/5.42 -> {ratio}; fixtures exact"


# ---------------------------------------------------------------------------
# end-to-end synthetic pipeline

MEAL_S = 480.0
GAP_S = 6.5
DAY_S = 7200.0
REDUCED = NetConfig(conv_filters=(8, 16, 32), conv_kernels=(5, 3, 3),
                    pool_after=(True, True, False), lstm_units=32)


def _meal_session(subject, index):
    spec = SynthSpec(duration_s=MEAL_S,
                     meal_schedule=((5.0, MEAL_S - 5.0, GAP_S),),
                     seed=100 * subject + index)
    rec, bites, _ = generate_recording(spec)
    return preprocess(mirror_hand(rec)), bites


def _free_day(index):
    spec = SynthSpec(
        duration_s=DAY_S,
        meal_schedule=((1000.0, 2200.0, GAP_S), (4400.0, 5600.0, GAP_S)),
        seed=9000 + index,
    )
    rec, _, meals = generate_recording(spec)
    return (preprocess(mirror_hand(rec)),
            bw.MealIntervalSet.from_pairs([(m.start_s, m.end_s) for m in meals]))


def test_end_to_end_synthetic_pipeline():
    with Criterion("end-to-end synthetic pipeline", budget_s=900.0) as c:
        wcfg = WindowConfig(w_l_s=5.0, w_s_s=0.1, epsilon_s=0.1)
        rng = np.random.default_rng(1234)

        # 20 synthetic meals from 5 subjects; subject 4 held out
        pool = []
        held_out = []
        for subject in range(5):
            for index in range(4):
                pre, bites = _meal_session(subject, index)
                if subject < 4:
                    pool += label_windows(pre, wcfg, bites=bites)
                else:
                    held_out.append((pre, bites))

        # cap the negative majority so 5 epochs stay desk-sized
        pos = [w for w in pool if w.label is Label.POSITIVE]
        neg = [w for w in pool if w.label is Label.NEGATIVE]
        keep = rng.choice(len(neg), size=3 * len(pos), replace=False)
        pool = pos + [neg[i] for i in sorted(keep)]

        params = init_params(REDUCED, seed=0)
        params = train(params, pool, TrainConfig(epochs=5, batch_size=128,
                                                 seed=0))

        det_cfg = BiteDetectConfig()
        tp = fp = fn = 0
        for pre, bites in held_out:
            probs = forward_sequence(params, pre.data)
            detections = detect_bites(probs, pre.sample_rate_hz, det_cfg)
            conf = match_bites(detections, bites)
            tp, fp, fn = tp + conf.tp, fp + conf.fp, fn + conf.fn
        _, _, f1 = precision_recall_f1(BiteConfusion(tp, fp, fn))

        # 4 free-living days, meal localization vs planted schedules
        inter_total = union_total = 0.0
        for index in range(4):
            pre, truth = _free_day(index)
            probs = forward_sequence(params, pre.data)
            detections = detect_bites(probs, pre.sample_rate_hz, det_cfg)
            est = localize_meals(detections, DAY_S, pre.sample_rate_hz)
            inter = 0.0
            for es, ee in est.intervals:
                for ts, te in truth.intervals:
                    inter += max(0.0, min(ee, te) - max(es, ts))
            union_total += (est.total_seconds() + truth.total_seconds()
                            - inter)
            inter_total += inter
        jaccard = inter_total / union_total

        c.detail = (f"bite F1 {f1:.3f} (tp={tp} fp={fp} fn={fn}), "
                    f"meal Jaccard {jaccard:.3f}")
        assert f1 >= 0.90
        assert jaccard >= 0.85
