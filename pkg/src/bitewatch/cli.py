"""Command-line pipeline.

Subcommands: preprocess, synth, train, detect-bites, detect-meals,
evaluate-bites, evaluate-meals, loso. Exit codes: 0 success, 1 usage error,
2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io, report
from .bites import BiteDetectConfig, BiteSet, detect_bites
from .imu import ImuRecording, PreprocessConfig, mirror_hand, preprocess
from .meals import (LocalizerConfig, MealIntervalSet, dbscan_localize,
                    impulse_train, localize_meals, smooth_close)
from .metrics import (bite_report, jaccard_index, match_bites, meal_confusion,
                      meal_duration_ratio, meal_report)
from .net import (ModelParams, NetConfig, TrainConfig, deserialize_params,
                  forward_sequence, init_params, serialize_params, train)
from .synth import BiteTemplate, SynthSpec, generate_recording
from .windows import Label, LabeledWindow, WindowConfig, label_windows


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _meal_spec(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start:end:mean_gap")
    return tuple(float(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bitewatch",
                     description="Bite detection and meal localization "
                                 "from wrist IMU recordings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[], help="mirror + filter a recording")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--no-mirror", action="store_true",
                   help="skip hand mirroring")
    p.add_argument("--ma-len", type=int, default=25)
    p.add_argument("--hp-cutoff", type=float, default=1.0)
    p.add_argument("--hp-len", type=int, default=512)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("synth", help="generate a synthetic recording")
    p.add_argument("--out-recording", required=True)
    p.add_argument("--out-events", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--fs", type=float, default=100.0)
    p.add_argument("--meal", type=_meal_spec, action="append", default=[],
                   help="start:end:mean_gap seconds; repeatable")
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--hand", choices=["L", "R"], default="R")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the network from a manifest")
    _add_net_args(p)
    _add_pool_args(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exclude-subject", default=None,
                   help="leave this subject's sessions out of the pool")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect-bites", help="recording + weights -> bite events")
    p.add_argument("--recording", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda-p", type=float, default=0.89)
    p.add_argument("--min-gap", type=float, default=2.0)
    p.add_argument("--raw", action="store_true",
                   help="skip mirroring and preprocessing")
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_detect_bites)

    p = sub.add_parser("detect-meals", help="bite events -> meal intervals")
    p.add_argument("--bites", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--fs", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["density", "dbscan"], default="density")
    p.add_argument("--truth", default=None, help="events file for figure overlay")
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_detect_meals)

    p = sub.add_parser("evaluate-bites", help="score detections against annotations")
    p.add_argument("--detected", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_evaluate_bites)

    p = sub.add_parser("evaluate-meals", help="score meal intervals against truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--ratio", type=float, default=None,
                   help="TP:TN weight; default: recording/meal duration of truth")
    p.add_argument("--csv", default=None)
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_evaluate_meals)

    p = sub.add_parser("loso", help="leave-one-subject-out over a manifest")
    _add_net_args(p)
    _add_pool_args(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report-dir", required=True)
    p.add_argument("--eval-meals", action="store_true",
                   help="also localize meals on held-out free sessions")
    p.add_argument("--lambda-p", type=float, default=0.89)
    p.add_argument("--min-gap", type=float, default=2.0)
    p.set_defaults(func=cmd_loso)

    return parser


def _add_net_args(p) -> None:
    p.add_argument("--filters", type=_int_list, default=(32, 64, 128))
    p.add_argument("--kernels", type=_int_list, default=(5, 3, 3))
    p.add_argument("--lstm", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--augment", action="store_true")


def _add_pool_args(p) -> None:
    p.add_argument("--w-length", type=float, default=5.0)
    p.add_argument("--w-step-meal", type=float, default=0.05)
    p.add_argument("--w-step-free", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-neg-ratio", type=float, default=0.0,
                   help="subsample negatives to at most this many per "
                        "positive (0 keeps all)")


def _net_config(args) -> NetConfig:
    return NetConfig(
        conv_filters=args.filters,
        conv_kernels=args.kernels,
        pool_after=(True, True) + (False,) * (len(args.filters) - 2),
        lstm_units=args.lstm,
        dropout_rate=args.dropout,
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )


def _load_pipeline_input(path: str, raw: bool) -> ImuRecording:
    rec = io.load_recording(path)
    if raw:
        return rec
    return preprocess(mirror_hand(rec))


def _build_pool(subjects, args, exclude: str | None,
                rng: np.random.Generator) -> list[LabeledWindow]:
    """Labeled training windows from every subject except ``exclude``.

    Meal sessions contribute positives and negatives labeled from bite
    annotations; free sessions contribute negatives only (windows inside
    meals are NotApplicable and dropped).
    """
    meal_cfg = WindowConfig(args.w_length, args.w_step_meal, args.epsilon)
    free_cfg = WindowConfig(args.w_length, args.w_step_free, args.epsilon)
    pool: list[LabeledWindow] = []
    for sub in subjects:
        if sub.subject_id == exclude:
            continue
        for sess in sub.sessions:
            rec = _load_pipeline_input(sess.recording, raw=False)
            events = io.load_events(sess.events)
            if sess.kind == "meal":
                wins = label_windows(rec, meal_cfg, bites=io.bite_intervals(events))
            else:
                wins = label_windows(rec, free_cfg,
                                     meals=io.meal_annotations(events))
            pool += [w for w in wins if w.label is not Label.NOT_APPLICABLE]
    if args.max_neg_ratio > 0:
        pos = [w for w in pool if w.label is Label.POSITIVE]
        neg = [w for w in pool if w.label is Label.NEGATIVE]
        cap = int(args.max_neg_ratio * max(1, len(pos)))
        if len(neg) > cap:
            keep = rng.choice(len(neg), size=cap, replace=False)
            neg = [neg[i] for i in sorted(keep)]
        pool = pos + neg
    return pool


def cmd_preprocess(args) -> int:
    rec = io.load_recording(args.input)
    if not args.no_mirror:
        rec = mirror_hand(rec)
    cfg = PreprocessConfig(ma_len=args.ma_len, ma_tap=1.0 / args.ma_len,
                           hp_cutoff_hz=args.hp_cutoff, hp_len=args.hp_len)
    io.write_recording(args.output, preprocess(rec, cfg))
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        duration_s=args.duration,
        sample_rate_hz=args.fs,
        meal_schedule=tuple(args.meal),
        bite_template=BiteTemplate(),
        noise_std=args.noise_std,
        handedness=args.hand,
        seed=args.seed,
    )
    rec, bites, meals = generate_recording(spec)
    io.write_recording(args.out_recording, rec)
    io.write_events(args.out_events, io.events_from(bite_intervals=bites, meals=meals))
    print(f"wrote {rec.num_samples} samples, {len(bites)} bites, {len(meals)} meals")
    return 0


def cmd_train(args) -> int:
    subjects = io.load_manifest(args.manifest)
    rng = np.random.default_rng(args.seed)
    pool = _build_pool(subjects, args, args.exclude_subject, rng)
    n_pos = sum(w.label is Label.POSITIVE for w in pool)
    print(f"pool: {n_pos} positive / {len(pool) - n_pos} negative windows")
    params = init_params(_net_config(args), args.seed)
    params = train(params, pool, _train_config(args), augment=args.augment,
                   on_epoch=lambda e, l: print(f"epoch {e + 1}: mean loss {l:.4f}"))
    Path(args.out).write_bytes(serialize_params(params))
    print(f"wrote weights to {args.out}")
    return 0


def cmd_detect_bites(args) -> int:
    params = deserialize_params(Path(args.weights).read_bytes())
    rec = _load_pipeline_input(args.recording, args.raw)
    probs = forward_sequence(params, rec.data)
    cfg = BiteDetectConfig(lambda_p=args.lambda_p, min_gap_s=args.min_gap)
    bites = detect_bites(probs, rec.sample_rate_hz, cfg,
                         downsample=params.config.downsample)
    io.write_events(args.out, io.events_from(bites=bites))
    if args.figure:
        report.save_prediction_figure(args.figure, probs, rec.sample_rate_hz,
                                      bites, cfg.lambda_p,
                                      params.config.downsample)
    print(f"detected {len(bites)} bites")
    return 0


def cmd_detect_meals(args) -> int:
    bites = io.bite_times(io.load_events(args.bites))
    cfg = LocalizerConfig()
    if args.method == "density":
        meals = localize_meals(bites, args.duration, args.fs, cfg)
    else:
        meals = dbscan_localize(bites)
    io.write_events(args.out, io.events_from(meals=meals))
    if args.figure:
        truth = None
        if args.truth:
            truth = io.meal_intervals(io.load_events(args.truth))
        smoothed = smooth_close(impulse_train(bites, args.duration, args.fs),
                                cfg, args.fs)
        report.save_localization_figure(args.figure, smoothed, args.fs,
                                        cfg.lambda_s, meals, truth)
    print(f"detected {len(meals)} meal intervals")
    return 0


def cmd_evaluate_bites(args) -> int:
    detected = io.bite_times(io.load_events(args.detected))
    truth = io.bite_intervals(io.load_events(args.truth))
    rep = bite_report(match_bites(detected, truth))
    rows = [report.bite_report_row("detections", rep)]
    print(report.format_table(report.BITE_COLUMNS, rows))
    if args.csv:
        report.write_csv(args.csv, report.BITE_COLUMNS, rows)
    if args.figure:
        duration = max([b.end_s for b in truth] + list(detected.timestamps_s),
                       default=1.0)
        report.save_bite_match_figure(args.figure, detected, truth, duration)
    return 0


def cmd_evaluate_meals(args) -> int:
    est = io.meal_intervals(io.load_events(args.est))
    truth = io.meal_intervals(io.load_events(args.truth))
    confusion = meal_confusion(est, truth, args.duration, args.resolution)
    ratio = args.ratio if args.ratio else meal_duration_ratio(truth, args.duration)
    rep = meal_report(confusion, ratio, jaccard_index(est, truth))
    rows = [report.meal_report_row("density", rep)]
    print(f"weighting ratio: {ratio}")
    print(report.format_table(report.MEAL_COLUMNS, rows))
    if args.csv:
        report.write_csv(args.csv, report.MEAL_COLUMNS, rows)
    if args.figure:
        report.save_interval_timeline_figure(args.figure, est, truth, args.duration)
    return 0


def cmd_loso(args) -> int:
    subjects = io.load_manifest(args.manifest)
    report_dir = Path(args.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    det_cfg = BiteDetectConfig(lambda_p=args.lambda_p, min_gap_s=args.min_gap)
    loc_cfg = LocalizerConfig()

    bite_rows = []
    meal_rows = []
    pooled_tp = pooled_fp = pooled_fn = 0
    for held_out in subjects:
        rng = np.random.default_rng(args.seed)
        pool = _build_pool(subjects, args, held_out.subject_id, rng)
        params = init_params(_net_config(args), args.seed)
        params = train(params, pool, _train_config(args), augment=args.augment)

        tp = fp = fn = 0
        for sess in held_out.sessions:
            if sess.kind != "meal":
                continue
            rec = _load_pipeline_input(sess.recording, raw=False)
            probs = forward_sequence(params, rec.data)
            bites = detect_bites(probs, rec.sample_rate_hz, det_cfg,
                                 downsample=params.config.downsample)
            truth = io.bite_intervals(io.load_events(sess.events))
            c = match_bites(bites, truth)
            tp, fp, fn = tp + c.tp, fp + c.fp, fn + c.fn
        from .metrics import BiteConfusion
        rep = bite_report(BiteConfusion(tp, fp, fn))
        bite_rows.append(report.bite_report_row(held_out.subject_id, rep))
        pooled_tp, pooled_fp, pooled_fn = (pooled_tp + tp, pooled_fp + fp,
                                           pooled_fn + fn)

        if args.eval_meals:
            for k, sess in enumerate(s for s in held_out.sessions
                                     if s.kind == "free"):
                rec = _load_pipeline_input(sess.recording, raw=False)
                probs = forward_sequence(params, rec.data)
                bites = detect_bites(probs, rec.sample_rate_hz, det_cfg,
                                     downsample=params.config.downsample)
                est = localize_meals(bites, rec.duration_s,
                                     rec.sample_rate_hz, loc_cfg)
                truth = io.meal_intervals(io.load_events(sess.events))
                confusion = meal_confusion(est, truth, rec.duration_s)
                ratio = meal_duration_ratio(truth, rec.duration_s)
                rep = meal_report(confusion, ratio, jaccard_index(est, truth))
                label = f"{held_out.subject_id}/free{k}"
                meal_rows.append(report.meal_report_row(label, rep))
                smoothed = smooth_close(
                    impulse_train(bites, rec.duration_s, rec.sample_rate_hz),
                    loc_cfg, rec.sample_rate_hz)
                report.save_localization_figure(
                    report_dir / f"meals_{held_out.subject_id}_{k}.png",
                    smoothed, rec.sample_rate_hz, loc_cfg.lambda_s, est, truth)

    from .metrics import BiteConfusion
    pooled = bite_report(BiteConfusion(pooled_tp, pooled_fp, pooled_fn))
    bite_rows.append(report.bite_report_row("pooled", pooled))
    print(report.format_table(report.BITE_COLUMNS, bite_rows))
    report.write_csv(report_dir / "bites.csv", report.BITE_COLUMNS, bite_rows)
    if meal_rows:
        print(report.format_table(report.MEAL_COLUMNS, meal_rows))
        report.write_csv(report_dir / "meals.csv", report.MEAL_COLUMNS, meal_rows)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (io.DataFormatError, OSError) as exc:
        print(f"bitewatch: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"bitewatch: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
