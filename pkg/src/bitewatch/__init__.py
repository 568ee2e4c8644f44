"""Bite detection and meal localization from wrist IMU recordings."""

from .bites import BiteDetectConfig, BiteSet, detect_bites, union_bites
from .imu import (ImuRecording, PreprocessConfig, accel_magnitude, mirror_hand,
                  preprocess, resample)
from .meals import (LocalizerConfig, MealIntervalSet, dbscan_localize,
                    extract_edge_intervals, impulse_train, localize_meals,
                    refine_intervals, smooth_close)
from .metrics import (BiteConfusion, EvalReport, MealConfusion, jaccard_index,
                      match_bites, meal_confusion, precision_recall_f1,
                      weighted_accuracy, wrist_motion_energy)
from .net import (ModelParams, NetConfig, TrainConfig, bce_loss, count_params,
                  deserialize_params, forward_sequence, forward_window,
                  gradient_check, init_params, serialize_params, train)
from .synth import BiteTemplate, SynthSpec, generate_recording
from .windows import (BiteAnnotation, Label, LabeledWindow, MealAnnotation,
                      WindowConfig, assign_label, label_windows,
                      make_balanced_batches, rotation_augment, slide_windows)

__version__ = "0.1.0"
