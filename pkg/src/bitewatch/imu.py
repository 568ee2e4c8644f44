"""IMU recording model and per-recording preprocessing.

A recording is a single M x 6 float array with columns ax, ay, az, gx, gy, gz
(acceleration and angular velocity in sensor-native units). Sample n sits at
time n / sample_rate_hz; the series is assumed uniformly spaced.

Preprocessing consists of hand mirroring (mapping left-wrist frames onto the
right-wrist reference), moving-average smoothing of all six channels, and
gravity removal via a high-pass FIR applied to the acceleration channels only.
All operations are pure and return new recordings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

ACCEL = slice(0, 3)
GYRO = slice(3, 6)

# Sign pattern mapping a left-wrist frame onto the right-wrist reference:
# ax, gy and gz flip direction, the other channels are already mirrored.
MIRROR_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0, -1.0, -1.0])


@dataclass(frozen=True, eq=False)
class ImuRecording:
    """A uniformly sampled 6-channel wrist recording."""

    data: np.ndarray
    sample_rate_hz: float
    handedness: str = "R"
    units: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != 6:
            raise ValueError("recording data must be an M x 6 array")
        if data.shape[0] < 1:
            raise ValueError("recording must contain at least one sample")
        if not np.all(np.isfinite(data)):
            raise ValueError("recording contains non-finite samples")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.handedness not in ("L", "R"):
            raise ValueError("handedness must be 'L' or 'R'")
        object.__setattr__(self, "data", data)

    @property
    def num_samples(self) -> int:
        return self.data.shape[0]

    @property
    def duration_s(self) -> float:
        return self.num_samples / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(self.num_samples) / self.sample_rate_hz


@dataclass(frozen=True)
class PreprocessConfig:
    """Smoothing and gravity-removal filter parameters.

    Defaults assume a 100 Hz sample rate; scale ma_len/hp_len for other rates.
    """

    ma_len: int = 25
    ma_tap: float = 1.0 / 25.0
    hp_cutoff_hz: float = 1.0
    hp_len: int = 512

    def __post_init__(self):
        if self.ma_len < 1:
            raise ValueError("ma_len must be >= 1")
        if self.hp_len < 2:
            raise ValueError("hp_len must be >= 2")
        if not self.hp_cutoff_hz > 0:
            raise ValueError("hp_cutoff_hz must be positive")


def mirror_hand(rec: ImuRecording) -> ImuRecording:
    """Map a left-wrist recording onto the right-wrist reference.

    Right-handed recordings are returned unchanged.
    """
    if rec.handedness == "R":
        return rec
    return ImuRecording(rec.data * MIRROR_SIGNS, rec.sample_rate_hz, "R", rec.units)


def apply_mirror(data: np.ndarray) -> np.ndarray:
    """Apply the wrist sign transform to raw M x 6 data unconditionally."""
    return np.asarray(data) * MIRROR_SIGNS


def moving_average_kernel(cfg: PreprocessConfig) -> np.ndarray:
    return np.full(cfg.ma_len, cfg.ma_tap)


def highpass_kernel(num_taps: int, cutoff_hz: float, fs_hz: float) -> np.ndarray:
    """Windowed-sinc (Hamming) high-pass FIR via spectral inversion.

    The underlying low-pass is normalized to unit DC gain, so the returned
    kernel has (near-)zero response at DC regardless of truncation.
    """
    if not 0 < cutoff_hz < fs_hz / 2:
        raise ValueError("cutoff must lie in (0, fs/2)")
    n = np.arange(num_taps)
    center = (num_taps - 1) / 2.0
    fc = cutoff_hz / fs_hz
    lp = 2 * fc * np.sinc(2 * fc * (n - center))
    lp *= np.hamming(num_taps)
    lp /= lp.sum()
    hp = -lp
    hp[(num_taps - 1) // 2] += 1.0
    return hp


def convolve_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-length convolution with implicit zero padding at both edges.

    Output index n equals sum_j kernel[j] * x[n + (K-1)//2 - j], which keeps a
    linear-phase kernel's output time-aligned with its input.
    """
    if x.ndim == 1:
        return signal.fftconvolve(x, kernel, mode="same")
    return signal.fftconvolve(x, kernel[:, None], mode="same", axes=0)


def preprocess(rec: ImuRecording, cfg: PreprocessConfig | None = None) -> ImuRecording:
    """Smooth all six channels, then remove gravity from the accel channels.

    Every channel is convolved with the moving-average kernel; the three
    acceleration channels additionally pass through the high-pass FIR. Output
    length and sample rate match the input.
    """
    cfg = cfg or PreprocessConfig()
    fs = rec.sample_rate_hz
    if not cfg.hp_cutoff_hz < fs / 2:
        raise ValueError("high-pass cutoff must be below the Nyquist rate")
    if rec.num_samples < cfg.hp_len:
        raise ValueError("recording too short to filter")
    out = convolve_same(rec.data, moving_average_kernel(cfg))
    hp = highpass_kernel(cfg.hp_len, cfg.hp_cutoff_hz, fs)
    out[:, ACCEL] = convolve_same(out[:, ACCEL], hp)
    return ImuRecording(out, fs, rec.handedness, rec.units)


def accel_magnitude(rec: ImuRecording) -> np.ndarray:
    """Per-sample Euclidean norm of the acceleration triple."""
    return np.sqrt((rec.data[:, ACCEL] ** 2).sum(axis=1))


def resample(rec: ImuRecording, target_hz: float) -> ImuRecording:
    """Linearly interpolate each channel onto a uniform grid at target_hz.

    The output spans the same duration (M/fs seconds), so the sample count is
    round(duration * target_hz). Target points beyond the last source sample
    are linearly extrapolated from the final segment.
    """
    if not target_hz > 0:
        raise ValueError("target rate must be positive")
    m = rec.num_samples
    fs = rec.sample_rate_hz
    n_out = max(1, int(round(m * target_hz / fs)))
    t_src = np.arange(m) / fs
    t_dst = np.arange(n_out) / target_hz
    out = np.empty((n_out, 6))
    for c in range(6):
        out[:, c] = np.interp(t_dst, t_src, rec.data[:, c])
    if m >= 2:
        tail = t_dst > t_src[-1]
        if np.any(tail):
            if m >= 3:
                # second-order one-sided slope at the last source sample
                slope = (3 * rec.data[-1] - 4 * rec.data[-2] + rec.data[-3]) * fs / 2
            else:
                slope = (rec.data[-1] - rec.data[-2]) * fs
            dt = (t_dst[tail] - t_src[-1])[:, None]
            out[tail] = rec.data[-1] + dt * slope
    return ImuRecording(out, target_hz, rec.handedness, rec.units)
