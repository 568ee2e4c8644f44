"""End-to-end convolutional-recurrent bite detector.

Architecture: three 1D conv layers (ReLU, "same" zero padding), the first two
followed by x2 max pooling, feeding a single LSTM layer whose three gates use
the hard sigmoid max(0, min(1, 0.2x + 0.5)) while candidate and cell output
use tanh. A one-neuron dense layer with a logistic sigmoid turns each LSTM
output into a bite probability. Two pooling stages mean an M-sample recording
yields an N = M/4 prediction vector; trailing samples that do not fill a
multiple of the pooling factor are truncated before the conv stack.

Training uses the last LSTM step only, with dropout on the dense-layer input;
inference emits a probability for every step. Everything here is plain numpy:
parameters are stored float32 (matching the weight-file format) and all math
runs in float64.

Parameter tensors, in serialization order:
    conv{i}_w (k, c_in, c_out), conv{i}_b (c_out,)   for each conv layer
    lstm_wx (c_last, 4H), lstm_wh (H, 4H), lstm_b (4H,)   gate order i,f,g,o
    dense_w (H,), dense_b ()
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .windows import Label, LabeledWindow, make_balanced_batches, rotation_augment

MIN_INPUT_SAMPLES = 16
PROB_CLAMP = 1e-7

MAGIC = b"BWNET"
FORMAT_VERSION = 1


class WeightFormatError(ValueError):
    """Raised when a serialized weight stream cannot be decoded."""


@dataclass(frozen=True)
class NetConfig:
    conv_filters: tuple[int, ...] = (32, 64, 128)
    conv_kernels: tuple[int, ...] = (5, 3, 3)
    pool_after: tuple[bool, ...] = (True, True, False)
    lstm_units: int = 128
    dense_units: int = 1
    dropout_rate: float = 0.5
    input_channels: int = 6

    def __post_init__(self):
        if not (len(self.conv_filters) == len(self.conv_kernels) == len(self.pool_after)):
            raise ValueError("conv_filters, conv_kernels, pool_after must align")
        if self.dense_units != 1:
            raise ValueError("the output layer is a single neuron")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @property
    def downsample(self) -> int:
        return 2 ** sum(self.pool_after)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 5
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """All learnable tensors plus the architecture they belong to."""

    config: NetConfig
    tensors: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        expected = dict(tensor_shapes(self.config))
        if list(self.tensors.keys()) != list(expected.keys()):
            raise ValueError("tensor set does not match config")
        for name, arr in self.tensors.items():
            if tuple(arr.shape) != expected[name]:
                raise ValueError(f"tensor {name} has shape {arr.shape}, "
                                 f"expected {expected[name]}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"tensor {name} contains non-finite values")


def tensor_shapes(cfg: NetConfig) -> list[tuple[str, tuple[int, ...]]]:
    shapes = []
    c_in = cfg.input_channels
    for i, (k, c_out) in enumerate(zip(cfg.conv_kernels, cfg.conv_filters)):
        shapes.append((f"conv{i}_w", (k, c_in, c_out)))
        shapes.append((f"conv{i}_b", (c_out,)))
        c_in = c_out
    h = cfg.lstm_units
    shapes.append(("lstm_wx", (c_in, 4 * h)))
    shapes.append(("lstm_wh", (h, 4 * h)))
    shapes.append(("lstm_b", (4 * h,)))
    shapes.append(("dense_w", (h,)))
    shapes.append(("dense_b", ()))
    return shapes


def init_params(cfg: NetConfig, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, LSTM forget-gate bias 1."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    h = cfg.lstm_units
    for name, shape in tensor_shapes(cfg):
        if name.endswith("_b"):
            arr = np.zeros(shape)
            if name == "lstm_b":
                arr[h : 2 * h] = 1.0
        else:
            if name.startswith("conv"):
                k, c_in, c_out = shape
                fan_in, fan_out = k * c_in, k * c_out
            elif name == "dense_w":
                fan_in, fan_out = shape[0], 1
            else:
                fan_in, fan_out = shape
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            arr = rng.uniform(-limit, limit, size=shape)
        tensors[name] = arr.astype(np.float32)
    return ModelParams(cfg, tensors)


def count_params(params: ModelParams) -> int:
    return int(sum(t.size for t in params.tensors.values()))


# ---------------------------------------------------------------------------
# forward / backward primitives (float64)


def _work(params: ModelParams) -> dict[str, np.ndarray]:
    return {k: v.astype(np.float64) for k, v in params.tensors.items()}


def _hard_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.clip(0.2 * x + 0.5, 0.0, 1.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Same-padded 1D correlation. x: (B, T, Cin), w: (k, Cin, Cout)."""
    k = w.shape[0]
    pl = (k - 1) // 2
    xp = np.pad(x, ((0, 0), (pl, k - 1 - pl), (0, 0)))
    win = sliding_window_view(xp, k, axis=1)  # (B, T, Cin, k)
    z = np.einsum("btck,kco->bto", win, w, optimize=True) + b
    return z, xp


def _conv_backward(dz: np.ndarray, xp: np.ndarray, w: np.ndarray):
    k = w.shape[0]
    t = dz.shape[1]
    pl = (k - 1) // 2
    win = sliding_window_view(xp, k, axis=1)
    dw = np.einsum("btck,bto->kco", win, dz, optimize=True)
    db = dz.sum(axis=(0, 1))
    dxp = np.zeros_like(xp)
    for j in range(k):
        dxp[:, j : j + t, :] += dz @ w[j].T
    return dxp[:, pl : pl + t, :], dw, db


def _pool_forward(a: np.ndarray):
    b, t, c = a.shape
    pairs = a.reshape(b, t // 2, 2, c)
    idx = pairs.argmax(axis=2)
    out = np.take_along_axis(pairs, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return out, idx


def _pool_backward(dout: np.ndarray, idx: np.ndarray, t: int):
    b, t2, c = dout.shape
    da = np.zeros((b, t2, 2, c))
    np.put_along_axis(da, idx[:, :, None, :], dout[:, :, None, :], axis=2)
    return da.reshape(b, t, c)


def _conv_stack_forward(work, x: np.ndarray, n_layers: int, pool_after, cache=None):
    """Run the conv stack; optionally record caches for backprop."""
    for i in range(n_layers):
        z, xp = _conv_forward(x, work[f"conv{i}_w"], work[f"conv{i}_b"])
        a = np.maximum(z, 0.0)
        del z
        if pool_after[i]:
            out, idx = _pool_forward(a)
        else:
            out, idx = a, None
        if cache is not None:
            cache.append({"xp": xp, "a": a, "idx": idx})
        x = out
    return x


def _conv_stack_backward(work, cache, d_out: np.ndarray, n_layers: int, pool_after, grads):
    for i in reversed(range(n_layers)):
        layer = cache[i]
        if pool_after[i]:
            d_out = _pool_backward(d_out, layer["idx"], layer["a"].shape[1])
        dz = d_out * (layer["a"] > 0)
        d_out, dw, db = _conv_backward(dz, layer["xp"], work[f"conv{i}_w"])
        grads[f"conv{i}_w"] = dw
        grads[f"conv{i}_b"] = db
    return d_out


def _lstm_forward(work, z: np.ndarray, want_cache: bool):
    """Scan the LSTM over z (B, N, C) from fresh zero state."""
    wx, wh, bias = work["lstm_wx"], work["lstm_wh"], work["lstm_b"]
    b, n, _ = z.shape
    h_units = wh.shape[0]
    xp = z @ wx + bias  # (B, N, 4H)
    h = np.zeros((b, h_units))
    c = np.zeros((b, h_units))
    h_all = np.empty((b, n, h_units))
    cache = None
    if want_cache:
        cache = {k: np.empty((b, n, h_units)) for k in ("i", "f", "g", "o", "c", "tc")}
    for t in range(n):
        zt = xp[:, t] + h @ wh
        i = _hard_sigmoid(zt[:, :h_units])
        f = _hard_sigmoid(zt[:, h_units : 2 * h_units])
        g = np.tanh(zt[:, 2 * h_units : 3 * h_units])
        o = _hard_sigmoid(zt[:, 3 * h_units :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        h_all[:, t] = h
        if want_cache:
            for key, val in (("i", i), ("f", f), ("g", g), ("o", o), ("c", c), ("tc", tc)):
                cache[key][:, t] = val
    return h_all, cache


def _lstm_backward(work, z, h_all, cache, d_h_all, grads):
    wx, wh = work["lstm_wx"], work["lstm_wh"]
    b, n, h_units = h_all.shape
    dz_all = np.empty((b, n, 4 * h_units))
    dh_carry = np.zeros((b, h_units))
    dc_carry = np.zeros((b, h_units))
    for t in reversed(range(n)):
        i, f, g, o = (cache[k][:, t] for k in ("i", "f", "g", "o"))
        tc = cache["tc"][:, t]
        c_prev = cache["c"][:, t - 1] if t > 0 else np.zeros((b, h_units))
        dh = d_h_all[:, t] + dh_carry
        do = dh * tc
        dc = dh * o * (1.0 - tc**2) + dc_carry
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_carry = dc * f
        dzt = np.concatenate(
            [
                di * 0.2 * ((i > 0) & (i < 1)),
                df * 0.2 * ((f > 0) & (f < 1)),
                dg * (1.0 - g**2),
                do * 0.2 * ((o > 0) & (o < 1)),
            ],
            axis=1,
        )
        dz_all[:, t] = dzt
        dh_carry = dzt @ wh.T
    h_prev = np.concatenate([np.zeros((b, 1, h_units)), h_all[:, :-1]], axis=1)
    grads["lstm_wx"] = np.einsum("bnc,bnq->cq", z, dz_all, optimize=True)
    grads["lstm_wh"] = np.einsum("bnh,bnq->hq", h_prev, dz_all, optimize=True)
    grads["lstm_b"] = dz_all.sum(axis=(0, 1))
    return dz_all @ wx.T


def _truncate(data: np.ndarray, factor: int) -> np.ndarray:
    m = data.shape[0]
    if m < MIN_INPUT_SAMPLES:
        raise ValueError("input too short")
    return data[: (m // factor) * factor]


def _forward_train_batch(work, cfg: NetConfig, frames: np.ndarray,
                         dropout_rate: float, rng: np.random.Generator | None):
    """Forward pass for a batch of windows, keeping caches for backprop.

    Returns (probs, cache). Dropout (if rate > 0) is applied to the last LSTM
    output, i.e. the dense-layer input.
    """
    n_layers = len(cfg.conv_filters)
    conv_cache: list[dict] = []
    x = np.ascontiguousarray(frames, dtype=np.float64)
    z = _conv_stack_forward(work, x, n_layers, cfg.pool_after, conv_cache)
    h_all, lstm_cache = _lstm_forward(work, z, want_cache=True)
    h_last = h_all[:, -1]
    if dropout_rate > 0.0:
        if rng is None:
            raise ValueError("dropout requires an rng")
        keep = 1.0 - dropout_rate
        mask = (rng.random(h_last.shape) < keep) / keep
    else:
        mask = np.ones_like(h_last)
    hd = h_last * mask
    logits = hd @ work["dense_w"] + work["dense_b"]
    probs = _sigmoid(logits)
    cache = {
        "conv": conv_cache,
        "z": z,
        "h_all": h_all,
        "lstm": lstm_cache,
        "mask": mask,
        "hd": hd,
    }
    return probs, cache


def _backward_batch(work, cfg: NetConfig, cache, dlogits: np.ndarray):
    grads: dict[str, np.ndarray] = {}
    grads["dense_w"] = cache["hd"].T @ dlogits
    grads["dense_b"] = np.asarray(dlogits.sum())
    dhd = np.outer(dlogits, work["dense_w"])
    dh_last = dhd * cache["mask"]
    h_all = cache["h_all"]
    d_h_all = np.zeros_like(h_all)
    d_h_all[:, -1] = dh_last
    dz = _lstm_backward(work, cache["z"], h_all, cache["lstm"], d_h_all, grads)
    _conv_stack_backward(work, cache["conv"], dz, len(cfg.conv_filters),
                         cfg.pool_after, grads)
    return grads


# ---------------------------------------------------------------------------
# public forward passes


def forward_sequence(params: ModelParams, data: np.ndarray) -> np.ndarray:
    """Per-step bite probabilities for a whole preprocessed recording.

    data is M x 6; the output has floor(M / downsample) entries, one per
    prediction-timeline step. Dropout is inactive.
    """
    cfg = params.config
    work = _work(params)
    x = _truncate(np.asarray(data, dtype=np.float64), cfg.downsample)
    z = _conv_stack_forward(work, x[None], len(cfg.conv_filters), cfg.pool_after)
    wx, wh, bias = work["lstm_wx"], work["lstm_wh"], work["lstm_b"]
    dense_w, dense_b = work["dense_w"], work["dense_b"]
    h_units = wh.shape[0]
    n = z.shape[1]
    probs = np.empty(n)
    h = np.zeros(h_units)
    c = np.zeros(h_units)
    chunk = 8192
    for t0 in range(0, n, chunk):
        xp = z[0, t0 : t0 + chunk] @ wx + bias
        for r in range(xp.shape[0]):
            zt = xp[r] + h @ wh
            i = _hard_sigmoid(zt[:h_units])
            f = _hard_sigmoid(zt[h_units : 2 * h_units])
            g = np.tanh(zt[2 * h_units : 3 * h_units])
            o = _hard_sigmoid(zt[3 * h_units :])
            c = f * c + i * g
            h = o * np.tanh(c)
            probs[t0 + r] = h @ dense_w + dense_b
    return _sigmoid(probs)


def forward_window(
    params: ModelParams,
    frame: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> float:
    """Bite probability at the last step of a single window."""
    if not training:
        return float(forward_sequence(params, frame)[-1])
    cfg = params.config
    work = _work(params)
    x = _truncate(np.asarray(frame, dtype=np.float64), cfg.downsample)
    probs, _ = _forward_train_batch(work, cfg, x[None], cfg.dropout_rate, rng)
    return float(probs[0])


def bce_loss(preds, targets) -> float:
    """Binary cross entropy, summed over the batch. Targets are 0/1."""
    p = np.clip(np.asarray(preds, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError("preds and targets must have equal length")
    return float(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).sum())


def train(
    params: ModelParams,
    pool: list[LabeledWindow],
    tc: TrainConfig,
    augment: bool = False,
    on_epoch=None,
) -> ModelParams:
    """Run balanced-batch RMSProp training and return the updated params.

    Labels are mapped {-1 -> 0, +1 -> 1}. With ``augment`` each example gets
    the random re-orientation treatment per batch. ``on_epoch(epoch, loss)``
    is invoked with the mean per-batch loss after each epoch.
    """
    cfg = params.config
    rng = np.random.default_rng(tc.seed)
    work = _work(params)
    rms = {k: np.zeros_like(v) for k, v in work.items()}
    for epoch in range(tc.epochs):
        batches = make_balanced_batches(pool, tc.batch_size, rng)
        losses = []
        for batch in batches:
            frames = []
            targets = np.empty(len(batch))
            for j, win in enumerate(batch):
                frame = win.frame
                if augment:
                    frame = rotation_augment(frame, rng)
                frames.append(frame)
                targets[j] = 1.0 if win.label is Label.POSITIVE else 0.0
            stacked = _truncate_batch(np.stack(frames), cfg.downsample)
            probs, cache = _forward_train_batch(work, cfg, stacked,
                                                cfg.dropout_rate, rng)
            losses.append(bce_loss(probs, targets))
            dlogits = probs - targets
            grads = _backward_batch(work, cfg, cache, dlogits)
            for key, g in grads.items():
                rms[key] = tc.rmsprop_decay * rms[key] + (1 - tc.rmsprop_decay) * g * g
                work[key] = work[key] - tc.learning_rate * g / (
                    np.sqrt(rms[key]) + tc.rmsprop_epsilon
                )
        if on_epoch is not None:
            on_epoch(epoch, float(np.mean(losses)))
    tensors = {k: work[k].astype(np.float32) for k in params.tensors}
    return ModelParams(cfg, tensors)


def _truncate_batch(frames: np.ndarray, factor: int) -> np.ndarray:
    m = frames.shape[1]
    if m < MIN_INPUT_SAMPLES:
        raise ValueError("input too short")
    return frames[:, : (m // factor) * factor]


def gradient_check(
    params: ModelParams,
    frame: np.ndarray,
    target: float,
    fd_step: float = 1e-4,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Checks every scalar parameter; intended for small configs. Dropout is
    disabled so the loss is a deterministic function of the parameters.
    """
    cfg = params.config
    work = _work(params)
    x = _truncate(np.asarray(frame, dtype=np.float64), cfg.downsample)[None]
    t = np.array([float(target)])

    def loss_of(w) -> float:
        probs, _ = _forward_train_batch(w, cfg, x, 0.0, None)
        return bce_loss(probs, t)

    probs, cache = _forward_train_batch(work, cfg, x, 0.0, None)
    grads = _backward_batch(work, cfg, cache, probs - t)

    worst = 0.0
    for key in work:
        flat = work[key].reshape(-1) if work[key].ndim else work[key].reshape(1)
        gflat = np.asarray(grads[key]).reshape(flat.shape)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + fd_step
            hi = loss_of(work)
            flat[idx] = orig - fd_step
            lo = loss_of(work)
            flat[idx] = orig
            numeric = (hi - lo) / (2 * fd_step)
            denom = max(abs(gflat[idx]), abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[idx] - numeric) / denom)
    return worst


# ---------------------------------------------------------------------------
# serialization


def serialize_params(params: ModelParams) -> bytes:
    """Versioned little-endian float32 weight stream."""
    cfg = params.config
    header = {
        "config": {
            "conv_filters": list(cfg.conv_filters),
            "conv_kernels": list(cfg.conv_kernels),
            "pool_after": list(cfg.pool_after),
            "lstm_units": cfg.lstm_units,
            "dense_units": cfg.dense_units,
            "dropout_rate": cfg.dropout_rate,
            "input_channels": cfg.input_channels,
        },
        "tensors": [[name, list(arr.shape)] for name, arr in params.tensors.items()],
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = bytearray()
    blob += MAGIC
    blob += bytes([FORMAT_VERSION])
    blob += len(head).to_bytes(4, "little")
    blob += head
    for arr in params.tensors.values():
        blob += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return bytes(blob)


def deserialize_params(data: bytes) -> ModelParams:
    if len(data) < len(MAGIC) + 5:
        raise WeightFormatError("truncated stream")
    if data[: len(MAGIC)] != MAGIC:
        raise WeightFormatError("not a bitewatch weight stream")
    version = data[len(MAGIC)]
    if version != FORMAT_VERSION:
        raise WeightFormatError(
            f"version mismatch: file has {version}, expected {FORMAT_VERSION}"
        )
    off = len(MAGIC) + 1
    head_len = int.from_bytes(data[off : off + 4], "little")
    off += 4
    if len(data) < off + head_len:
        raise WeightFormatError("truncated stream")
    try:
        header = json.loads(data[off : off + head_len].decode("utf-8"))
        raw = header["config"]
        cfg = NetConfig(
            conv_filters=tuple(raw["conv_filters"]),
            conv_kernels=tuple(raw["conv_kernels"]),
            pool_after=tuple(bool(p) for p in raw["pool_after"]),
            lstm_units=int(raw["lstm_units"]),
            dense_units=int(raw["dense_units"]),
            dropout_rate=float(raw["dropout_rate"]),
            input_channels=int(raw["input_channels"]),
        )
        listed = [(name, tuple(shape)) for name, shape in header["tensors"]]
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"corrupt header: {exc}") from exc
    if listed != [(n, s) for n, s in tensor_shapes(cfg)]:
        raise WeightFormatError("shape mismatch between header and config")
    off += head_len
    tensors: dict[str, np.ndarray] = {}
    for name, shape in listed:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 4
        if len(data) < off + nbytes:
            raise WeightFormatError("truncated stream")
        arr = np.frombuffer(data[off : off + nbytes], dtype="<f4").reshape(shape)
        tensors[name] = arr.astype(np.float32)
        off += nbytes
    if off != len(data):
        raise WeightFormatError("trailing bytes after tensor payload")
    return ModelParams(cfg, tensors)
