"""Two-layer stacked stateful LSTM emitting a per-step probability.

The output head applies a logistic over an affine map of selected hidden
state(s) concatenated with the previous step's prediction, so the prediction
feeds back into the next step. Training is truncated backpropagation through
time with exact gradients inside each window, including the feedback path.

All math runs in float64. Everything here is deterministic for a fixed seed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import TrainingDivergedError
from .validation import check_positive

HEAD_INPUTS = ("top", "first", "both")

# sub-slices of the stacked 4H gate pre-activation, in order i, f, g, o
def _gate_slices(hidden: int):
    return (slice(0, hidden), slice(hidden, 2 * hidden),
            slice(2 * hidden, 3 * hidden), slice(3 * hidden, 4 * hidden))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _sigmoid_scalar(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


@dataclass
class LstmLayerParams:
    """One LSTM layer: stacked gate weights in row order (i, f, g, o)."""

    w: np.ndarray  # (4H, I) input weights
    u: np.ndarray  # (4H, H) recurrent weights
    b: np.ndarray  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.u.shape[1]

    @property
    def input_size(self) -> int:
        return self.w.shape[1]

    def validate(self):
        h = self.hidden_size
        if self.w.shape[0] != 4 * h or self.u.shape != (4 * h, h) or self.b.shape != (4 * h,):
            raise ValueError(
                f"inconsistent layer shapes w={self.w.shape} u={self.u.shape} b={self.b.shape}"
            )
        for arr in (self.w, self.u, self.b):
            if not np.isfinite(arr).all():
                raise ValueError("non-finite layer parameters")


@dataclass
class ModelParams:
    """Full model: two stacked LSTM layers plus the feedback output head."""

    layer1: LstmLayerParams   # consumes the input vectors
    layer2: LstmLayerParams   # consumes layer1's hidden state
    head_w: np.ndarray        # (H+1,) for "top"/"first", (2H+1,) for "both"
    head_b: float
    y0: float = 0.5           # initial feedback prediction for fresh sequences
    head_input: str = "top"

    @property
    def input_size(self) -> int:
        return self.layer1.input_size

    @property
    def hidden_size(self) -> int:
        return self.layer1.hidden_size

    def validate(self):
        self.layer1.validate()
        self.layer2.validate()
        h = self.hidden_size
        if self.layer2.input_size != h or self.layer2.hidden_size != h:
            raise ValueError("layer2 must consume and produce H-vectors")
        if self.head_input not in HEAD_INPUTS:
            raise ValueError(f"head_input must be one of {HEAD_INPUTS}")
        expected = 2 * h + 1 if self.head_input == "both" else h + 1
        if self.head_w.shape != (expected,):
            raise ValueError(
                f"head_w shape {self.head_w.shape} does not match head_input "
                f"{self.head_input!r} (expected ({expected},))"
            )
        if not (0.0 <= self.y0 <= 1.0):
            raise ValueError(f"y0 must lie in [0, 1], got {self.y0}")


@dataclass(frozen=True)
class StepState:
    """Carried state: per-layer hidden/cell vectors and the previous prediction."""

    h1: np.ndarray
    c1: np.ndarray
    h2: np.ndarray
    c2: np.ndarray
    prev_y: float


def initial_state(params: ModelParams) -> StepState:
    h = params.hidden_size
    return StepState(h1=np.zeros(h), c1=np.zeros(h), h2=np.zeros(h),
                     c2=np.zeros(h), prev_y=params.y0)


@dataclass
class TrainConfig:
    class_weights: tuple[float, float] | None = None  # (w_pos, w_neg); None = inverse frequency
    lr: float = 0.05
    epochs: int = 30
    grad_clip: float = 5.0
    tbptt_len: int = 32
    seed: int = 0
    init_scale: float = 0.08
    hidden_size: int = 64
    head_input: str = "top"
    y0: float = 0.5

    def validate(self):
        for name in ("lr", "epochs", "grad_clip", "tbptt_len", "init_scale", "hidden_size"):
            check_positive(getattr(self, name), name)
        if self.class_weights is not None:
            if len(self.class_weights) != 2 or any(w <= 0 for w in self.class_weights):
                raise ValueError("class_weights must be two positive reals")
        if self.head_input not in HEAD_INPUTS:
            raise ValueError(f"head_input must be one of {HEAD_INPUTS}")


def lstm_cell(x: np.ndarray, h: np.ndarray, c: np.ndarray,
              p: LstmLayerParams) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM step: returns (h', c')."""
    hidden = p.hidden_size
    if x.shape != (p.input_size,) or h.shape != (hidden,) or c.shape != (hidden,):
        raise ValueError(
            f"shape mismatch: x={x.shape} h={h.shape} c={c.shape} "
            f"for layer with I={p.input_size} H={hidden}"
        )
    z = p.w @ x + p.u @ h + p.b
    si, sf, sg, so = _gate_slices(hidden)
    i = _sigmoid(z[si])
    f = _sigmoid(z[sf])
    g = np.tanh(z[sg])
    o = _sigmoid(z[so])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _head_vector(h1: np.ndarray, h2: np.ndarray, prev_y: float, head_input: str) -> np.ndarray:
    if head_input == "top":
        return np.concatenate([h2, [prev_y]])
    if head_input == "first":
        return np.concatenate([h1, [prev_y]])
    return np.concatenate([h1, h2, [prev_y]])


class ForwardResult(NamedTuple):
    probs: np.ndarray
    final: StepState


class _StepCache(NamedTuple):
    x: np.ndarray
    i1: np.ndarray; f1: np.ndarray; g1: np.ndarray; o1: np.ndarray
    c1_prev: np.ndarray; c1: np.ndarray; h1_prev: np.ndarray; h1: np.ndarray
    i2: np.ndarray; f2: np.ndarray; g2: np.ndarray; o2: np.ndarray
    c2_prev: np.ndarray; c2: np.ndarray; h2_prev: np.ndarray; h2: np.ndarray
    prev_y: float
    p: float


def _step(x: np.ndarray, state: StepState, params: ModelParams) -> tuple[_StepCache, StepState]:
    h = params.hidden_size
    si, sf, sg, so = _gate_slices(h)
    z1 = params.layer1.w @ x + params.layer1.u @ state.h1 + params.layer1.b
    i1, f1 = _sigmoid(z1[si]), _sigmoid(z1[sf])
    g1, o1 = np.tanh(z1[sg]), _sigmoid(z1[so])
    c1 = f1 * state.c1 + i1 * g1
    h1 = o1 * np.tanh(c1)

    z2 = params.layer2.w @ h1 + params.layer2.u @ state.h2 + params.layer2.b
    i2, f2 = _sigmoid(z2[si]), _sigmoid(z2[sf])
    g2, o2 = np.tanh(z2[sg]), _sigmoid(z2[so])
    c2 = f2 * state.c2 + i2 * g2
    h2 = o2 * np.tanh(c2)

    head = _head_vector(h1, h2, state.prev_y, params.head_input)
    p = _sigmoid_scalar(float(params.head_w @ head) + params.head_b)
    cache = _StepCache(x=x, i1=i1, f1=f1, g1=g1, o1=o1,
                       c1_prev=state.c1, c1=c1, h1_prev=state.h1, h1=h1,
                       i2=i2, f2=f2, g2=g2, o2=o2,
                       c2_prev=state.c2, c2=c2, h2_prev=state.h2, h2=h2,
                       prev_y=state.prev_y, p=p)
    new_state = StepState(h1=h1, c1=c1, h2=h2, c2=c2, prev_y=p)
    return cache, new_state


def _forward_cached(xs: Sequence[np.ndarray], params: ModelParams,
                    state: StepState) -> tuple[list[_StepCache], StepState]:
    caches = []
    for x in xs:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (params.input_size,):
            raise ValueError(
                f"input vector shape {x.shape} does not match model input "
                f"size {params.input_size}"
            )
        cache, state = _step(x, state, params)
        caches.append(cache)
    return caches, state


def sequence_forward(xs: Sequence[np.ndarray], params: ModelParams,
                     init: StepState | None = None) -> ForwardResult:
    """Run the stacked model over a sequence of input vectors.

    `init` carries state from a previous chunk of the same sequence; omit it
    for fresh sequences, which start from zero states and the configured
    initial feedback prediction. Splitting a sequence into chunks and
    threading the returned state reproduces the whole-sequence outputs
    exactly.
    """
    params.validate()
    state = initial_state(params) if init is None else init
    caches, final = _forward_cached(xs, params, state)
    return ForwardResult(probs=np.array([c.p for c in caches]), final=final)


class LossResult(NamedTuple):
    value: float
    supervised_steps: int

    @property
    def no_supervised_steps(self) -> bool:
        return self.supervised_steps == 0


def sequence_loss(probs: Sequence[float], labels: Sequence[int],
                  class_weights: tuple[float, float] = (1.0, 1.0)) -> LossResult:
    """Time-distributed weighted cross-entropy, averaged over supervised steps.

    Labels are 1 (survives), 0 (dies within horizon), or -1 (excluded
    censored step, contributing nothing). Probabilities must lie strictly
    inside (0, 1): the head guarantees that, so a violation is a bug signal
    and raises rather than being clamped.
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape != y.shape:
        raise ValueError(f"probs and labels differ in length: {p.shape} vs {y.shape}")
    w_pos, w_neg = class_weights
    mask = y >= 0
    n = int(mask.sum())
    if n == 0:
        return LossResult(value=0.0, supervised_steps=0)
    ps = p[mask]
    ys = y[mask]
    if ps.min() <= 0.0 or ps.max() >= 1.0:
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    terms = -(w_pos * ys * np.log(ps) + w_neg * (1 - ys) * np.log(1.0 - ps))
    return LossResult(value=float(terms.mean()), supervised_steps=n)


@dataclass
class ModelGradients:
    w1: np.ndarray
    u1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    u2: np.ndarray
    b2: np.ndarray
    head_w: np.ndarray
    head_b: float
    y0: float

    def items(self):
        return (("w1", self.w1), ("u1", self.u1), ("b1", self.b1),
                ("w2", self.w2), ("u2", self.u2), ("b2", self.b2),
                ("head_w", self.head_w), ("head_b", self.head_b), ("y0", self.y0))

    def global_norm(self) -> float:
        total = 0.0
        for _, value in self.items():
            total += float(np.sum(np.asarray(value) ** 2))
        return float(np.sqrt(total))

    def scale(self, factor: float):
        self.w1 *= factor; self.u1 *= factor; self.b1 *= factor
        self.w2 *= factor; self.u2 *= factor; self.b2 *= factor
        self.head_w *= factor
        self.head_b *= factor
        self.y0 *= factor


def _zero_gradients(params: ModelParams) -> ModelGradients:
    return ModelGradients(
        w1=np.zeros_like(params.layer1.w), u1=np.zeros_like(params.layer1.u),
        b1=np.zeros_like(params.layer1.b),
        w2=np.zeros_like(params.layer2.w), u2=np.zeros_like(params.layer2.u),
        b2=np.zeros_like(params.layer2.b),
        head_w=np.zeros_like(params.head_w), head_b=0.0, y0=0.0)


def _window_backward(caches: list[_StepCache], labels: np.ndarray,
                     params: ModelParams, grads: ModelGradients,
                     class_weights: tuple[float, float], loss_scale: float,
                     y0_feeds_window: bool) -> None:
    """Accumulate exact gradients for one truncated window into `grads`.

    `loss_scale` is the factor applied to each supervised step's loss term
    (1 / supervised-step count). State entering the window is constant;
    `y0_feeds_window` marks that the first step's feedback input is the y0
    parameter itself, so gradient flows into it.
    """
    h = params.hidden_size
    w_pos, w_neg = class_weights
    head_w = params.head_w
    if params.head_input == "top":
        hw_h1 = None
        hw_h2 = head_w[:h]
    elif params.head_input == "first":
        hw_h1 = head_w[:h]
        hw_h2 = None
    else:
        hw_h1 = head_w[:h]
        hw_h2 = head_w[h:2 * h]
    w_y = head_w[-1]

    dh1_next = np.zeros(h)
    dc1_next = np.zeros(h)
    dh2_next = np.zeros(h)
    dc2_next = np.zeros(h)
    dp_feedback = 0.0
    for t in range(len(caches) - 1, -1, -1):
        cache = caches[t]
        label = labels[t]
        dp = dp_feedback
        if label >= 0:
            if label == 1:
                dp += loss_scale * (-w_pos / cache.p)
            else:
                dp += loss_scale * (w_neg / (1.0 - cache.p))
        da = dp * cache.p * (1.0 - cache.p)

        head_vec = _head_vector(cache.h1, cache.h2, cache.prev_y, params.head_input)
        grads.head_w += da * head_vec
        grads.head_b += da
        dprev = da * w_y
        if t > 0:
            dp_feedback = dprev
        elif y0_feeds_window:
            grads.y0 += dprev

        dh2 = dh2_next + (da * hw_h2 if hw_h2 is not None else 0.0)
        dh1_head = da * hw_h1 if hw_h1 is not None else 0.0

        # layer 2
        tanh_c2 = np.tanh(cache.c2)
        dc2 = dc2_next + dh2 * cache.o2 * (1.0 - tanh_c2 ** 2)
        dz_i2 = dc2 * cache.g2 * cache.i2 * (1.0 - cache.i2)
        dz_f2 = dc2 * cache.c2_prev * cache.f2 * (1.0 - cache.f2)
        dz_g2 = dc2 * cache.i2 * (1.0 - cache.g2 ** 2)
        dz_o2 = dh2 * tanh_c2 * cache.o2 * (1.0 - cache.o2)
        dz2 = np.concatenate([dz_i2, dz_f2, dz_g2, dz_o2])
        grads.w2 += np.outer(dz2, cache.h1)
        grads.u2 += np.outer(dz2, cache.h2_prev)
        grads.b2 += dz2
        dh1 = dh1_next + params.layer2.w.T @ dz2 + dh1_head
        dh2_next = params.layer2.u.T @ dz2
        dc2_next = dc2 * cache.f2

        # layer 1
        tanh_c1 = np.tanh(cache.c1)
        dc1 = dc1_next + dh1 * cache.o1 * (1.0 - tanh_c1 ** 2)
        dz_i1 = dc1 * cache.g1 * cache.i1 * (1.0 - cache.i1)
        dz_f1 = dc1 * cache.c1_prev * cache.f1 * (1.0 - cache.f1)
        dz_g1 = dc1 * cache.i1 * (1.0 - cache.g1 ** 2)
        dz_o1 = dh1 * tanh_c1 * cache.o1 * (1.0 - cache.o1)
        dz1 = np.concatenate([dz_i1, dz_f1, dz_g1, dz_o1])
        grads.w1 += np.outer(dz1, cache.x)
        grads.u1 += np.outer(dz1, cache.h1_prev)
        grads.b1 += dz1
        dh1_next = params.layer1.u.T @ dz1
        dc1_next = dc1 * cache.f1


def clip_gradients(grads: ModelGradients, max_norm: float) -> float:
    """Clip by global norm in place; returns the pre-clip norm."""
    norm = grads.global_norm()
    if norm > max_norm:
        grads.scale(max_norm / norm)
    return norm


def sequence_backward(xs: Sequence[np.ndarray], labels: Sequence[int],
                      params: ModelParams, config: TrainConfig,
                      init: StepState | None = None) -> ModelGradients:
    """Gradients of the sequence loss for every model parameter.

    Gradient flow (including through the prediction feedback) is truncated at
    window boundaries of `config.tbptt_len` steps; with `tbptt_len >= len(xs)`
    the gradients are the exact full-BPTT gradients. The result is clipped by
    global norm at `config.grad_clip`. When `init` is omitted the sequence is
    fresh, so the first step feeds on the y0 parameter and y0 receives
    gradient.
    """
    params.validate()
    config.validate()
    y = np.asarray(labels, dtype=np.int64)
    if len(xs) != y.size:
        raise ValueError(f"sequence and labels differ in length: {len(xs)} vs {y.size}")
    weights = config.class_weights or (1.0, 1.0)
    grads = _zero_gradients(params)
    n_supervised = int((y >= 0).sum())
    if n_supervised == 0:
        return grads
    fresh = init is None
    state = initial_state(params) if fresh else init
    loss_scale = 1.0 / n_supervised
    for start in range(0, len(xs), config.tbptt_len):
        stop = min(start + config.tbptt_len, len(xs))
        caches, state = _forward_cached(xs[start:stop], params, state)
        _window_backward(caches, y[start:stop], params, grads, weights,
                         loss_scale, y0_feeds_window=fresh and start == 0)
    clip_gradients(grads, config.grad_clip)
    return grads


def init_params(input_size: int, config: TrainConfig,
                rng: np.random.Generator | None = None) -> ModelParams:
    """Uniform [-init_scale, init_scale] weights; gate biases zero except the
    forget gate at +1.0 (long-sequence stabilization)."""
    config.validate()
    check_positive(input_size, "input_size")
    rng = rng or np.random.default_rng(config.seed)
    h = config.hidden_size
    scale = config.init_scale

    def uniform(*shape):
        return rng.uniform(-scale, scale, size=shape)

    def layer(in_size):
        b = np.zeros(4 * h)
        b[h:2 * h] = 1.0
        return LstmLayerParams(w=uniform(4 * h, in_size), u=uniform(4 * h, h), b=b)

    head_len = 2 * h + 1 if config.head_input == "both" else h + 1
    params = ModelParams(layer1=layer(input_size), layer2=layer(h),
                         head_w=uniform(head_len), head_b=0.0,
                         y0=config.y0, head_input=config.head_input)
    params.validate()
    return params


class TrainingSequence(NamedTuple):
    patient_id: str
    xs: np.ndarray      # (T, D) input vectors
    labels: np.ndarray  # (T,) values in {1, 0, -1}


def inverse_frequency_weights(sequences: Sequence[TrainingSequence]) -> tuple[float, float]:
    """Class weights proportional to inverse frequency, normalized to sum 2.

    Falls back to (1, 1) when one class is absent entirely.
    """
    n_pos = sum(int((seq.labels == 1).sum()) for seq in sequences)
    n_neg = sum(int((seq.labels == 0).sum()) for seq in sequences)
    total = n_pos + n_neg
    if n_pos == 0 or n_neg == 0:
        return (1.0, 1.0)
    return (2.0 * n_neg / total, 2.0 * n_pos / total)


def _apply_update(params: ModelParams, grads: ModelGradients, lr: float) -> None:
    # y0 stays at its configured value: it is a probability-valued prior and
    # SGD steps could push it out of [0, 1]
    params.layer1.w -= lr * grads.w1
    params.layer1.u -= lr * grads.u1
    params.layer1.b -= lr * grads.b1
    params.layer2.w -= lr * grads.w2
    params.layer2.u -= lr * grads.u2
    params.layer2.b -= lr * grads.b2
    params.head_w -= lr * grads.head_w
    params.head_b -= lr * grads.head_b


def train_model(sequences: Sequence[TrainingSequence],
                config: TrainConfig) -> tuple[ModelParams, list[float]]:
    """Train by SGD over seeded-shuffled sequences with stateful TBPTT.

    State persists across windows within one patient and resets between
    patients and epochs. Returns the trained parameters and the per-epoch
    mean training loss. Deterministic for a fixed seed.
    """
    config.validate()
    if not sequences:
        raise ValueError("empty training dataset")
    total_supervised = sum(int((s.labels >= 0).sum()) for s in sequences)
    if total_supervised == 0:
        raise ValueError("no supervised steps in training dataset")
    input_size = int(sequences[0].xs.shape[1])
    weights = config.class_weights or inverse_frequency_weights(sequences)

    rng = np.random.default_rng(config.seed)
    params = init_params(input_size, config, rng=rng)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(sequences))
        epoch_loss_sum = 0.0
        epoch_steps = 0
        for seq_index in order:
            seq = sequences[seq_index]
            state = initial_state(params)
            fresh = True
            for start in range(0, len(seq.xs), config.tbptt_len):
                stop = min(start + config.tbptt_len, len(seq.xs))
                window_labels = seq.labels[start:stop]
                caches, next_state = _forward_cached(seq.xs[start:stop], params, state)
                probs = np.array([c.p for c in caches])
                loss = sequence_loss(probs, window_labels, weights)
                if not np.isfinite(loss.value):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, patient "
                        f"{seq.patient_id}, step {start}"
                    )
                if loss.supervised_steps:
                    epoch_loss_sum += loss.value * loss.supervised_steps
                    epoch_steps += loss.supervised_steps
                    grads = _zero_gradients(params)
                    _window_backward(caches, window_labels, params, grads, weights,
                                     1.0 / loss.supervised_steps,
                                     y0_feeds_window=fresh)
                    clip_gradients(grads, config.grad_clip)
                    _apply_update(params, grads, config.lr)
                state = next_state
                fresh = False
        finite = all(np.isfinite(arr).all() for arr in (
            params.layer1.w, params.layer1.u, params.layer1.b,
            params.layer2.w, params.layer2.u, params.layer2.b, params.head_w,
        )) and np.isfinite(params.head_b)
        if not finite:
            raise TrainingDivergedError(f"non-finite parameters after epoch {epoch}")
        history.append(epoch_loss_sum / max(1, epoch_steps))
    return params, history
