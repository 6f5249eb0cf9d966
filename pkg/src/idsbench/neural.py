"""Feed-forward ReLU network with dropout, trained by backpropagation and Adam.

Everything runs in float64 numpy so that analytic gradients can be checked
against finite differences.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, softmax

from .classifiers.base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register
from .data import TaskKind
from .errors import ConfigError, DimensionMismatch, NonFiniteLoss

CLAMP = 1e-12


@register
@dataclass(frozen=True)
class MLPConfig:
    input_dim: int
    n_outputs: int = 1
    hidden: tuple = (128, 128, 128)
    dropout_rate: float = 0.2
    epochs: int = 100
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim <= 0 or self.n_outputs <= 0 or any(h <= 0 for h in self.hidden):
            raise ConfigError("layer sizes must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must lie in [0, 1)")
        if self.epochs < 0 or self.batch_size <= 0:
            raise ConfigError("epochs must be >= 0 and batch_size > 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must lie in [0, 1)")

    @property
    def task(self) -> TaskKind:
        return TaskKind.BINARY if self.n_outputs == 1 else TaskKind.MULTICLASS

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden, self.n_outputs]


@register
@dataclass
class MLPParams:
    weights: list = field(default_factory=list)   # W[l] has shape (fan_in, fan_out)
    biases: list = field(default_factory=list)

    def copy(self) -> "MLPParams":
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def arrays(self) -> list[np.ndarray]:
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]


@register
@dataclass
class TrainingCurve:
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)

    def __len__(self):
        return len(self.train_loss)

    def append(self, tl, ta, vl, va):
        self.train_loss.append(float(tl))
        self.train_acc.append(float(ta))
        self.val_loss.append(float(vl))
        self.val_acc.append(float(va))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for e in range(len(self)):
            w.writerow([e + 1] + [repr(v) for v in (self.train_loss[e], self.train_acc[e],
                                                   self.val_loss[e], self.val_acc[e])])
        return buf.getvalue()


def init_mlp(config: MLPConfig) -> MLPParams:
    """He-normal weights (std sqrt(2 / fan_in)) and zero biases."""
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    return MLPParams(weights, biases)


def relu(z):
    return np.maximum(z, 0.0)


@dataclass
class ForwardPass:
    inputs: list      # input to each layer (post-dropout activations)
    pre: list         # pre-activations of hidden layers
    masks: list       # scaled dropout masks, or None
    outputs: np.ndarray


def forward(params: MLPParams, X, train_mode: bool = False, dropout_rate: float = 0.0,
            rng: np.random.Generator | None = None) -> ForwardPass:
    """Hidden layers are ReLU with inverted dropout in ``train_mode``; the head is
    sigmoid for one output unit and softmax otherwise."""
    X = as_matrix(X)
    if X.shape[1] != params.input_dim:
        raise DimensionMismatch(f"network expects {params.input_dim} inputs, got {X.shape[1]}")
    drop = train_mode and dropout_rate > 0.0
    if drop and rng is None:
        raise ValueError("dropout in train mode needs a random generator")
    keep = 1.0 - dropout_rate
    a = X
    inputs, pre, masks = [], [], []
    last = len(params.weights) - 1
    for layer, (W, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(a)
        z = a @ W + b
        if layer == last:
            out = expit(z) if z.shape[1] == 1 else softmax(z, axis=1)
            return ForwardPass(inputs, pre, masks, out)
        pre.append(z)
        a = relu(z)
        if drop:
            m = (rng.random(a.shape) < keep) / keep
            masks.append(m)
            a = a * m
        else:
            masks.append(None)
    raise AssertionError("network has no layers")


def _targets(y, n_outputs: int) -> np.ndarray:
    y = np.asarray(y)
    if n_outputs == 1:
        return y.reshape(-1, 1).astype(np.float64)
    if y.ndim == 2:
        return y.astype(np.float64)
    return (y[:, None] == np.arange(n_outputs)[None, :]).astype(np.float64)


def loss(outputs, targets, task: TaskKind | str | None = None) -> float:
    """Mean cross-entropy over the batch with probabilities clamped to [1e-12, 1 - 1e-12].

    ``targets`` may be labels or a one-hot / 0-1 matrix shaped like ``outputs``.
    """
    p = np.asarray(outputs, dtype=np.float64)
    if p.ndim == 1:
        p = p[:, None]
    if task is not None and TaskKind.parse(task) is TaskKind.BINARY and p.shape[1] != 1:
        raise DimensionMismatch("binary loss expects a single output column")
    Y = _targets(targets, p.shape[1])
    if Y.shape != p.shape:
        raise DimensionMismatch(f"outputs {p.shape} vs targets {Y.shape}")
    p = np.clip(p, CLAMP, 1.0 - CLAMP)
    if p.shape[1] == 1:
        ll = Y * np.log(p) + (1.0 - Y) * np.log(1.0 - p)
    else:
        ll = Y * np.log(p)
    return float(-ll.sum() / p.shape[0])


def backward(params: MLPParams, fp: ForwardPass, targets) -> MLPParams:
    """Gradients of :func:`loss` w.r.t. every weight and bias.

    Both heads pair with their cross-entropy so the head error is ``p - y``.
    """
    Y = _targets(targets, fp.outputs.shape[1])
    n = Y.shape[0]
    delta = (fp.outputs - Y) / n
    gw = [None] * len(params.weights)
    gb = [None] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        gw[layer] = fp.inputs[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer == 0:
            break
        delta = delta @ params.weights[layer].T
        if fp.masks[layer - 1] is not None:
            delta = delta * fp.masks[layer - 1]
        delta = delta * (fp.pre[layer - 1] > 0.0)
    return MLPParams(gw, gb)


def _accuracy(outputs: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(_labels(outputs) == y)) if len(y) else float("nan")


def _labels(outputs: np.ndarray) -> np.ndarray:
    if outputs.shape[1] == 1:
        return (outputs[:, 0] >= 0.5).astype(np.int64)
    return argmax_lowest(outputs)


def validation_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (train, validation) row indices; the validation slice has round(fraction * n) rows."""
    n_val = int(round(fraction * n)) if fraction > 0 else 0
    if n_val >= n:
        n_val = n - 1
    perm = np.random.default_rng([seed, 1]).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def train(params: MLPParams, X, y, config: MLPConfig) -> tuple[MLPParams, TrainingCurve]:
    """Mini-batch Adam on the cross-entropy loss.

    A seeded ``val_fraction`` slice is held out for the per-epoch validation
    columns of the curve; training loss/accuracy are batch averages over the
    epoch, measured with dropout active. Raises ``NonFiniteLoss`` as soon as a
    batch loss stops being finite.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    if X.shape[1] != config.input_dim:
        raise DimensionMismatch(f"network expects {config.input_dim} inputs, got {X.shape[1]}")
    if config.n_outputs > 1 and len(y) and y.max() >= config.n_outputs:
        raise ValueError(f"label {y.max()} out of range for {config.n_outputs} outputs")
    if config.n_outputs == 1 and len(y) and y.max() > 1:
        raise ValueError("binary network needs 0/1 labels")
    params = params.copy()
    tr, va = validation_split(X.shape[0], config.val_fraction, config.seed)
    Xtr, ytr, Xva, yva = X[tr], y[tr], X[va], y[va]
    rng = np.random.default_rng([config.seed, 2])
    arrays = params.arrays()
    m = [np.zeros_like(a) for a in arrays]
    v = [np.zeros_like(a) for a in arrays]
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.epsilon
    step = 0
    curve = TrainingCurve()
    for epoch in range(config.epochs):
        order = rng.permutation(len(ytr))
        tot_loss = tot_hit = 0.0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = Xtr[idx], ytr[idx]
            fp = forward(params, xb, True, config.dropout_rate, rng)
            bl = loss(fp.outputs, yb)
            if not np.isfinite(bl):
                raise NonFiniteLoss(f"loss became {bl} at epoch {epoch + 1}, batch {start // config.batch_size + 1}")
            tot_loss += bl * len(idx)
            tot_hit += np.sum(_labels(fp.outputs) == yb)
            grads = backward(params, fp, yb).arrays()
            step += 1
            c1 = 1.0 - b1 ** step
            c2 = 1.0 - b2 ** step
            for a, g, mi, vi in zip(arrays, grads, m, v):
                mi *= b1
                mi += (1.0 - b1) * g
                vi *= b2
                vi += (1.0 - b2) * g * g
                a -= lr * (mi / c1) / (np.sqrt(vi / c2) + eps)
        n_tr = max(len(ytr), 1)
        if len(yva):
            out = forward(params, Xva).outputs
            vl, vacc = loss(out, yva), _accuracy(out, yva)
        else:
            vl = vacc = float("nan")
        curve.append(tot_loss / n_tr, tot_hit / n_tr, vl, vacc)
    return params, curve


def mlp_predict(params: MLPParams, X, task: TaskKind | str | None = None) -> PredictionBatch:
    """Binary: label 1 iff p >= 0.5. Multiclass: argmax, ties to the lowest class."""
    out = forward(params, X).outputs
    if out.shape[1] == 1:
        p = out[:, 0]
        return PredictionBatch((p >= 0.5).astype(np.int64), np.column_stack([1.0 - p, p]))
    return PredictionBatch(argmax_lowest(out), out)


@register
@dataclass
class MLPModel(TrainedModel):
    family = "ANN"
    config: MLPConfig = None
    params: MLPParams = None
    curve: TrainingCurve = None

    def predict(self, X) -> PredictionBatch:
        return mlp_predict(self.params, self.check_input(X))


def fit_mlp(X, y, n_classes: int | None = None, seed: int = 0, **overrides) -> MLPModel:
    """Build, initialize and train a network sized for (X, y)."""
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    config = MLPConfig(input_dim=X.shape[1], n_outputs=1 if k <= 2 else k, seed=seed, **overrides)
    params, curve = train(init_mlp(config), X, y, config)
    hyper = {f: getattr(config, f) for f in ("hidden", "dropout_rate", "epochs", "batch_size", "learning_rate",
                                              "val_fraction")}
    return MLPModel(n_features=X.shape[1], n_classes=max(k, 2), hyperparams=hyper, config=config, params=params,
                    curve=curve)
