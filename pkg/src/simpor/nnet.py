"""Fully connected ReLU/softmax classifier trained with Adam (numpy, float64)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, DataError


class TrainingError(FloatingPointError):
    """Non-finite loss during training."""


@dataclass(frozen=True)
class LrDecay:
    """Multiply the learning rate by ``factor`` after ``patience`` epochs
    without a loss improvement larger than ``min_delta``."""
    factor: float = 0.9
    patience: int = 5
    min_delta: float = 1e-4


@dataclass(frozen=True)
class EarlyStop:
    patience: int = 10
    min_delta: float = 1e-4


@dataclass(frozen=True)
class MlpSpec:
    hidden: tuple[int, ...] = (100, 100, 100)
    max_epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.1
    lr_decay: LrDecay | None = LrDecay()
    early_stop: EarlyStop | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if any(w < 1 for w in self.hidden):
            raise ValueError("hidden widths must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.lr_decay is not None and not 0 < self.lr_decay.factor < 1:
            raise ValueError("lr decay factor must lie in (0, 1)")
        if self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("max_epochs and batch_size must be >= 1")


def evaluation_spec(seed: int = 0) -> MlpSpec:
    """Final classifier: 3 x 100 hidden units, 200 epochs, batch 32, lr 0.1."""
    return MlpSpec(seed=seed)


def probe_spec(seed: int = 0) -> MlpSpec:
    """Active-learning probe: 2 x 10 hidden units, up to 300 epochs, early stop."""
    return MlpSpec(hidden=(10, 10), max_epochs=300, batch_size=32, learning_rate=0.01,
                   lr_decay=None, early_stop=EarlyStop(patience=10, min_delta=1e-4), seed=seed)


Weights = list[tuple[np.ndarray, np.ndarray]]


def init_weights(sizes: list[int], rng: np.random.Generator) -> Weights:
    # He-uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases
    out = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / fan_in)
        out.append((rng.uniform(-lim, lim, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(weights: Weights, X: np.ndarray) -> np.ndarray:
    a = X
    for W, b in weights[:-1]:
        a = np.maximum(a @ W + b, 0.0)
    W, b = weights[-1]
    return softmax(a @ W + b)


def cross_entropy(P: np.ndarray, Y: np.ndarray) -> float:
    """Mean categorical cross-entropy of probabilities ``P`` against one-hot ``Y``."""
    return float(-np.mean(np.sum(Y * np.log(np.clip(P, 1e-300, None)), axis=1)))


def loss_and_grads(weights: Weights, X: np.ndarray, Y: np.ndarray) -> tuple[float, Weights]:
    acts = [X]
    pre = []
    a = X
    for W, b in weights[:-1]:
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    W, b = weights[-1]
    P = softmax(a @ W + b)
    n = X.shape[0]
    loss = cross_entropy(P, Y)

    delta = (P - Y) / n
    grads = []
    for layer in range(len(weights) - 1, -1, -1):
        W, _ = weights[layer]
        grads.append((acts[layer].T @ delta, delta.sum(axis=0)))
        if layer:
            delta = (delta @ W.T) * (pre[layer - 1] > 0)
    grads.reverse()
    return loss, grads


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: MlpSpec
    weights: Weights
    n_classes: int
    loss_history: tuple[float, ...] = field(default=())

    @property
    def d(self) -> int:
        return self.weights[0][0].shape[0]

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DataError(f"expected samples with {self.d} features, got shape {X.shape}")
        return forward(self.weights, X)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_json(self) -> str:
        return json.dumps({
            "hidden": list(self.spec.hidden),
            "n_classes": self.n_classes,
            "loss_history": list(self.loss_history),
            "weights": [{"W": W.tolist(), "b": b.tolist()} for W, b in self.weights],
        })


def fit(spec: MlpSpec, X, y, n_classes: int | None = None,
        init: TrainedModel | None = None) -> TrainedModel:
    """Train on arrays; ``init`` warm-starts from an existing model's weights."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise DataError("empty training set")
    n_classes = n_classes or (init.n_classes if init else int(y.max()) + 1)
    if len(np.unique(y)) < 2:
        raise DataError("training set needs at least two classes")
    rng = np.random.default_rng(spec.seed)
    if init is not None:
        weights = [(W.copy(), b.copy()) for W, b in init.weights]
    else:
        weights = init_weights([X.shape[1], *spec.hidden, n_classes], rng)
    Y = np.eye(n_classes)[y]

    m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]
    v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]
    lr = spec.learning_rate
    step = 0
    history = []
    best_decay = best_stop = np.inf
    wait_decay = wait_stop = 0
    n = X.shape[0]
    for epoch in range(spec.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, spec.batch_size):
            bi = order[start:start + spec.batch_size]
            loss, grads = loss_and_grads(weights, X[bi], Y[bi])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            total += loss * len(bi)
            step += 1
            c1 = 1.0 - spec.beta1 ** step
            c2 = 1.0 - spec.beta2 ** step
            for i, ((W, b), (gW, gb)) in enumerate(zip(weights, grads)):
                mW, mb = m[i]
                vW, vb = v[i]
                mW = spec.beta1 * mW + (1 - spec.beta1) * gW
                mb = spec.beta1 * mb + (1 - spec.beta1) * gb
                vW = spec.beta2 * vW + (1 - spec.beta2) * gW * gW
                vb = spec.beta2 * vb + (1 - spec.beta2) * gb * gb
                m[i], v[i] = (mW, mb), (vW, vb)
                W = W - lr * (mW / c1) / (np.sqrt(vW / c2) + spec.adam_eps)
                b = b - lr * (mb / c1) / (np.sqrt(vb / c2) + spec.adam_eps)
                weights[i] = (W, b)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss) or not all(np.all(np.isfinite(W)) for W, _ in weights):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        history.append(epoch_loss)

        if spec.lr_decay is not None:
            if epoch_loss < best_decay - spec.lr_decay.min_delta:
                best_decay, wait_decay = epoch_loss, 0
            else:
                wait_decay += 1
                if wait_decay >= spec.lr_decay.patience:
                    lr *= spec.lr_decay.factor
                    wait_decay = 0
        if spec.early_stop is not None:
            if epoch_loss < best_stop - spec.early_stop.min_delta:
                best_stop, wait_stop = epoch_loss, 0
            else:
                wait_stop += 1
                if wait_stop >= spec.early_stop.patience:
                    break
    return TrainedModel(spec, weights, n_classes, tuple(history))


def train(spec: MlpSpec, ds: Dataset, init: TrainedModel | None = None) -> TrainedModel:
    return fit(spec, ds.X, ds.y, ds.n_classes, init=init)


def with_seed(spec: MlpSpec, seed: int) -> MlpSpec:
    return replace(spec, seed=seed)
