"""A small ReLU MLP trained by plain SGD, with the logging the bound needs.

Every iteration records the mini-batch gradient at a fixed random subset of
coordinates (the gradient-noise series), and every ``loss_log_stride``
iterations the full vector of per-example training losses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError, TrainingDivergence

__all__ = [
    "MlpSpec",
    "TrainConfig",
    "Dataset",
    "TrainLog",
    "Mlp",
    "make_dataset",
    "cross_entropy",
    "train",
    "generalization_gap",
]

DIVERGENCE_LOSS = 1e4


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple
    activation: str = "relu"
    init_seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise DomainError(f"need >= 2 layers of positive size, got {sizes}")
        if self.activation != "relu":
            raise DomainError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "layer_sizes", sizes)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    batch_size: int = 64
    momentum: float = 0.0
    weight_decay: float = 0.0
    stop_loss: float = 0.01
    max_iters: int = 100_000
    data_seed: int = 0
    shuffle_seed: int = 0
    loss_log_stride: int = 10
    sgn_coord_count: int = 256
    ema_decay: float = 0.99
    debug: bool = False

    def __post_init__(self):
        if self.lr < 0:
            raise DomainError(f"learning rate must be non-negative, got {self.lr}")
        if self.batch_size < 1:
            raise DomainError("batch size must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise DomainError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise DomainError("weight decay must be non-negative")
        if self.max_iters < 1 or self.loss_log_stride < 1 or self.sgn_coord_count < 1:
            raise DomainError("max_iters, loss_log_stride and sgn_coord_count must be positive")


@dataclass
class Dataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    n_classes: int

    @property
    def m(self) -> int:
        return self.x_train.shape[0]


@dataclass
class TrainLog:
    sgn: np.ndarray
    sgn_coords: np.ndarray
    loss_vectors: np.ndarray
    weights: list
    biases: list
    train_acc: float
    test_acc: float
    empirical_risk: float
    zeta_observed: float
    iters: int
    converged: bool
    batch_indices: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


def _blob_means(classes: int, dim: int, separation: float, rng) -> np.ndarray:
    if classes <= 2 * dim:
        means = np.zeros((classes, dim))
        for c in range(classes):
            means[c, c // 2] = 1.0 if c % 2 == 0 else -1.0
        return means * separation / 2.0
    dirs = rng.standard_normal((classes, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True) * separation / 2.0


def make_dataset(
    kind: str = "gaussian_blobs",
    m_train: int = 200,
    m_test: int = 1000,
    seed: int = 0,
    classes: int = 2,
    dim: int = 2,
    separation: float = 4.0,
    noise: float = 0.1,
    random_labels: bool = False,
) -> Dataset:
    """Synthetic classification data, standardized on the training split.

    ``gaussian_blobs`` draws unit-variance Gaussians around class means spaced
    ``separation`` apart.  ``two_rings`` places classes 0 and 1 on circles of
    radius 1 and 2 with radial noise ``noise``.  Labels alternate by index.
    ``random_labels`` permutes the training labels.
    """
    if m_train < 1 or m_test < 1:
        raise DomainError("dataset sizes must be positive")
    rng = np.random.default_rng(seed)
    n = m_train + m_test
    if kind == "gaussian_blobs":
        if not separation > 0:
            raise DomainError(f"separation must be positive, got {separation}")
        if classes < 2 or dim < 1:
            raise DomainError("need at least 2 classes and 1 dimension")
        y = np.arange(n) % classes
        means = _blob_means(classes, dim, separation, rng)
        x = means[y] + rng.standard_normal((n, dim))
    elif kind == "two_rings":
        classes = 2
        y = np.arange(n) % 2
        theta = rng.uniform(0, 2 * np.pi, n)
        r = 1.0 + y + noise * rng.standard_normal(n)
        x = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    else:
        raise DomainError(f"unknown dataset kind {kind!r}")
    x_tr, x_te = x[:m_train], x[m_train:]
    y_tr, y_te = y[:m_train], y[m_train:]
    mu = x_tr.mean(axis=0)
    sd = x_tr.std(axis=0)
    sd[sd == 0] = 1.0
    if random_labels:
        y_tr = rng.permutation(y_tr)
    return Dataset((x_tr - mu) / sd, y_tr.copy(), (x_te - mu) / sd, y_te.copy(), classes)


def cross_entropy(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-example cross-entropy, accurate for both tiny and large losses."""
    if logits.shape[0] == 0:
        raise DomainError("empty batch")
    top = logits.argmax(axis=1)
    zmax = logits[np.arange(len(top)), top]
    e = np.exp(logits - zmax[:, None])
    e[np.arange(len(top)), top] = 0.0
    # log sum exp = zmax + log1p(sum of the non-max terms)
    lse = zmax + np.log1p(e.sum(axis=1))
    losses = lse - logits[np.arange(len(y)), y]
    if not np.all(np.isfinite(losses)):
        raise NumericalError("non-finite loss")
    return np.maximum(losses, 0.0)


class Mlp:
    """ReLU network whose parameters live in one flat vector.

    Layer ``i`` has weight ``W_i`` of shape ``(fan_in, fan_out)`` and bias
    ``b_i``; both are views into :attr:`theta`.
    """

    def __init__(self, spec: MlpSpec, theta: Optional[np.ndarray] = None):
        self.spec = spec
        sizes = spec.layer_sizes
        self.shapes = [(sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]
        self.n_params = sum(a * b + b for a, b in self.shapes)
        if theta is None:
            theta = self._init_theta()
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise DomainError(f"expected {self.n_params} parameters, got {theta.shape}")
        self.theta = theta
        self._bind()

    def _init_theta(self) -> np.ndarray:
        rng = np.random.default_rng(self.spec.init_seed)
        parts = []
        for fan_in, fan_out in self.shapes:
            scale = math.sqrt(2.0 / fan_in) * self.spec.init_scale
            parts.append((rng.standard_normal((fan_in, fan_out)) * scale).ravel())
            parts.append(np.zeros(fan_out))
        return np.concatenate(parts)

    def _bind(self):
        self.weights, self.biases = [], []
        pos = 0
        for fan_in, fan_out in self.shapes:
            self.weights.append(self.theta[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out))
            pos += fan_in * fan_out
            self.biases.append(self.theta[pos : pos + fan_out])
            pos += fan_out

    def copy(self) -> "Mlp":
        return Mlp(self.spec, self.theta.copy())

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    def forward_loss(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape[0] == 0:
            raise DomainError("empty batch")
        z = self.logits(x)
        return cross_entropy(z, np.asarray(y)), z

    def loss_and_grad(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Per-example losses and the gradient of their mean (flat vector)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y)
        if x.shape[0] == 0:
            raise DomainError("empty batch")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        z = acts[-1]
        losses = cross_entropy(z, y)
        p = np.exp(z - z.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(len(y)), y] -= 1.0
        delta = p / len(y)
        grads = []
        for i in range(last, -1, -1):
            grads.append(delta.sum(axis=0))
            grads.append((acts[i].T @ delta).ravel())
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        g = np.concatenate(grads[::-1])
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient")
        return losses, g

    def grad(self, x, y) -> np.ndarray:
        return self.loss_and_grad(x, y)[1]

    def accuracy(self, x, y) -> float:
        return float(np.mean(self.logits(x).argmax(axis=1) == y))


def train(spec: MlpSpec, config: TrainConfig, data: Dataset) -> TrainLog:
    """Run mini-batch SGD until the training loss reaches ``stop_loss``.

    Mini-batch indices are drawn i.i.d. with replacement.  Stopping is checked
    on an exponential moving average of the mini-batch loss and confirmed on
    the full training set.  With momentum the update is
    ``v <- momentum * v + g; W <- W - lr * v`` where ``g`` already includes
    the weight-decay term.
    """
    c = config
    m = data.m
    if c.batch_size > m:
        raise DomainError(f"batch size {c.batch_size} exceeds training set size {m}")
    if spec.layer_sizes[0] != data.x_train.shape[1] or spec.layer_sizes[-1] != data.n_classes:
        raise DomainError("network input/output sizes do not match the dataset")
    model = Mlp(spec)
    theta = model.theta
    batch_rng = np.random.default_rng([c.shuffle_seed, 0])
    coord_rng = np.random.default_rng([c.shuffle_seed, 1])
    n_coords = min(c.sgn_coord_count, model.n_params)
    coords = np.sort(coord_rng.choice(model.n_params, size=n_coords, replace=False))

    x, y = data.x_train, data.y_train
    velocity = np.zeros_like(theta) if c.momentum > 0 else None
    sgn_rows, loss_rows, batches = [], [], []
    ema = None
    converged = False
    k = 0
    while k < c.max_iters:
        idx = batch_rng.integers(0, m, size=c.batch_size)
        losses, g = model.loss_and_grad(x[idx], y[idx])
        batch_loss = float(losses.mean())
        if batch_loss > DIVERGENCE_LOSS:
            raise TrainingDivergence(f"loss {batch_loss:.3g} at iteration {k}", iteration=k)
        sgn_rows.append(g[coords])
        if c.debug:
            batches.append(idx)
        if c.weight_decay:
            g = g + c.weight_decay * theta
        if velocity is not None:
            velocity *= c.momentum
            velocity += g
            theta -= c.lr * velocity
        else:
            theta -= c.lr * g
        k += 1
        ema = batch_loss if ema is None else c.ema_decay * ema + (1 - c.ema_decay) * batch_loss

        full = None
        if ema <= c.stop_loss:
            full = model.forward_loss(x, y)[0]
            converged = float(full.mean()) <= c.stop_loss
        if k % c.loss_log_stride == 0 or converged or k == c.max_iters:
            loss_rows.append(full if full is not None else model.forward_loss(x, y)[0])
        if converged:
            break

    loss_vectors = np.array(loss_rows)
    return TrainLog(
        sgn=np.array(sgn_rows),
        sgn_coords=coords,
        loss_vectors=loss_vectors,
        weights=[w.copy() for w in model.weights],
        biases=[b.copy() for b in model.biases],
        train_acc=model.accuracy(x, y),
        test_acc=model.accuracy(data.x_test, data.y_test),
        empirical_risk=float(loss_vectors[-1].mean()),
        zeta_observed=float(loss_vectors.max()),
        iters=k,
        converged=converged,
        batch_indices=np.array(batches) if c.debug else None,
    )


def generalization_gap(log) -> float:
    """Training accuracy minus test accuracy."""
    return float(log.train_acc) - float(log.test_acc)
