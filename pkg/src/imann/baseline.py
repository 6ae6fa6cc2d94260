"""Black-box dense network baseline trained by full-batch Adam on the MSE loss.

Flat layout: for every layer, its (n_out, n_in) weight matrix row-major and
then its biases. Hidden layers use ``tanh``; the single output is linear.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import parse_arch


@dataclass(frozen=True)
class DnnSpec:
    widths: tuple[int, ...]
    hidden_activation: str = "tanh"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ValueError(f"invalid layer widths {widths}")
        if widths[-1] != 1:
            raise ValueError("baseline network must have a single output")
        if self.hidden_activation != "tanh":
            raise ValueError("only tanh hidden units are supported")
        object.__setattr__(self, "widths", widths)

    @classmethod
    def parse(cls, arch: str) -> "DnnSpec":
        return cls(tuple(parse_arch(arch)))

    @property
    def n_in(self) -> int:
        return self.widths[0]

    @property
    def arch(self) -> str:
        return "-".join(map(str, self.widths))

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in zip(self.widths[:-1], self.widths[1:]))


def _layers(spec: DnnSpec, w: np.ndarray):
    pos = 0
    for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
        W = w[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in)
        pos += fan_in * fan_out
        yield W, w[pos:pos + fan_out]
        pos += fan_out


def _check(spec: DnnSpec, w, x) -> tuple[np.ndarray, np.ndarray, bool]:
    w = np.asarray(w, dtype=float)
    if w.shape != (spec.n_params,):
        raise ValueError(f"{spec.arch} needs {spec.n_params} parameters, got shape {w.shape}")
    a = np.asarray(x, dtype=float)
    single = a.ndim <= 1
    a = a.reshape(1, -1) if single else a
    if a.ndim != 2 or a.shape[1] != spec.n_in:
        raise ValueError(f"{spec.arch} expects inputs of width {spec.n_in}, got shape {np.shape(x)}")
    return w, a, single


def dnn_forward(spec: DnnSpec, weights, x):
    """Network output for one input vector (float) or a batch (n,)."""
    w, a, single = _check(spec, weights, x)
    h = a
    layers = list(_layers(spec, w))
    for W, b in layers[:-1]:
        h = np.tanh(h @ W.T + b)
    W, b = layers[-1]
    out = (h @ W.T + b)[:, 0]
    return float(out[0]) if single else out


def _loss_and_grad(spec: DnnSpec, w: np.ndarray, x: np.ndarray, y: np.ndarray):
    layers = list(_layers(spec, w))
    acts = [x]
    h = x
    for W, b in layers[:-1]:
        h = np.tanh(h @ W.T + b)
        acts.append(h)
    W, b = layers[-1]
    pred = (h @ W.T + b)[:, 0]
    r = pred - y
    n = len(y)
    loss = float(r @ r) / n

    grads = []
    delta = (2.0 / n) * r[:, None]  # dL/d(pre-activation) of the output layer
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        a_prev = acts[i]
        grads.append((delta.sum(axis=0), (delta.T @ a_prev).ravel()))
        if i:
            delta = (delta @ W) * (1.0 - a_prev * a_prev)
    flat = []
    for gb, gW in reversed(grads):
        flat += [gW, gb]
    return loss, np.concatenate(flat)


def _as_xy(spec: DnnSpec, dataset) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(dataset.x, dtype=float).reshape(len(dataset.y), -1)
    y = np.asarray(dataset.y, dtype=float)
    if len(y) == 0:
        raise ValueError("dataset is empty")
    if x.shape[1] != spec.n_in:
        raise ValueError(f"{spec.arch} expects inputs of width {spec.n_in}, got {x.shape[1]}")
    return x, y


def dnn_loss(spec: DnnSpec, weights, dataset) -> float:
    x, y = _as_xy(spec, dataset)
    r = dnn_forward(spec, weights, x) - y
    return float(r @ r) / len(y)


def dnn_gradient(spec: DnnSpec, weights, dataset) -> np.ndarray:
    """Exact gradient of the mean squared error by reverse-mode differentiation."""
    x, y = _as_xy(spec, dataset)
    w, _, _ = _check(spec, weights, x)
    return _loss_and_grad(spec, w, x, y)[1]


def init_dnn(spec: DnnSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform in +-1/sqrt(fan_in) for every weight and bias of a layer."""
    chunks = []
    for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        chunks.append(rng.uniform(-bound, bound, fan_in * fan_out + fan_out))
    return np.concatenate(chunks)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    max_epochs: int = 20_000
    plateau_patience: int = 500
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    min_improvement: float = 1e-12

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.max_epochs < 1 or self.plateau_patience < 1:
            raise ValueError("max_epochs and plateau_patience must be positive")


@dataclass
class TrainResult:
    weights: np.ndarray
    loss: float
    history: list[float] = field(default_factory=list)
    epochs: int = 0
    aborted: bool = False


def train_dnn(spec: DnnSpec, dataset, config: TrainConfig) -> TrainResult:
    """Full-batch Adam from a seeded uniform init; returns the best weights seen.

    ``history[k]`` is the training loss before update ``k``.
    """
    x, y = _as_xy(spec, dataset)
    rng = np.random.default_rng(config.seed)
    w = init_dnn(spec, rng)
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    b1, b2 = config.beta1, config.beta2
    best_w, best_loss = w.copy(), np.inf
    history: list[float] = []
    stall = 0
    aborted = False

    for epoch in range(1, config.max_epochs + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, g = _loss_and_grad(spec, w, x, y)
        if not (np.isfinite(loss) and np.all(np.isfinite(g))):
            aborted = True
            break
        history.append(loss)
        if loss < best_loss - config.min_improvement:
            stall = 0
        else:
            stall += 1
        if loss < best_loss:
            best_loss, best_w = loss, w.copy()
        if stall >= config.plateau_patience:
            break
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**epoch)
        v_hat = v / (1 - b2**epoch)
        w = w - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    else:
        # account for the final update
        loss = _loss_and_grad(spec, w, x, y)[0]
        if np.isfinite(loss) and loss < best_loss:
            best_loss, best_w = loss, w.copy()

    return TrainResult(best_w, float(best_loss), history, len(history), aborted)
