"""Feed-forward network whose last (PM) layer emits scaled subfunction values.

Flat weight layout, in order:

* each hidden layer ``i``: its weight matrix of shape (n_i, n_{i-1}) flattened
  row-major (destination neuron major), then its n_i biases;
* the PM layer weight matrix of shape (n_out, n_m), row-major;
* the n_out PM biases;
* the n_out PM-to-model scale weights.

The PM layer is linear. Output ``j`` is ``v_j * (W_pm[j] @ h + b_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = {
    "tanh": np.tanh,
    "identity": lambda z: z,
}


class NonFiniteOutputError(ArithmeticError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    n_in: int
    hidden: tuple[int, ...]
    n_out: int
    hidden_activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError("input and output widths must be positive")
        if not self.hidden:
            raise ValueError("at least one hidden layer is required")
        if any(h < 1 for h in self.hidden):
            raise ValueError(f"hidden widths must be positive, got {self.hidden}")
        if self.hidden_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")

    @classmethod
    def parse(cls, arch: str, hidden_activation: str = "tanh") -> "NetworkSpec":
        widths = parse_arch(arch)
        if len(widths) < 3:
            raise ValueError(f"architecture {arch!r} needs at least one hidden layer")
        return cls(widths[0], tuple(widths[1:-1]), widths[-1], hidden_activation)

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.n_in, *self.hidden, self.n_out)

    @property
    def arch(self) -> str:
        return "-".join(str(w) for w in self.widths)


def parse_arch(arch: str) -> list[int]:
    try:
        widths = [int(tok) for tok in arch.strip().split("-")]
    except ValueError:
        raise ValueError(f"malformed architecture string {arch!r}") from None
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"malformed architecture string {arch!r}")
    return widths


def dimensionality(spec: NetworkSpec) -> int:
    """Number of trainable scalars: all weights and biases plus one scale per PM neuron."""
    h = spec.hidden
    d = spec.n_in * h[0]
    d += sum(h[i - 1] * h[i] for i in range(1, len(h)))
    d += h[-1] * spec.n_out
    d += sum(h)
    d += 2 * spec.n_out
    return d


@dataclass(frozen=True)
class Segment:
    name: str
    start: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def stop(self) -> int:
        return self.start + self.size


def pack_layout(spec: NetworkSpec) -> tuple[Segment, ...]:
    segments = []
    pos = 0

    def add(name, shape):
        nonlocal pos
        seg = Segment(name, pos, shape)
        segments.append(seg)
        pos = seg.stop

    prev = spec.n_in
    for i, width in enumerate(spec.hidden):
        add(f"W{i}", (width, prev))
        add(f"b{i}", (width,))
        prev = width
    add("W_pm", (spec.n_out, prev))
    add("b_pm", (spec.n_out,))
    add("scale", (spec.n_out,))
    return tuple(segments)


@dataclass(frozen=True)
class NetworkWeights:
    """Structured view of a flat weight vector."""

    hidden: tuple[tuple[np.ndarray, np.ndarray], ...]
    pm_weight: np.ndarray
    pm_bias: np.ndarray
    scale: np.ndarray


def _check_length(spec: NetworkSpec, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    d = dimensionality(spec)
    if w.ndim != 1 or w.shape[0] != d:
        raise ValueError(f"{spec.arch} needs a weight vector of length {d}, got shape {w.shape}")
    return w


def unpack(spec: NetworkSpec, w) -> NetworkWeights:
    w = _check_length(spec, w)
    parts = {seg.name: w[seg.start:seg.stop].reshape(seg.shape) for seg in pack_layout(spec)}
    hidden = tuple((parts[f"W{i}"], parts[f"b{i}"]) for i in range(len(spec.hidden)))
    return NetworkWeights(hidden, parts["W_pm"], parts["b_pm"], parts["scale"])


def pack(spec: NetworkSpec, weights: NetworkWeights) -> np.ndarray:
    chunks = []
    for W, b in weights.hidden:
        chunks += [np.ravel(W), np.ravel(b)]
    chunks += [np.ravel(weights.pm_weight), np.ravel(weights.pm_bias), np.ravel(weights.scale)]
    return _check_length(spec, np.concatenate(chunks))


def forward_unchecked(spec: NetworkSpec, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Forward pass on a batch (n, n_in) -> (n, n_out) without validation."""
    act = ACTIVATIONS[spec.hidden_activation]
    h = x
    pos = 0
    prev = spec.n_in
    for width in spec.hidden:
        W = w[pos:pos + width * prev].reshape(width, prev)
        pos += width * prev
        b = w[pos:pos + width]
        pos += width
        h = act(h @ W.T + b)
        prev = width
    k = spec.n_out
    W = w[pos:pos + k * prev].reshape(k, prev)
    pos += k * prev
    b = w[pos:pos + k]
    v = w[pos + k:pos + 2 * k]
    return (h @ W.T + b) * v


def forward_population(spec: NetworkSpec, W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Forward pass of P weight vectors (P, D) on a batch (n, n_in) -> (P, n, n_out)."""
    act = ACTIVATIONS[spec.hidden_activation]
    P = W.shape[0]
    h = np.broadcast_to(x, (P, *x.shape))
    pos = 0
    prev = spec.n_in
    for width in spec.hidden:
        M = W[:, pos:pos + width * prev].reshape(P, width, prev)
        pos += width * prev
        b = W[:, None, pos:pos + width]
        pos += width
        h = act(h @ M.transpose(0, 2, 1) + b)
        prev = width
    k = spec.n_out
    M = W[:, pos:pos + k * prev].reshape(P, k, prev)
    pos += k * prev
    b = W[:, None, pos:pos + k]
    v = W[:, None, pos + k:pos + 2 * k]
    return (h @ M.transpose(0, 2, 1) + b) * v


def forward(spec: NetworkSpec, w, x) -> np.ndarray:
    """Subfunction values for one input vector, or for each row of a batch."""
    w = _check_length(spec, w)
    a = np.asarray(x, dtype=float)
    single = a.ndim <= 1
    a = a.reshape(1, -1) if single else a
    if a.ndim != 2 or a.shape[1] != spec.n_in:
        raise ValueError(f"{spec.arch} expects inputs of width {spec.n_in}, got shape {np.shape(x)}")
    with np.errstate(over="ignore", invalid="ignore"):
        s = forward_unchecked(spec, w, a)
    if not np.all(np.isfinite(s)):
        raise NonFiniteOutputError("network produced non-finite subfunction values")
    return s[0] if single else s


def init_weights(spec: NetworkSpec, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Normal random weights, handy for tests and warm starts."""
    return scale * rng.standard_normal(dimensionality(spec))
