"""The network-in-model predictor and its sum-of-squares training fitness."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import benchmarks
from .benchmarks import ModelFormulation
from .network import NetworkSpec, _check_length, forward, forward_population, forward_unchecked

# Rank given to candidates whose model output is not finite.
WORST_FITNESS = float("inf")


class NonFiniteModelError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # (n, dim)
    y: np.ndarray  # (n,)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        x = x.reshape(-1, 1) if x.ndim == 1 else x
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"inputs {x.shape} and labels {y.shape} do not line up")
        if len(y) == 0:
            raise ValueError("dataset is empty")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    @classmethod
    def from_target(cls, formulation: ModelFormulation, x) -> "Dataset":
        """Label ``x`` with the formulation's target system."""
        x = np.asarray(x, dtype=float).reshape(-1, formulation.dimension)
        if not np.all(formulation.domain.contains(x)):
            raise ValueError("dataset points must lie inside the formulation domain")
        if len(np.unique(x, axis=0)) != len(x):
            raise ValueError("dataset points must be distinct")
        return cls(x, formulation.target.evaluate(x))


@dataclass(frozen=True)
class HybridPredictor:
    spec: NetworkSpec
    weights: np.ndarray
    formulation: ModelFormulation

    def __post_init__(self):
        check_compatible(self.spec, self.formulation)
        w = np.array(_check_length(self.spec, self.weights))
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __call__(self, x):
        return predict(self, x)


def check_compatible(spec: NetworkSpec, formulation: ModelFormulation) -> None:
    if spec.n_in != formulation.dimension:
        raise ValueError(f"{spec.arch} takes {spec.n_in} input(s) but {formulation.id} "
                         f"is {formulation.dimension}-D")
    if spec.n_out != formulation.subfunction_count:
        raise ValueError(f"{spec.arch} emits {spec.n_out} subfunction(s) but {formulation.id} "
                         f"needs {formulation.subfunction_count}")


def predict(p: HybridPredictor, x):
    """Model output with the network supplying the subfunction values."""
    a = np.asarray(x, dtype=float)
    single = a.ndim <= 1
    batch = a.reshape(1, -1) if single else a
    s = forward(p.spec, p.weights, batch)
    with np.errstate(over="ignore", invalid="ignore"):
        y = benchmarks.combine(p.formulation, batch, s)
    if not np.all(np.isfinite(y)):
        raise NonFiniteModelError(f"{p.formulation.id} produced a non-finite output")
    return float(y[0]) if single else y


def _sum_sq(pred: np.ndarray, y: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        r = pred - y
        f = float(np.dot(r, r))
    return f if np.isfinite(f) else WORST_FITNESS


def fitness(p: HybridPredictor, data: Dataset) -> float:
    """Sum of squared residuals over the dataset; non-finite maps to ``WORST_FITNESS``."""
    with np.errstate(all="ignore"):
        s = forward_unchecked(p.spec, p.weights, data.x)
        pred = p.formulation.combine_fn(data.x, s)
    return _sum_sq(pred, data.y)


def objective_for(spec: NetworkSpec, formulation: ModelFormulation,
                  data: Dataset) -> Callable[[np.ndarray], float]:
    """Map a flat weight vector to its fitness on ``data``."""
    check_compatible(spec, formulation)
    if data.x.shape[1] != formulation.dimension:
        raise ValueError("dataset dimension does not match the formulation")
    x, y, combine_fn = data.x, data.y, formulation.combine_fn

    n, k = len(y), formulation.subfunction_count

    def objective(w) -> float:
        w = _check_length(spec, w)
        with np.errstate(all="ignore"):
            pred = combine_fn(x, forward_unchecked(spec, w, x))
        return _sum_sq(pred, y)

    def batch(W) -> np.ndarray:
        """Fitness of every row of a (P, D) candidate matrix in one pass."""
        W = np.asarray(W, dtype=float)
        P = W.shape[0]
        with np.errstate(all="ignore"):
            s = forward_population(spec, W, x).reshape(P * n, k)
            pred = combine_fn(np.tile(x, (P, 1)), s).reshape(P, n)
            r = pred - y
            f = np.einsum("pi,pi->p", r, r)
        return np.where(np.isfinite(f), f, WORST_FITNESS)

    objective.batch = batch
    return objective
