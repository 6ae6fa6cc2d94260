"""Gauss-Legendre rules and the absolute-error integral used to score predictors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_RULE_SIZE = 256
_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


class EvaluationError(ArithmeticError):
    """A function returned non-finite values on the quadrature grid."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box, one ``(lo, hi)`` pair per dimension."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("domain needs at least one dimension")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if n == 0:
        return p0, np.zeros_like(x)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1], exact for degree <= 2n - 1.

    Roots of P_n are found by Newton iteration from the cosine guess. Only the
    non-negative half is iterated; the other half is its mirror, so the rule
    is exactly symmetric.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"rule size must be an integer, got {n!r}")
    if not 1 <= n <= MAX_RULE_SIZE:
        raise ValueError(f"unsupported rule size {n}; expected 1..{MAX_RULE_SIZE}")
    n = int(n)
    if n == 1:
        return QuadratureRule(nodes=[0.0], weights=[2.0])

    half = n // 2
    i = np.arange(1, half + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, dp = _legendre(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= _NEWTON_TOL:
            break
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    # x is decreasing and positive here
    pos_x, pos_w = x[::-1], w[::-1]
    if n % 2:
        _, dp0 = _legendre(n, np.zeros(1))
        mid_x, mid_w = np.zeros(1), 2.0 / dp0**2
    else:
        mid_x, mid_w = np.empty(0), np.empty(0)
    nodes = np.concatenate([-x, mid_x, pos_x])
    weights = np.concatenate([w, mid_w, pos_w])
    return QuadratureRule(nodes=nodes, weights=weights)


def map_rule(rule: QuadratureRule, lo: float, hi: float) -> QuadratureRule:
    """Affinely transplant a rule from its own interval onto [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    a, b = rule.interval
    if (a, b) == (lo, hi):
        return rule
    scale = (hi - lo) / (b - a)
    nodes = lo + (rule.nodes - a) * scale
    return QuadratureRule(nodes=nodes, weights=rule.weights * scale,
                          interval=(float(lo), float(hi)))


def tensor_grid(domain: Domain, points_per_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product nodes of shape (N, dim) and their weights (N,)."""
    base = gauss_legendre_rule(points_per_dim)
    rules = [map_rule(base, lo, hi) for lo, hi in domain.bounds]
    mesh = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    wmesh = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return points, weights


def integrate(f: Callable[[np.ndarray], np.ndarray], domain: Domain,
              points_per_dim: int = 80) -> float:
    """Integrate a row-vectorised ``f`` (takes (N, dim), returns (N,)) over ``domain``."""
    points, weights = tensor_grid(domain, points_per_dim)
    values = np.asarray(f(points), dtype=float).reshape(-1)
    if values.shape != weights.shape:
        raise ValueError(f"function returned {values.shape[0]} values for {len(weights)} points")
    if not np.all(np.isfinite(values)):
        raise EvaluationError("non-finite function value on the quadrature grid")
    return float(np.dot(weights, values))


def error_integral(predict: Callable[[np.ndarray], np.ndarray],
                   target: Callable[[np.ndarray], np.ndarray],
                   domain: Domain | Sequence[tuple[float, float]],
                   points_per_dim: int = 80) -> float:
    """Integral over ``domain`` of ``|predict(x) - target(x)|``.

    Both callables receive every grid point at once as an (N, dim) array and
    must return N values. Non-finite values raise :class:`EvaluationError`.
    """
    if not isinstance(domain, Domain):
        domain = Domain(tuple(domain))
    if domain.dim > 2:
        raise ValueError(f"error integral supports 1-D and 2-D domains, got {domain.dim}-D")
    points, weights = tensor_grid(domain, points_per_dim)
    with np.errstate(all="ignore"):
        p = np.asarray(predict(points), dtype=float).reshape(-1)
        t = np.asarray(target(points), dtype=float).reshape(-1)
    if p.shape != weights.shape or t.shape != weights.shape:
        raise ValueError("functions must return one value per grid point")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise EvaluationError("non-finite function value on the quadrature grid")
    return float(np.dot(weights, np.abs(p - t)))
