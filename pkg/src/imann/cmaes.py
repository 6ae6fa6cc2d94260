"""Covariance Matrix Adaptation Evolution Strategy with an ask/tell interface.

Standard (mu/mu_w, lambda) CMA-ES: positive log-decreasing recombination
weights over the best half, cumulative step-size adaptation, rank-one plus
rank-mu covariance update, and a lazily refreshed eigendecomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class CovarianceError(np.linalg.LinAlgError):
    """The covariance matrix is no longer usable (not positive definite or ill-conditioned)."""


class ProtocolError(RuntimeError):
    """``tell`` called without a matching ``ask``."""


def default_population(dimension: int) -> int:
    return 4 + int(math.floor(3 * math.log(dimension)))


@dataclass
class CmaConfig:
    dimension: int
    initial_mean: Sequence[float] | None = None
    initial_sigma: float = 0.1
    population: int | None = None
    max_evaluations: int = 100_000
    fitness_target: float = 1e-12
    seed: int = 0
    condition_cap: float = 1e14

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.population is None:
            self.population = default_population(self.dimension)
        if self.initial_mean is None:
            self.initial_mean = np.zeros(self.dimension)
        self.initial_mean = np.array(self.initial_mean, dtype=float)
        if self.initial_mean.shape != (self.dimension,):
            raise ValueError(f"initial mean must have length {self.dimension}")
        if not self.initial_sigma > 0:
            raise ValueError("initial sigma must be positive")
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.max_evaluations < self.population:
            raise ValueError("evaluation budget smaller than one generation")


class CmaState:
    """Single-owner optimizer state; call ``ask`` and ``tell`` alternately."""

    def __init__(self, config: CmaConfig):
        n = config.dimension
        lam = config.population
        mu = lam // 2
        raw = math.log((lam + 1) / 2) - np.log(np.arange(1, mu + 1))
        self.config = config
        self.dimension = n
        self.lam = lam
        self.mu = mu
        self.weights = raw / raw.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)

        mueff = self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        self.eigen_interval = max(1, math.ceil(n / 10))

        self.mean = config.initial_mean.copy()
        self.sigma = float(config.initial_sigma)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.invsqrtC = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.generation = 0
        self.evaluations = 0
        self.rng = np.random.default_rng(config.seed)
        self._eigen_generation = 0
        self._pending: np.ndarray | None = None

    @property
    def condition_number(self) -> float:
        return float((self.D.max() / self.D.min()) ** 2)

    def _update_eigensystem(self) -> None:
        C = (self.C + self.C.T) / 2
        if not np.all(np.isfinite(C)):
            raise CovarianceError("covariance has non-finite entries")
        eigvals, B = np.linalg.eigh(C)
        if eigvals.min() <= 0:
            raise CovarianceError(f"covariance lost positive definiteness (min eigenvalue {eigvals.min():.3g})")
        if eigvals.max() / eigvals.min() > self.config.condition_cap:
            raise CovarianceError(f"covariance condition number {eigvals.max() / eigvals.min():.3g} "
                                  f"exceeds cap {self.config.condition_cap:.3g}")
        self.C = C
        self.B = B
        self.D = np.sqrt(eigvals)
        self.invsqrtC = (B / self.D) @ B.T
        self._eigen_generation = self.generation

    def ask(self) -> np.ndarray:
        """Sample ``lam`` candidates as rows of a (lam, D) array."""
        if self.generation - self._eigen_generation >= self.eigen_interval:
            self._update_eigensystem()
        z = self.rng.standard_normal((self.lam, self.dimension))
        y = (z * self.D) @ self.B.T
        candidates = self.mean + self.sigma * y
        self._pending = candidates
        return candidates.copy()

    def tell(self, candidates, fitnesses) -> None:
        """Update the search distribution from ranked candidates (minimisation)."""
        if self._pending is None:
            raise ProtocolError("tell() without a preceding ask(), or generation already told")
        X = np.asarray(candidates, dtype=float)
        f = np.asarray(fitnesses, dtype=float)
        if X.shape != (self.lam, self.dimension):
            raise ValueError(f"expected candidates of shape {(self.lam, self.dimension)}, got {X.shape}")
        if f.shape != (self.lam,):
            raise ValueError(f"expected {self.lam} fitness values, got {f.shape}")
        f = np.where(np.isnan(f), np.inf, f)
        self._pending = None

        order = np.argsort(f, kind="stable")
        selected = X[order[: self.mu]]
        old_mean = self.mean
        self.mean = self.weights @ selected
        self.evaluations += self.lam
        self.generation += 1

        n, sigma = self.dimension, self.sigma
        y_w = (self.mean - old_mean) / sigma
        self.p_sigma = (1 - self.cs) * self.p_sigma + \
            math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (self.invsqrtC @ y_w)
        ps_norm = float(np.linalg.norm(self.p_sigma))
        hsig = ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) \
            < (1.4 + 2 / (n + 1)) * self.chi_n
        self.p_c = (1 - self.cc) * self.p_c + \
            hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w

        Y = (selected - old_mean) / sigma
        rank_mu = (Y.T * self.weights) @ Y
        rank_one = np.outer(self.p_c, self.p_c) + (1 - hsig) * self.cc * (2 - self.cc) * self.C
        self.C = (1 - self.c1 - self.cmu) * self.C + self.c1 * rank_one + self.cmu * rank_mu
        self.sigma = sigma * math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))


@dataclass
class OptimizationResult:
    best_vector: np.ndarray
    best_fitness: float
    evaluations_used: int
    history: list[tuple[int, float]] = field(default_factory=list)
    aborted: bool = False
    stop_reason: str = ""


def optimize(objective: Callable[[np.ndarray], float], config: CmaConfig,
             callback: Callable[[CmaState, np.ndarray, np.ndarray], None] | None = None
             ) -> OptimizationResult:
    """Minimise ``objective`` until the fitness target or the evaluation budget is reached.

    If ``objective`` carries a ``batch`` attribute, it is called once per
    generation with the (lam, D) candidate matrix instead of row by row.
    ``history`` holds the best fitness seen so far after each generation.
    """
    evaluate_all = getattr(objective, "batch", None)
    state = CmaState(config)
    best_x = state.mean.copy()
    best_f = math.inf
    history: list[tuple[int, float]] = []
    aborted = False
    reason = "max_evaluations"

    while state.evaluations + state.lam <= config.max_evaluations:
        try:
            X = state.ask()
        except CovarianceError as exc:
            aborted, reason = True, f"covariance: {exc}"
            break
        if evaluate_all is not None:
            f = np.asarray(evaluate_all(X), dtype=float)
        else:
            f = np.array([objective(x) for x in X], dtype=float)
        state.tell(X, f)
        if callback is not None:
            callback(state, X, f)
        i = int(np.argmin(np.where(np.isnan(f), np.inf, f)))
        if f[i] < best_f:
            best_f, best_x = float(f[i]), X[i].copy()
        history.append((state.generation, best_f))
        if best_f <= config.fitness_target:
            reason = "fitness_target"
            break
        if not math.isfinite(state.sigma) or state.sigma <= 0:
            aborted, reason = True, "step size degenerated"
            break

    return OptimizationResult(best_x, best_f, state.evaluations, history, aborted, reason)
