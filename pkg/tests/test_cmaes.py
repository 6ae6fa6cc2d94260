import math

import numpy as np
import pytest

from imann.cmaes import (CmaConfig, CmaState, CovarianceError, ProtocolError, default_population,
                         optimize)


def sphere(w):
    return float(np.dot(w, w))


def test_default_population():
    assert default_population(47) == 15
    assert default_population(4) == 8


def test_config_validation():
    with pytest.raises(ValueError):
        CmaConfig(3, initial_sigma=0)
    with pytest.raises(ValueError):
        CmaConfig(3, population=1)
    with pytest.raises(ValueError):
        CmaConfig(3, population=10, max_evaluations=9)
    with pytest.raises(ValueError):
        CmaConfig(3, initial_mean=[0, 0])
    assert CmaConfig(47).initial_mean.tolist() == [0.0] * 47


def test_ask_shape_and_determinism():
    a, b = CmaState(CmaConfig(6, seed=11)), CmaState(CmaConfig(6, seed=11))
    for _ in range(5):
        xa, xb = a.ask(), b.ask()
        assert xa.shape == (a.lam, 6)
        assert np.array_equal(xa, xb)
        f = [sphere(x) for x in xa]
        a.tell(xa, f)
        b.tell(xb, f)


def test_tiny_sigma_samples_the_mean():
    mean = np.array([1.0, -2.0, 3.0])
    state = CmaState(CmaConfig(3, initial_mean=mean, initial_sigma=1e-300))
    assert np.allclose(state.ask(), mean, atol=1e-290)


def test_tell_protocol():
    state = CmaState(CmaConfig(4))
    with pytest.raises(ProtocolError):
        state.tell(np.zeros((state.lam, 4)), np.zeros(state.lam))
    X = state.ask()
    f = [sphere(x) for x in X]
    with pytest.raises(ValueError):
        state.tell(X[:-1], f[:-1])
    state.tell(X, f)
    assert state.evaluations == state.lam
    with pytest.raises(ProtocolError):
        state.tell(X, f)


def test_rank_based_update():
    a, b = CmaState(CmaConfig(5, seed=3)), CmaState(CmaConfig(5, seed=3))
    X = a.ask()
    b.ask()
    f = np.array([sphere(x) for x in X])
    a.tell(X, f)
    b.tell(X, np.exp(f) * 3 + 7)
    assert np.array_equal(a.mean, b.mean)
    assert a.sigma == b.sigma
    assert np.array_equal(a.C, b.C)


def test_equal_fitness_keeps_submission_order():
    state = CmaState(CmaConfig(4, seed=9))
    X = state.ask()
    state.tell(X, np.zeros(state.lam))
    assert np.array_equal(state.mean, state.weights @ X[: state.mu])


def test_nan_fitness_ranked_last():
    state = CmaState(CmaConfig(3, seed=1))
    X = state.ask()
    f = np.arange(state.lam, dtype=float)
    f[0] = np.nan
    state.tell(X, f)
    assert np.array_equal(state.mean, state.weights @ X[1: state.mu + 1])


def test_covariance_stays_symmetric_positive_definite():
    state = CmaState(CmaConfig(8, seed=4))
    for _ in range(60):
        X = state.ask()
        state.tell(X, [sphere(x * np.arange(1, 9)) for x in X])
    assert np.allclose(state.C, state.C.T)
    assert np.linalg.eigvalsh((state.C + state.C.T) / 2).min() > 0


def test_condition_cap_raises_on_ask():
    state = CmaState(CmaConfig(3, condition_cap=10.0))
    state.C = np.diag([1.0, 1.0, 1e3])
    state.generation = state.eigen_interval
    with pytest.raises(CovarianceError):
        state.ask()


def test_sphere_converges():
    res = optimize(sphere, CmaConfig(4, [1, 1, 1, 1], 0.3, max_evaluations=5000,
                                     fitness_target=0.0, seed=0))
    assert res.best_fitness < 1e-9
    assert res.best_fitness == pytest.approx(sphere(res.best_vector), rel=0, abs=0)


def test_zero_objective_stops_after_one_generation():
    res = optimize(lambda w: 0.0, CmaConfig(5, seed=0))
    assert res.best_fitness == 0.0
    assert len(res.history) == 1
    assert res.stop_reason == "fitness_target"


def test_budget_of_one_generation():
    cfg = CmaConfig(5, population=7, max_evaluations=7, seed=0)
    res = optimize(sphere, cfg)
    assert res.evaluations_used == 7
    assert len(res.history) == 1


def test_history_is_monotone_and_best_matches_minimum():
    seen = []
    res = optimize(sphere, CmaConfig(6, np.full(6, 2.0), 0.5, max_evaluations=1200, seed=5),
                   callback=lambda st, X, f: seen.extend(f))
    hist = [f for _, f in res.history]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert res.best_fitness == min(seen)
    assert [g for g, _ in res.history] == list(range(1, len(hist) + 1))


def test_non_finite_objective_survives():
    def wild(w):
        return math.inf if w[0] > 0 else sphere(w)
    res = optimize(wild, CmaConfig(3, [1.0, 1.0, 1.0], 0.5, max_evaluations=3000, seed=2))
    assert math.isfinite(res.best_fitness)
    assert res.best_vector[0] <= 0
