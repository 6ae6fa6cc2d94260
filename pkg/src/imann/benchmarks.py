"""Target systems and the nine model formulations with their ideal subfunctions.

Every formulation is plain data: a combiner that turns inputs plus ``k``
subfunction values into the model output, and an oracle returning the
subfunction values that make the model reproduce its target exactly.
Combiners and oracles work on batches: ``x`` has shape (n, dim), ``s`` has
shape (n, k).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import Domain

POLY_DOMAIN = Domain(((-4.0, 4.0),))
ROSENBROCK_DOMAIN = Domain(((-1.4, 1.6), (-0.25, 3.75)))


def eval_poly_target(x):
    """(x^5 - 16 x^3 + 5 x^2) / 2, elementwise."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    x3 = x2 * x
    out = (x3 * x2 - 16.0 * x3 + 5.0 * x2) / 2.0
    return float(out) if out.ndim == 0 else out


def eval_rosenbrock_target(x):
    """Modified Rosenbrock with fourth powers, summed over consecutive pairs.

    Accepts one vector of length N >= 2 or a batch of shape (n, N).
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError(f"modified Rosenbrock needs N >= 2, got N={x.shape[-1]}")
    head, tail = x[..., :-1], x[..., 1:]
    out = np.sum((tail - head**2) ** 4 + (1.0 - head) ** 4, axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TargetSystem:
    id: str
    dimension: int
    domain: Domain
    evaluate: Callable[[np.ndarray], np.ndarray]  # (n, dim) -> (n,)


def _poly_rows(x):
    return eval_poly_target(x[:, 0])


POLYNOMIAL = TargetSystem("polynomial", 1, POLY_DOMAIN, _poly_rows)
ROSENBROCK = TargetSystem("rosenbrock", 2, ROSENBROCK_DOMAIN, eval_rosenbrock_target)


@dataclass(frozen=True)
class ModelFormulation:
    id: str
    target: TargetSystem
    subfunction_count: int
    combine_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ideal_fn: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    @property
    def dimension(self) -> int:
        return self.target.dimension

    @property
    def domain(self) -> Domain:
        return self.target.domain


def _as_batch(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to (n, dim); report whether the caller passed a single point."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
        single = True
    elif a.ndim == 1:
        single = True
        a = a.reshape(1, -1)
    elif a.ndim == 2:
        single = False
    else:
        raise ValueError(f"input must be a point or a batch of points, got shape {a.shape}")
    if a.shape[1] != dim:
        raise ValueError(f"expected input dimension {dim}, got {a.shape[1]}")
    return a, single


def combine(formulation: ModelFormulation, x, s):
    """Model output given inputs ``x`` and subfunction values ``s``."""
    xb, single = _as_batch(x, formulation.dimension)
    sb = np.asarray(s, dtype=float)
    k = formulation.subfunction_count
    sb = sb.reshape(1, -1) if sb.ndim <= 1 else sb
    if sb.shape != (xb.shape[0], k):
        raise ValueError(f"{formulation.id} takes {k} subfunction value(s) per point, "
                         f"got shape {np.shape(s)}")
    out = formulation.combine_fn(xb, sb)
    return float(out[0]) if single else out


def ideal_subfunctions(formulation: ModelFormulation, x):
    """Subfunction values for which the model reproduces its target exactly."""
    xb, single = _as_batch(x, formulation.dimension)
    out = formulation.ideal_fn(xb)
    return out[0] if single else out


def _one(col):
    return col[:, None]


def _two(a, b):
    return np.stack([a, b], axis=-1)


def _poly_model(a_term, b_term):
    def fn(x, s):
        x = x[:, 0]
        x2 = x * x
        return (a_term(x, s[:, 0]) + b_term(x, s) + 5.0 * x2) / 2.0
    return fn


def _fixed_cubic(x, s):
    return -16.0 * (x * x * x)


_FORMULATIONS = (
    ModelFormulation(
        "f1", POLYNOMIAL, 1,
        _poly_model(lambda x, a: a * (x * x * x * x * x), _fixed_cubic),
        lambda x: _one(np.ones(len(x))),
        "constant multiplier of x^5",
    ),
    ModelFormulation(
        "f2", POLYNOMIAL, 1,
        _poly_model(lambda x, a: a * (x * x * x * x), _fixed_cubic),
        lambda x: _one(x[:, 0].copy()),
        "linear multiplier of x^4",
    ),
    ModelFormulation(
        "f3", POLYNOMIAL, 1,
        _poly_model(lambda x, a: a * (x * x * x), _fixed_cubic),
        lambda x: _one(x[:, 0] ** 2),
        "quadratic multiplier of x^3",
    ),
    ModelFormulation(
        "f4", POLYNOMIAL, 1,
        _poly_model(lambda x, a: a, _fixed_cubic),
        lambda x: _one(x[:, 0] ** 5),
        "whole quintic term",
    ),
    ModelFormulation(
        "f5", POLYNOMIAL, 2,
        _poly_model(lambda x, a: a * (x * x * x * x * x), lambda x, s: s[:, 1] * (x * x * x)),
        lambda x: _two(np.ones(len(x)), np.full(len(x), -16.0)),
        "constant multipliers of x^5 and x^3",
    ),
    ModelFormulation(
        "f6", POLYNOMIAL, 2,
        _poly_model(lambda x, a: a * (x * x * x * x), lambda x, s: s[:, 1] * (x * x)),
        lambda x: _two(x[:, 0].copy(), -16.0 * x[:, 0]),
        "linear multipliers of x^4 and x^2",
    ),
    ModelFormulation(
        "f7", POLYNOMIAL, 2,
        _poly_model(lambda x, a: a * (x * x * x), lambda x, s: s[:, 1] * x),
        lambda x: _two(x[:, 0] ** 2, -16.0 * x[:, 0] ** 2),
        "quadratic multipliers of x^3 and x",
    ),
    ModelFormulation(
        "f8", POLYNOMIAL, 2,
        _poly_model(lambda x, a: a, lambda x, s: s[:, 1]),
        lambda x: _two(x[:, 0] ** 5, -16.0 * x[:, 0] ** 3),
        "whole quintic and cubic terms",
    ),
    ModelFormulation(
        "f9", ROSENBROCK, 2,
        lambda x, s: s[:, 0] ** 4 + s[:, 1] ** 4,
        lambda x: _two(x[:, 1] - x[:, 0] ** 2, 1.0 - x[:, 0]),
        "sum of fourth powers, 2-D modified Rosenbrock",
    ),
)

_BY_ID = {f.id: f for f in _FORMULATIONS}


def registry() -> tuple[ModelFormulation, ...]:
    """All nine formulations, ordered f1..f9."""
    return _FORMULATIONS


def get_formulation(formulation_id: str) -> ModelFormulation:
    try:
        return _BY_ID[formulation_id]
    except KeyError:
        raise KeyError(f"unknown formulation {formulation_id!r}; "
                       f"choose from {', '.join(_BY_ID)}") from None
