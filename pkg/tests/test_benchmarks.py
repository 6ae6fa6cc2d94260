import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imann.benchmarks import (combine, eval_poly_target, eval_rosenbrock_target, get_formulation,
                              ideal_subfunctions, registry)

FORMS = registry()


@pytest.mark.parametrize("x,expected", [(0, 0), (1, -5), (2, -38)])
def test_poly_target(x, expected):
    assert eval_poly_target(x) == expected


@pytest.mark.parametrize("x,expected", [((1, 1), 0), ((0, 0), 1), ((2, 1), 82)])
def test_rosenbrock_target(x, expected):
    assert eval_rosenbrock_target(x) == expected


def test_rosenbrock_rejects_short_vectors():
    with pytest.raises(ValueError):
        eval_rosenbrock_target([1.0])


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6))
def test_rosenbrock_nonnegative(x):
    assert eval_rosenbrock_target(x) >= 0


@pytest.mark.parametrize("n", [2, 3, 7])
def test_rosenbrock_zero_at_ones(n):
    assert eval_rosenbrock_target(np.ones(n)) == 0


def test_registry_order_and_size():
    assert [f.id for f in FORMS] == [f"f{i}" for i in range(1, 10)]
    assert [f.subfunction_count for f in FORMS] == [1, 1, 1, 1, 2, 2, 2, 2, 2]
    for f in FORMS[:8]:
        assert f.domain.bounds == ((-4.0, 4.0),)
    assert FORMS[8].domain.bounds == ((-1.4, 1.6), (-0.25, 3.75))


def test_combine_examples():
    assert combine(get_formulation("f4"), 1, [5]) == -3
    assert combine(get_formulation("f9"), [0.3, 2.0], [0, 0]) == 0
    assert combine(get_formulation("f1"), 2, [1]) == -38
    assert combine(get_formulation("f8"), 1, [1, -16]) == -5


def test_combine_rejects_bad_shapes():
    with pytest.raises(ValueError):
        combine(get_formulation("f1"), 2, [1, 2])
    with pytest.raises(ValueError):
        combine(get_formulation("f9"), [1.0], [1, 2])


@pytest.mark.parametrize("fid,x,expected", [
    ("f1", 3.3, [1]),
    ("f2", 2, [2]),
    ("f3", 2, [4]),
    ("f4", 2, [32]),
    ("f5", 2, [1, -16]),
    ("f6", 2, [2, -32]),
    ("f7", 2, [4, -64]),
    ("f8", 2, [32, -128]),
    ("f9", (2, 1), [-3, -1]),
])
def test_ideal_subfunctions(fid, x, expected):
    assert list(ideal_subfunctions(get_formulation(fid), x)) == expected


@pytest.mark.parametrize("form", FORMS, ids=lambda f: f.id)
def test_ideal_subfunctions_reproduce_target(form):
    rng = np.random.default_rng(hash(form.id) % 2**32)
    x = rng.uniform(form.domain.lower, form.domain.upper, size=(1000, form.dimension))
    t = form.target.evaluate(x)
    got = combine(form, x, ideal_subfunctions(form, x))
    assert np.all(np.abs(got - t) <= 1e-12 * np.maximum(1.0, np.abs(t)))


def test_polynomial_formulations_share_target():
    x = np.linspace(-4, 4, 41)[:, None]
    for f in FORMS[:8]:
        assert np.array_equal(f.target.evaluate(x), eval_poly_target(x[:, 0]))


def test_unknown_formulation():
    with pytest.raises(KeyError):
        get_formulation("f10")
