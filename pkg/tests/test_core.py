import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fixvi.core import (
    DimensionError, ToleranceConfig, as_point, combine, distance, inner_product, make_rng, norm,
    points_equal, sample_pairs,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def vec(d=3):
    return arrays(np.float64, d, elements=finite)


@pytest.mark.parametrize("x, y, expected", [
    ((1, 0), (0, 1), 0.0),
    ((2, 3), (2, 3), 13.0),
    ((1, 2, 3), (4, 5, 6), 32.0),
])
def test_inner_product_examples(x, y, expected):
    assert inner_product(x, y) == expected


@pytest.mark.parametrize("x, expected", [((0, 0, 0), 0.0), ((3, 4), 5.0), ((1, 1, 1, 1), 2.0)])
def test_norm_examples(x, expected):
    assert norm(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a, x, b, y, expected", [
    (0.5, (2, 0), 0.5, (0, 2), (1, 1)),
    (1, (1, 2), 0, (9, 9), (1, 2)),
    (0.25, (4, 8), 0.75, (0, 0), (1, 2)),
])
def test_combine_examples(a, x, b, y, expected):
    np.testing.assert_allclose(combine(a, x, b, y), expected, atol=1e-15)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        inner_product((1, 2), (1, 2, 3))
    with pytest.raises(DimensionError):
        combine(1, (1,), 1, (1, 2))
    with pytest.raises(DimensionError):
        as_point((1, 2), dim=3)


def test_non_finite_point_rejected():
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])
    with pytest.raises(ValueError):
        as_point([np.inf])


def test_tolerance_config_validation():
    ToleranceConfig(1e-3, 1e-6, 1)
    with pytest.raises(ValueError):
        ToleranceConfig(0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(max_iter=0)


def test_seeded_streams_repeat():
    a = make_rng(42).uniform(size=5)
    b = make_rng(42).uniform(size=5)
    assert np.array_equal(a, b)
    xs, ys = sample_pairs(make_rng(1), 3, 100)
    assert xs.shape == ys.shape == (100, 3)
    assert np.all(np.abs(xs) <= 10) and np.all(np.abs(ys) <= 10)
    with pytest.raises(ValueError):
        make_rng(-1)


@given(vec(), vec())
def test_inner_product_symmetric(x, y):
    assert inner_product(x, y) == inner_product(y, x)


@given(vec(), vec())
def test_cauchy_schwarz(x, y):
    assert abs(inner_product(x, y)) <= norm(x) * norm(y) * (1 + 1e-12) + 1e-9


@given(vec(), vec())
def test_triangle_inequality(x, y):
    assert norm(x + y) <= norm(x) + norm(y) + 1e-9


@given(vec(), vec(), st.floats(-10, 10))
def test_combine_is_affine_in_weights(x, y, a):
    np.testing.assert_allclose(combine(a, x, 1 - a, y), y + a * (x - y), atol=1e-8 * (1 + norm(x) + norm(y)))


@given(vec())
def test_distance_to_self_is_zero(x):
    assert distance(x, x) == 0.0
    assert points_equal(x, x)
