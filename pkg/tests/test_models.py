import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptalloc.models import ArmState, ResponseModel, draw, draw_many, update


def test_degenerate_bernoulli():
    rng = np.random.default_rng(0)
    assert all(draw(ResponseModel.bernoulli(1.0), rng) == 1.0 for _ in range(100))
    assert all(draw(ResponseModel.bernoulli(0.0), rng) == 0.0 for _ in range(100))


def test_draw_is_reproducible():
    m = ResponseModel.normal(0.0, 1.0)
    assert draw(m, np.random.default_rng(42)) == draw(m, np.random.default_rng(42))


@pytest.mark.parametrize("model", [ResponseModel.normal(1.5, 2.0), ResponseModel.bernoulli(0.3)])
def test_one_uniform_per_draw(model):
    a, b = np.random.default_rng(7), np.random.default_rng(7)
    singles = [draw(model, a) for _ in range(50)]
    assert np.array_equal(singles, draw_many(model, b, 50))
    # both generators are at the same position afterwards
    assert a.random() == b.random()


@pytest.mark.parametrize("kwargs", [dict(kind="normal", mean=0.0, sd=0.0),
                                    dict(kind="normal", mean=0.0, sd=-1.0),
                                    dict(kind="bernoulli", mean=1.2),
                                    dict(kind="poisson", mean=1.0)])
def test_invalid_models(kwargs):
    with pytest.raises(ValueError):
        ResponseModel(**kwargs)


def test_true_mean():
    assert ResponseModel.normal(-3.6, 2.25).true_mean == -3.6
    assert ResponseModel.bernoulli(0.58).true_mean == 0.58


def test_update_examples():
    s = update(ArmState(), 3.0)
    assert (s.count, s.mean) == (1, 3.0)
    s = update(s, 1.0)
    assert (s.count, s.mean) == (2, 2.0)


def test_empty_state_mean_undefined():
    assert not ArmState().defined
    assert math.isnan(ArmState().mean)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_fold_matches_arithmetic_mean(xs):
    s = ArmState()
    for x in xs:
        s = update(s, x)
    assert s.count == len(xs)
    assert s.mean * s.count == pytest.approx(s.sum, rel=1e-15, abs=1e-9)
    assert abs(s.mean - math.fsum(xs) / len(xs)) <= 1e-12 * len(xs) * max(1.0, max(abs(x) for x in xs))


@pytest.mark.parametrize("model", [ResponseModel.normal(0.8, 1.0), ResponseModel.normal(-5.29, 2.2),
                                   ResponseModel.bernoulli(0.36), ResponseModel.bernoulli(0.5)])
def test_empirical_mean_of_a_million_draws(model):
    x = draw_many(model, np.random.default_rng(11), 10**6)
    assert abs(x.mean() - model.true_mean) < 5 * model.true_sd / 1000
