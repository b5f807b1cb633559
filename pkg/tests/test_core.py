import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from feedbackrisk.core import (
    Absolute, CustomForecaster, CustomPolicy, DomainError, Linear, Proportional,
    Squared, Zero, act, forecast, loss_value,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("c,h,expected", [(1.0, 0.7, 0.7), (0.25, 2.0, 0.5), (0.0, 5.0, 0.0)])
def test_linear_forecast(c, h, expected):
    assert forecast(Linear(c), h) == expected


def test_custom_forecaster_vectorized():
    f = CustomForecaster(np.tanh)
    h = np.array([0.0, 1.0])
    np.testing.assert_array_equal(forecast(f, h), np.tanh(h))


def test_nonfinite_forecast_names_forecaster():
    f = CustomForecaster(lambda h: h / 0.0, name="blowup")
    with np.errstate(divide="ignore"), pytest.raises(DomainError, match="blowup"):
        forecast(f, 1.0)


def test_nonfinite_context():
    with pytest.raises(DomainError):
        forecast(Linear(1.0), float("nan"))


@pytest.mark.parametrize("p,yhat,expected", [
    (Zero(), 3.2, 0.0),
    (Proportional(0.8), 0.5, 0.4),
    (Proportional(0.0), 1.0, 0.0),
])
def test_act(p, yhat, expected):
    assert act(p, yhat) == pytest.approx(expected, abs=0)


def test_negative_alpha_rejected():
    with pytest.raises(ValueError):
        Proportional(-0.1)


def test_custom_policy_gets_context():
    p = CustomPolicy(lambda yhat, h: yhat * np.sign(h))
    assert act(p, 2.0, -1.0) == -2.0


@pytest.mark.parametrize("loss,args,expected", [
    (Squared(), (1.0, 0.0), 1.0),
    (Absolute(), (-0.5, 0.5), 1.0),
])
def test_loss_examples(loss, args, expected):
    assert loss_value(loss, *args) == expected


def test_lipschitz_constants():
    assert Absolute().lipschitz_in_y == 1.0
    assert Squared().lipschitz_in_y is None


@given(finite)
def test_squared_zero_at_equality(x):
    assert loss_value(Squared(), x, x) == 0.0


@given(finite, finite)
def test_losses_symmetric(a, b):
    for loss in (Squared(), Absolute()):
        assert loss_value(loss, a, b) == loss_value(loss, b, a)
        assert loss_value(loss, a, b) >= 0


@given(finite, finite)
def test_absolute_vanishes_iff_equal(a, b):
    assert (loss_value(Absolute(), a, b) == 0.0) == (a == b)


@given(finite, finite)
def test_squared_positive_off_diagonal(a, b):
    if abs(a - b) > 1e-150:
        assert loss_value(Squared(), a, b) > 0


@given(st.floats(0, 10), finite, st.floats(-1e3, 1e3))
def test_proportional_linear(alpha, f, k):
    p = Proportional(alpha)
    assert math.isclose(act(p, k * f), k * act(p, f), rel_tol=1e-12, abs_tol=1e-300)
