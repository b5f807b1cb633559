"""Forecasters, deployment policies and losses.

All operations accept a scalar history summary ``h`` or a numpy array of
them and are vectorized over it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .streams import SeedSpec

__all__ = [
    "DomainError", "Linear", "CustomForecaster", "Forecaster",
    "Proportional", "Zero", "CustomPolicy", "DeploymentPolicy",
    "Squared", "Absolute", "Loss", "SeedSpec",
    "forecast", "act", "loss_value",
]


class DomainError(ValueError):
    """A computation produced or received a non-finite value."""


def _finite(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"non-finite value from {what}")
    return arr


def _unwrap(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


# -- forecasters -----------------------------------------------------------

@dataclass(frozen=True)
class Linear:
    """Forecaster ``f(h) = c * h``."""

    c: float

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise DomainError(f"Linear forecaster coefficient must be finite, got {self.c}")


@dataclass(frozen=True)
class CustomForecaster:
    """Wraps ``fn(h)``; ``fn`` should accept numpy arrays."""

    fn: Callable
    name: str = "custom"


Forecaster = Union[Linear, CustomForecaster]


def forecast(f: Forecaster, h):
    """Prediction of ``f`` at history summary ``h``."""
    h_arr = _finite(h, "context")
    if isinstance(f, Linear):
        out = f.c * h_arr
    elif isinstance(f, CustomForecaster):
        out = np.broadcast_to(np.asarray(f.fn(h_arr), dtype=np.float64), h_arr.shape)
    else:
        raise TypeError(f"not a forecaster: {f!r}")
    return _unwrap(_finite(out, f"forecaster {f!r}"), h)


# -- deployment policies ---------------------------------------------------

@dataclass(frozen=True)
class Proportional:
    """Action ``alpha * forecast``; ``alpha`` is the adoption intensity."""

    alpha: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"adoption intensity must be finite and >= 0, got {self.alpha}")


@dataclass(frozen=True)
class Zero:
    """The passive regime: forecasts are never acted on."""


@dataclass(frozen=True)
class CustomPolicy:
    fn: Callable
    name: str = "custom"


DeploymentPolicy = Union[Proportional, Zero, CustomPolicy]


def act(p: DeploymentPolicy, yhat, h=0.0):
    """Action taken by policy ``p`` given a forecast and its context."""
    yhat_arr = _finite(yhat, "forecast")
    if isinstance(p, Zero):
        out = np.zeros_like(yhat_arr)
    elif isinstance(p, Proportional):
        out = p.alpha * yhat_arr
    elif isinstance(p, CustomPolicy):
        out = np.broadcast_to(
            np.asarray(p.fn(yhat_arr, np.asarray(h, dtype=np.float64)), dtype=np.float64),
            yhat_arr.shape,
        )
    else:
        raise TypeError(f"not a deployment policy: {p!r}")
    return _unwrap(_finite(out, f"policy {p!r}"), yhat)


# -- losses ----------------------------------------------------------------

@dataclass(frozen=True)
class Squared:
    @property
    def lipschitz_in_y(self):
        return None


@dataclass(frozen=True)
class Absolute:
    @property
    def lipschitz_in_y(self):
        return 1.0


Loss = Union[Squared, Absolute]


def loss_value(loss: Loss, yhat, y):
    yhat_arr = _finite(yhat, "prediction")
    y_arr = _finite(y, "target")
    diff = yhat_arr - y_arr
    if isinstance(loss, Squared):
        out = diff * diff
    elif isinstance(loss, Absolute):
        out = np.abs(diff)
    else:
        raise TypeError(f"not a loss: {loss!r}")
    return _unwrap(out, diff if np.ndim(yhat) or np.ndim(y) else yhat)
