"""One-step environments in which forecasts can move the target.

Each environment draws ``H ~ N(0, 1)`` and returns
``Y = conditional_mean(H, A) + sigma * eps`` with ``eps ~ N(0, 1)``.  The
passive regime fixes ``A = 0``; the deployed regime sets ``A`` from a
forecaster and a policy.  Both regimes read ``H`` and ``eps`` from the same
named sub-streams, so a zero action reproduces the passive sample bit for bit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .core import DeploymentPolicy, Forecaster, act, forecast
from .streams import SeedSpec

__all__ = [
    "LinearFeedbackEnv", "CrowdingEnv", "ConcaveImpactEnv", "Draw", "Draws",
    "conditional_mean", "sample_passive", "sample_deployed", "sample_outcomes",
]


def _identity(h):
    return h


def _check_sigma(sigma):
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")


@dataclass(frozen=True)
class LinearFeedbackEnv:
    """``Y = mu(H) + beta * A + sigma * eps``."""

    beta: float
    sigma: float
    mu: Callable = field(default=_identity)

    def __post_init__(self):
        _check_sigma(self.sigma)
        if not np.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")

    def passive_mean(self, h):
        return np.asarray(self.mu(h), dtype=np.float64)

    def impact(self, a):
        return self.beta * a


@dataclass(frozen=True)
class CrowdingEnv:
    """``Y = H - gamma * A + sigma * eps``; with ``A = alpha * c * H`` this is
    the crowded target ``H - gamma*alpha*c*H + eps``."""

    gamma: float
    sigma: float

    def __post_init__(self):
        _check_sigma(self.sigma)
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def passive_mean(self, h):
        return np.asarray(h, dtype=np.float64)

    def impact(self, a):
        return -self.gamma * a


@dataclass(frozen=True)
class ConcaveImpactEnv:
    """Square-root impact against the action: ``Y = H - eta*sign(A)*sqrt(|A|) + sigma*eps``."""

    eta: float
    sigma: float

    def __post_init__(self):
        _check_sigma(self.sigma)
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be positive, got {self.eta}")

    def passive_mean(self, h):
        return np.asarray(h, dtype=np.float64)

    def impact(self, a):
        return -self.eta * np.sign(a) * np.sqrt(np.abs(a))


def conditional_mean(env, h, a):
    """Noise-free mean of ``Y`` given ``(h, a)``.

    The impact term is skipped when every action is zero, which keeps the
    passive mean bit-identical across feedback parameters (``-0.0`` included).
    """
    h_arr = np.asarray(h, dtype=np.float64)
    a_arr = np.broadcast_to(np.asarray(a, dtype=np.float64), h_arr.shape)
    out = env.passive_mean(h_arr)
    if np.any(a_arr != 0.0):
        out = out + env.impact(a_arr)
    return float(out) if out.ndim == 0 else out


class Draw(NamedTuple):
    h: float
    a: float
    y: float


@dataclass(frozen=True)
class Draws:
    """Columns of ``n`` draws of ``(H, A, Y)``."""

    h: np.ndarray
    a: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.h)

    def __iter__(self) -> Iterator[Draw]:
        for h, a, y in zip(self.h, self.a, self.y):
            yield Draw(float(h), float(a), float(y))

    def __getitem__(self, i) -> Draw:
        return Draw(float(self.h[i]), float(self.a[i]), float(self.y[i]))

    def tobytes(self) -> bytes:
        return self.h.tobytes() + self.a.tobytes() + self.y.tobytes()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("h,a,y\n")
        for h, a, y in zip(self.h, self.a, self.y):
            buf.write(f"{h:.17g},{a:.17g},{y:.17g}\n")
        return buf.getvalue()


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return int(n)


def _draw_h(seed: SeedSpec, n: int) -> np.ndarray:
    return seed.derive("h").normal(n)


def _draw_noise(seed: SeedSpec, n: int) -> np.ndarray:
    return seed.derive("noise").normal(n)


def sample_passive(env, n: int, seed: SeedSpec) -> Draws:
    n = _check_n(n)
    h = _draw_h(seed, n)
    a = np.zeros(n)
    y = conditional_mean(env, h, a) + env.sigma * _draw_noise(seed, n)
    return Draws(h, a, y)


def sample_deployed(env, f: Forecaster, p: DeploymentPolicy, n: int, seed: SeedSpec) -> Draws:
    """Draws where the time-t action is induced by deploying ``f`` through ``p``."""
    n = _check_n(n)
    h = _draw_h(seed, n)
    a = np.asarray(act(p, forecast(f, h), h), dtype=np.float64)
    y = conditional_mean(env, h, a) + env.sigma * _draw_noise(seed, n)
    return Draws(h, a, y)


def sample_outcomes(env, h: float, a: float, n: int, seed: SeedSpec) -> np.ndarray:
    """``n`` independent draws of ``Y`` at a fixed ``(h, a)``."""
    n = _check_n(n)
    return conditional_mean(env, h, a) + env.sigma * _draw_noise(seed, n)
