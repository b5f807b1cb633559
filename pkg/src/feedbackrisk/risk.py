"""Historical risk, one-step deployment risk and the feedback gap."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .core import DeploymentPolicy, Forecaster, Loss, Zero, forecast, loss_value
from .env import sample_deployed, sample_passive
from .streams import SeedSpec

__all__ = [
    "Method", "RiskEstimate", "GapEstimate",
    "mc_historical_risk", "mc_deployment_risk", "feedback_gap",
    "closed_form_passive_risk", "closed_form_deployment_risk", "closed_form_nonid_risk",
]


class Method(str, Enum):
    MONTE_CARLO = "MonteCarlo"
    CLOSED_FORM = "ClosedForm"


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    std_error: float
    n: int
    method: Method = Method.MONTE_CARLO

    @classmethod
    def from_losses(cls, losses: np.ndarray) -> "RiskEstimate":
        n = len(losses)
        return cls(float(np.mean(losses)), float(np.std(losses, ddof=1) / math.sqrt(n)), n)

    @classmethod
    def closed_form(cls, value: float) -> "RiskEstimate":
        return cls(float(value), 0.0, 0, Method.CLOSED_FORM)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


@dataclass(frozen=True)
class GapEstimate:
    """``gap = deployment.value - historical.value``.

    ``std_error`` is the paired standard error when both legs share a stream,
    and the root sum of squares of the leg errors otherwise.
    """

    gap: float
    historical: RiskEstimate
    deployment: RiskEstimate
    std_error: float
    paired: bool

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "std_error": self.std_error,
            "paired": self.paired,
            "historical": self.historical.to_dict(),
            "deployment": self.deployment.to_dict(),
        }


def _check_n(n):
    if int(n) != n or n < 2:
        raise ValueError(f"Monte Carlo risk needs n >= 2, got {n}")
    return int(n)


def _losses(draws, f, loss):
    return np.asarray(loss_value(loss, forecast(f, draws.h), draws.y))


def mc_historical_risk(env, f: Forecaster, loss: Loss, n: int, seed: SeedSpec) -> RiskEstimate:
    n = _check_n(n)
    return RiskEstimate.from_losses(_losses(sample_passive(env, n, seed), f, loss))


def mc_deployment_risk(
    env, f: Forecaster, p: DeploymentPolicy, loss: Loss, n: int, seed: SeedSpec
) -> RiskEstimate:
    """Each forecaster is scored on the law its own deployment induces."""
    n = _check_n(n)
    return RiskEstimate.from_losses(_losses(sample_deployed(env, f, p, n, seed), f, loss))


def feedback_gap(
    env, f: Forecaster, p: DeploymentPolicy, loss: Loss, n: int, seed: SeedSpec,
    paired: bool = False,
) -> GapEstimate:
    """Deployment minus historical risk.

    By default the two legs use independent child streams.  With
    ``paired=True`` (forced for the ``Zero`` policy, whose two legs have the
    same law) both legs reuse ``seed`` and the gap is a paired difference.
    """
    n = _check_n(n)
    paired = paired or isinstance(p, Zero)
    if paired:
        hist_losses = _losses(sample_passive(env, n, seed), f, loss)
        dep_losses = _losses(sample_deployed(env, f, p, n, seed), f, loss)
        diff = dep_losses - hist_losses
        se = float(np.std(diff, ddof=1) / math.sqrt(n))
    else:
        hist_losses = _losses(sample_passive(env, n, seed.derive("historical")), f, loss)
        dep_losses = _losses(sample_deployed(env, f, p, n, seed.derive("deployment")), f, loss)
        se = None
    hist = RiskEstimate.from_losses(hist_losses)
    dep = RiskEstimate.from_losses(dep_losses)
    if se is None:
        se = math.hypot(hist.std_error, dep.std_error)
    return GapEstimate(dep.value - hist.value, hist, dep, se, paired)


# -- closed forms ------------------------------------------------------------

def closed_form_passive_risk(c: float, sigma: float) -> float:
    """Squared-error risk of ``f(h) = c*h`` against ``Y = H + eps``."""
    return (c - 1.0) ** 2 + sigma**2


def closed_form_deployment_risk(c: float, alpha: float, gamma: float, sigma: float) -> float:
    """Squared-error risk of ``f(h) = c*h`` deployed at intensity ``alpha``
    into the crowding environment."""
    return (c * (1.0 + gamma * alpha) - 1.0) ** 2 + sigma**2


def closed_form_nonid_risk(beta: float, sigma: float) -> float:
    """Deployment risk of ``f(h) = h`` with action ``A = H`` under
    ``Y = H + beta*A + eps``; the cross term vanishes since ``f = mu``."""
    return sigma**2 + beta**2
