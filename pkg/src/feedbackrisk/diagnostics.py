"""Crowding curves, ranking inversion, passive non-identifiability and impact
perturbation."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ._util import fmt17, parallel_map
from .core import DeploymentPolicy, Forecaster, Linear, Proportional, Squared
from .env import ConcaveImpactEnv, CrowdingEnv, LinearFeedbackEnv, sample_passive
from .risk import (
    RiskEstimate,
    closed_form_deployment_risk,
    closed_form_nonid_risk,
    mc_deployment_risk,
)
from .streams import SeedSpec

__all__ = [
    "CurveMode", "CrowdingCurve", "NonIdReport", "ImpactReport",
    "inversion_threshold", "crossing_alpha", "crowding_curve", "default_alpha_grid",
    "nonid_demo", "impact_perturbation",
]


def inversion_threshold(c_prime: float) -> float:
    """Value of ``gamma * alpha`` above which ``f_1`` loses to ``f_{c'}`` once deployed."""
    if not 0.0 <= c_prime < 1.0:
        raise ValueError(f"conservative coefficient must lie in [0, 1), got {c_prime}")
    return (1.0 - c_prime) / (1.0 + c_prime)


def crossing_alpha(c_prime: float, gamma: float) -> float:
    """Adoption intensity at which the two deployed risks are equal."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return inversion_threshold(c_prime) / gamma


def default_alpha_grid(alpha_max: float = 1.0, step: float = 0.05) -> np.ndarray:
    """``0, step, ..., alpha_max`` built from integer multiples (no drift)."""
    if step <= 0 or alpha_max < 0:
        raise ValueError("need step > 0 and alpha_max >= 0")
    k = int(round(alpha_max / step))
    return np.arange(k + 1) * step


class CurveMode(str, Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "montecarlo"


@dataclass
class CrowdingCurve:
    alphas: np.ndarray
    cs: list
    risks: list  # one array per model, aligned with alphas
    gamma: float
    sigma: float
    mode: CurveMode
    std_errors: Optional[list] = None
    crossing_alpha: Optional[float] = None
    mc_crossing_interval: Optional[tuple] = None

    @property
    def rows(self):
        return list(zip(self.cs, self.risks))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(["alpha"] + [f"risk_c={np.format_float_positional(c, trim='-')}" for c in self.cs]) + "\n")
        for i, a in enumerate(self.alphas):
            buf.write(",".join([fmt17(a)] + [fmt17(r[i]) for r in self.risks]) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "alphas": [float(a) for a in self.alphas],
            "cs": [float(c) for c in self.cs],
            "risks": [[float(v) for v in r] for r in self.risks],
            "std_errors": None if self.std_errors is None else [[float(v) for v in s] for s in self.std_errors],
            "gamma": self.gamma,
            "sigma": self.sigma,
            "mode": self.mode.value,
            "crossing_alpha": self.crossing_alpha,
            "mc_crossing_interval": None if self.mc_crossing_interval is None else list(self.mc_crossing_interval),
        }


def _analytic_crossing(c_hi: float, c_lo: float, gamma: float) -> Optional[float]:
    # (c_hi k - 1)^2 = (c_lo k - 1)^2 with k = 1 + gamma*alpha > 0 gives k = 2 / (c_hi + c_lo)
    if c_hi == c_lo:
        return None
    if c_hi == 1.0 and 0.0 <= c_lo < 1.0:
        return crossing_alpha(c_lo, gamma)
    if c_hi + c_lo <= 0:
        return None
    return (2.0 / (c_hi + c_lo) - 1.0) / gamma


def sign_change_interval(alphas, diff) -> Optional[tuple]:
    """First grid cell where ``diff`` changes sign.

    A point where ``diff`` is exactly zero is counted on the pre-crossing side.
    """
    signs = np.sign(diff)
    nonzero = signs[signs != 0]
    if nonzero.size == 0:
        return None
    current = nonzero[0]
    for i in range(1, len(signs)):
        if signs[i] != 0 and signs[i] != current:
            return float(alphas[i - 1]), float(alphas[i])
    return None


def crowding_curve(
    cs, alphas, gamma: float = 1.35, sigma: float = 0.5, mode: CurveMode | str = CurveMode.ANALYTIC,
    n_mc: int = 200_000, seed: SeedSpec | None = None, threads: int = 1,
) -> CrowdingCurve:
    """Deployment risk of each ``f_c(h) = c*h`` over a grid of adoption intensities.

    Monte Carlo points at the same ``alpha`` share one stream across models
    (common random numbers), and each grid point has its own child stream.
    """
    mode = CurveMode(mode)
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alpha grid must be a non-empty 1-d sequence")
    if np.any(np.diff(alphas) <= 0) or alphas[0] < 0:
        raise ValueError("alpha grid must be non-negative and strictly ascending")
    cs = [float(c) for c in cs]
    if not cs:
        raise ValueError("need at least one model")
    for c in cs:
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"model coefficient must lie in [0, 1], got {c}")
    env = CrowdingEnv(gamma, sigma)

    std_errors = None
    if mode is CurveMode.ANALYTIC:
        risks = [np.array([closed_form_deployment_risk(c, a, gamma, sigma) for a in alphas]) for c in cs]
    else:
        if seed is None:
            raise ValueError("Monte Carlo mode needs a seed")

        def point(i):
            s = seed.derive("alpha", i)
            return [mc_deployment_risk(env, Linear(c), Proportional(float(alphas[i])), Squared(), n_mc, s) for c in cs]

        grid = parallel_map(point, range(alphas.size), threads)
        risks = [np.array([grid[i][j].value for i in range(alphas.size)]) for j in range(len(cs))]
        std_errors = [np.array([grid[i][j].std_error for i in range(alphas.size)]) for j in range(len(cs))]

    curve = CrowdingCurve(alphas, cs, risks, gamma, sigma, mode, std_errors)
    if len(cs) == 2:
        hi, lo = max(cs), min(cs)
        a_star = _analytic_crossing(hi, lo, gamma)
        if a_star is not None and alphas[0] <= a_star <= alphas[-1]:
            curve.crossing_alpha = a_star
        if mode is CurveMode.MONTE_CARLO:
            curve.mc_crossing_interval = sign_change_interval(alphas, risks[0] - risks[1])
    return curve


@dataclass
class NonIdReport:
    betas: list
    sigma: float
    passive_identical: bool
    deployment_risks: list
    std_errors: list
    closed_form: list
    n: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "betas": self.betas,
            "sigma": self.sigma,
            "passive_identical": self.passive_identical,
            "deployment_risks": self.deployment_risks,
            "std_errors": self.std_errors,
            "closed_form": self.closed_form,
            "n": self.n,
            "metadata": self.metadata,
        }


def nonid_demo(betas=(0.0, 0.5, 1.0), sigma: float = 0.5, n: int = 200_000,
               seed: SeedSpec | None = None, threads: int = 1) -> NonIdReport:
    """Same passive law, different deployment risks, across feedback coefficients.

    Uses ``mu(h) = h``, ``f(h) = h`` and action ``A = f(H)``.  Every beta is
    evaluated on the same stream.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("need at least one beta")
    seed = SeedSpec(0) if seed is None else seed
    envs = [LinearFeedbackEnv(b, sigma) for b in betas]

    passive = [sample_passive(e, n, seed).tobytes() for e in envs]
    identical = all(p == passive[0] for p in passive[1:])

    risks = parallel_map(
        lambda e: mc_deployment_risk(e, Linear(1.0), Proportional(1.0), Squared(), n, seed), envs, threads
    )
    return NonIdReport(
        betas=betas,
        sigma=sigma,
        passive_identical=identical,
        deployment_risks=[r.value for r in risks],
        std_errors=[r.std_error for r in risks],
        closed_form=[closed_form_nonid_risk(b, sigma) for b in betas],
        n=int(n),
        metadata={
            "forecaster": "f(h)=h",
            "policy": "A=f(H)",
            "mu": "identity",
            "artifact_defaults": "sigma=0.5 and betas=(0, 0.5, 1) are package defaults, not published values",
        },
    )


@dataclass(frozen=True)
class ImpactReport:
    linear_risk: RiskEstimate
    concave_risk: RiskEstimate
    delta: float

    def to_dict(self) -> dict:
        return {
            "linear_risk": self.linear_risk.to_dict(),
            "concave_risk": self.concave_risk.to_dict(),
            "delta": self.delta,
        }


def impact_perturbation(
    f: Forecaster, p: DeploymentPolicy, sigma: float, linear_beta: float, eta: float,
    n: int, seed: SeedSpec,
) -> ImpactReport:
    """Deployment risk under linear impact versus square-root impact, same stream."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    linear = mc_deployment_risk(LinearFeedbackEnv(linear_beta, sigma), f, p, Squared(), n, seed)
    concave = mc_deployment_risk(ConcaveImpactEnv(eta, sigma), f, p, Squared(), n, seed)
    return ImpactReport(linear, concave, concave.value - linear.value)
