"""Least-squares estimation of linear feedback from randomized actions.

Data follow ``Y_i = z_i' w + sigma * eps_i`` with ``z_i = (phi_i, A_i)`` and
``w = (theta, beta)``.  The actions are drawn uniformly on ``[-a_max, a_max]``
independently of everything else, so they act as an exogenous instrument.
Conditional on the design event ``lambda_min(Z'Z / n) >= lambda``, the OLS
error satisfies, with probability at least ``1 - delta``,

    ||w_hat - w||_2 <= (sigma * L / lambda) * sqrt(2 p log(2p / delta) / n)

and any plug-in conditional mean with ``||z|| <= L`` is off by at most
``eps_n = L`` times that.
"""

from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from ._util import fmt17, parallel_map
from .core import Forecaster, forecast
from .linalg import min_eigen_sym
from .streams import SeedSpec

__all__ = [
    "SingularDesignError", "ContractError",
    "DesignMatrix", "OlsFit", "BoundReport", "PluginRiskReport",
    "generate_instrumented_data", "ols_fit", "check_design_event",
    "param_error_bound", "epsilon_n_bound", "plugin_error_bound",
    "plugin_deployment_risk", "plugin_risk_terms",
    "InstrumentedPolicy", "CoverageConfig", "CoverageResult", "coverage_experiment",
    "bound_report", "MisspecifiedFit", "misspecified_fit",
]


class SingularDesignError(np.linalg.LinAlgError):
    """The empirical Gram matrix is (numerically) singular."""


class ContractError(ValueError):
    """A caller-supplied feature map broke its norm guarantee."""


@dataclass(frozen=True)
class DesignMatrix:
    rows: np.ndarray
    L: float

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("design rows must form a 2-d array")
        n, p = rows.shape
        if p < 2 or n < p:
            raise ValueError(f"need n >= p >= 2, got n={n}, p={p}")
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms > self.L * (1 + 1e-12)):
            raise ValueError(f"row norm {norms.max():.6g} exceeds L={self.L}")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    def gram(self) -> np.ndarray:
        return self.rows.T @ self.rows / self.n


@dataclass(frozen=True)
class OlsFit:
    w_hat: np.ndarray
    gram_min_eigenvalue: float
    residual_variance: float


@dataclass(frozen=True)
class BoundReport:
    lam: float
    delta: float
    sigma: float
    param_bound: float
    epsilon_n: float
    design_event_holds: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


@dataclass(frozen=True)
class PluginRiskReport:
    risk_hat: float
    error_bound: float
    B: float
    oracle_risk: Optional[float] = None

    @property
    def within_bound(self) -> Optional[bool]:
        if self.oracle_risk is None:
            return None
        return abs(self.risk_hat - self.oracle_risk) <= self.error_bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d["within_bound"] = self.within_bound
        return d


def _clip_features(phi: np.ndarray, cap: float) -> np.ndarray:
    # rescale rows of phi so that ||phi_i|| <= cap
    norms = np.linalg.norm(phi, axis=1)
    scale = np.minimum(1.0, cap / np.maximum(norms, np.finfo(float).tiny))
    return phi * scale[:, None]


def _feature_cap(L: float, a_max: float) -> float:
    if not a_max > 0:
        raise ValueError(f"a_max must be positive, got {a_max}")
    if not L > a_max:
        raise ValueError(f"infeasible norm cap: need L > a_max, got L={L}, a_max={a_max}")
    return math.sqrt(L * L - a_max * a_max)


def generate_instrumented_data(
    theta, beta: float, sigma: float, L: float, a_max: float, n: int, seed: SeedSpec,
    eta: Optional[float] = None,
) -> tuple[DesignMatrix, np.ndarray]:
    """Simulate a randomized-action regression sample.

    Features are standard normal, rescaled when needed so that
    ``||(phi_i, a_max)|| <= L``; actions are uniform on ``[-a_max, a_max]``.
    With ``eta`` given, the response is generated from the concave mean
    ``theta'phi + eta * sign(A) * sqrt(|A|)`` instead of the linear one.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    p = theta.size + 1
    if int(n) != n or n < p:
        raise ValueError(f"need n >= p = {p}, got {n}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    n = int(n)
    cap = _feature_cap(L, a_max)

    phi = seed.derive("features").normal(n * (p - 1)).reshape(n, p - 1)
    phi = _clip_features(phi, cap)
    actions = a_max * (2.0 * seed.derive("actions").uniform(n) - 1.0)
    rows = np.column_stack([phi, actions])
    noise = seed.derive("noise").normal(n)
    if eta is None:
        mean = phi @ theta + beta * actions
    else:
        mean = phi @ theta + eta * np.sign(actions) * np.sqrt(np.abs(actions))
    return DesignMatrix(rows, L), mean + sigma * noise


def ols_fit(Z: DesignMatrix, Y) -> OlsFit:
    """Least squares through a QR factorization of the design."""
    Y = np.asarray(Y, dtype=np.float64)
    rows = Z.rows
    n, p = rows.shape
    if Y.shape != (n,):
        raise ValueError(f"response must have shape ({n},), got {Y.shape}")
    lam_min = min_eigen_sym(Z.gram())
    if lam_min <= 1e-12:
        raise SingularDesignError(f"rank-deficient design (min Gram eigenvalue {lam_min:.3g})")
    q, r = np.linalg.qr(rows)
    w_hat = np.linalg.solve(r, q.T @ Y)
    resid = Y - rows @ w_hat
    rss = float(resid @ resid)
    resid_var = rss / (n - p) if n > p else 0.0
    return OlsFit(w_hat, lam_min, resid_var)


def check_design_event(Z: DesignMatrix, lam: float) -> bool:
    return min_eigen_sym(Z.gram()) >= lam


def param_error_bound(sigma: float, L: float, lam: float, p: int, n: int, delta: float) -> float:
    if sigma < 0 or L <= 0 or lam <= 0 or p < 1 or n < 1:
        raise ValueError("need sigma >= 0, L > 0, lambda > 0, p >= 1, n >= 1")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return sigma * L / lam * math.sqrt(2 * p * math.log(2 * p / delta) / n)


def epsilon_n_bound(sigma: float, L: float, lam: float, p: int, n: int, delta: float) -> float:
    return L * param_error_bound(sigma, L, lam, p, n, delta)


def plugin_error_bound(B: float, eps_n: float) -> float:
    return 2.0 * B * eps_n + eps_n**2


def bound_report(Z: DesignMatrix, sigma: float, lam: float, delta: float) -> BoundReport:
    pb = param_error_bound(sigma, Z.L, lam, Z.p, Z.n, delta)
    return BoundReport(lam, delta, sigma, pb, Z.L * pb, check_design_event(Z, lam))


def _policy_features(policy_feature_fn, h, L) -> np.ndarray:
    zpi = np.asarray(policy_feature_fn(h), dtype=np.float64)
    if zpi.ndim != 2 or zpi.shape[0] != len(h):
        raise ContractError(f"policy features must have shape (n, p), got {zpi.shape}")
    if L is not None:
        worst = float(np.max(np.linalg.norm(zpi, axis=1)))
        if worst > L * (1 + 1e-12):
            raise ContractError(f"policy feature norm {worst:.6g} exceeds L={L}")
    return zpi


def plugin_risk_terms(f, policy_feature_fn, w, h, L=None):
    """Per-history ``f(h)`` and ``z_pi(h)' w``; ``h`` is an array of histories."""
    zpi = _policy_features(policy_feature_fn, h, L)
    yhat = forecast(f, h) if not callable(f) else np.asarray(f(h), dtype=np.float64)
    return np.asarray(yhat, dtype=np.float64), zpi @ np.asarray(w, dtype=np.float64)


def _passive_histories(seed: SeedSpec, n: int, dim: int) -> np.ndarray:
    h = seed.derive("outer").normal(n * dim)
    return h if dim == 1 else h.reshape(n, dim)


def plugin_deployment_risk(
    f: Forecaster | Callable, policy_feature_fn: Callable, w_hat, sigma: float,
    n_outer: int, seed: SeedSpec, L: Optional[float] = None, history_dim: int = 1,
) -> float:
    """Monte Carlo plug-in squared-loss deployment risk,
    ``mean_H (f(H) - z_pi(H)' w_hat)^2 + sigma^2``, over passive histories.

    ``f`` is a :class:`Forecaster` or a plain callable on the history array.
    Histories are standard normal, of shape ``(n_outer,)`` or
    ``(n_outer, history_dim)``.  With ``L`` given, any feature row with norm
    above ``L`` raises :class:`ContractError`.
    """
    h = _passive_histories(seed, n_outer, history_dim)
    yhat, mean_hat = plugin_risk_terms(f, policy_feature_fn, w_hat, h, L)
    return float(np.mean((yhat - mean_hat) ** 2) + sigma**2)


# -- coverage experiment -----------------------------------------------------

@dataclass(frozen=True)
class InstrumentedPolicy:
    """Deployment used to score the plug-in estimate in coverage runs.

    Histories ``H`` are ``p - 1`` standard normals.  The feature block is
    ``H`` rescaled to the same cap as the design, the forecaster predicts the
    passive mean ``theta' phi(H)``, and the action is
    ``clip(alpha * forecast, -a_max, a_max)``.  The oracle prediction error is
    then ``|beta * A| <= |beta| * a_max =: B``.
    """

    theta: np.ndarray
    L: float
    a_max: float
    alpha: float = 1.0

    def phi(self, h):
        h2 = np.atleast_2d(h) if np.ndim(h) > 1 else np.asarray(h, dtype=np.float64).reshape(-1, 1)
        return _clip_features(h2, _feature_cap(self.L, self.a_max))

    def forecaster(self, h):
        return self.phi(h) @ self.theta

    def features(self, h):
        phi = self.phi(h)
        a = np.clip(self.alpha * (phi @ self.theta), -self.a_max, self.a_max)
        return np.column_stack([phi, a])

    def B(self, beta: float) -> float:
        return abs(beta) * self.a_max


@dataclass(frozen=True)
class CoverageConfig:
    p: int = 2
    n: int = 10_000
    sigma: float = 1.0
    L: float = 2.0
    a_max: float = 1.0
    lam: float = 0.25
    delta: float = 0.05
    trials: int = 500
    w_true: tuple = (1.0, 0.5)
    alpha: float = 1.0
    n_outer: int = 10_000

    def __post_init__(self):
        if self.trials < 100:
            raise ValueError(f"coverage needs at least 100 trials, got {self.trials}")
        if len(self.w_true) != self.p:
            raise ValueError(f"w_true has length {len(self.w_true)}, expected p={self.p}")
        if self.n < self.p:
            raise ValueError("need n >= p")
        _feature_cap(self.L, self.a_max)
        param_error_bound(self.sigma, self.L, self.lam, self.p, self.n, self.delta)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    design_event: bool
    param_err: float
    param_bound: float
    plugin_err: float
    plugin_bound: float
    param_covered: bool
    plugin_covered: bool


@dataclass
class CoverageResult:
    config: CoverageConfig
    trials: list = field(repr=False)
    param_coverage: Optional[float]
    plugin_coverage: Optional[float]
    design_event_rate: float
    sandwich_holds: bool
    mean_param_error: Optional[float]

    @property
    def coverage_defined(self) -> bool:
        return self.param_coverage is not None

    def summary(self) -> dict:
        return {
            "param_coverage": self.param_coverage,
            "plugin_coverage": self.plugin_coverage,
            "design_event_rate": self.design_event_rate,
            "coverage_defined": self.coverage_defined,
            "sandwich_holds": self.sandwich_holds,
            "mean_param_error": self.mean_param_error,
            "trials": len(self.trials),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("trial,design_event,param_err,param_bound,plugin_err,plugin_bound\n")
        for t in self.trials:
            buf.write(
                f"{t.trial},{int(t.design_event)},{fmt17(t.param_err)},{fmt17(t.param_bound)},"
                f"{fmt17(t.plugin_err)},{fmt17(t.plugin_bound)}\n"
            )
        return buf.getvalue()


# round-off allowance when comparing an error to a bound that can be exactly zero
_ROUNDOFF = 1e-10


def _run_trial(cfg: CoverageConfig, seed: SeedSpec, i: int) -> TrialRecord:
    w = np.asarray(cfg.w_true, dtype=np.float64)
    s = seed.derive("trial", i)
    Z, Y = generate_instrumented_data(w[:-1], w[-1], cfg.sigma, cfg.L, cfg.a_max, cfg.n, s)
    event = check_design_event(Z, cfg.lam)
    pb = param_error_bound(cfg.sigma, cfg.L, cfg.lam, cfg.p, cfg.n, cfg.delta)
    eps = cfg.L * pb
    policy = InstrumentedPolicy(w[:-1], cfg.L, cfg.a_max, cfg.alpha)
    plugin_bound = plugin_error_bound(policy.B(w[-1]), eps)
    if not event:
        nan = float("nan")
        return TrialRecord(i, False, nan, pb, nan, plugin_bound, False, False)

    fit = ols_fit(Z, Y)
    err = float(np.linalg.norm(fit.w_hat - w))
    h = _passive_histories(s, cfg.n_outer, cfg.p - 1)
    yhat, mean_true = plugin_risk_terms(policy.forecaster, policy.features, w, h, cfg.L)
    _, mean_hat = plugin_risk_terms(policy.forecaster, policy.features, fit.w_hat, h, cfg.L)
    # sigma^2 cancels between the plug-in and the oracle risk on common histories
    plugin_err = abs(float(np.mean((yhat - mean_hat) ** 2) - np.mean((yhat - mean_true) ** 2)))
    slack = _ROUNDOFF * max(1.0, float(np.linalg.norm(w)))
    return TrialRecord(
        i, True, err, pb, plugin_err, plugin_bound,
        bool(err <= pb + slack), bool(plugin_err <= plugin_bound + slack),
    )


def coverage_experiment(cfg: CoverageConfig, seed: SeedSpec, threads: int = 1) -> CoverageResult:
    """Repeat generate / check / fit and count how often the bounds hold.

    Coverage fractions are taken over trials where the design event holds;
    with no such trial they are ``None`` and ``coverage_defined`` is false.
    ``sandwich_holds`` records that the plug-in bound held on every trial whose
    parameter bound held.
    """
    records = parallel_map(lambda i: _run_trial(cfg, seed, i), range(cfg.trials), threads)
    hits = [r for r in records if r.design_event]
    rate = len(hits) / len(records)
    if not hits:
        return CoverageResult(cfg, records, None, None, rate, True, None)
    return CoverageResult(
        cfg,
        records,
        param_coverage=float(sum(r.param_covered for r in hits) / len(hits)),
        plugin_coverage=float(sum(r.plugin_covered for r in hits) / len(hits)),
        design_event_rate=rate,
        sandwich_holds=all(r.plugin_covered for r in hits if r.param_covered),
        mean_param_error=float(np.mean([r.param_err for r in hits])),
    )


# -- misspecification stress ---------------------------------------------------

@dataclass(frozen=True)
class MisspecifiedFit:
    w_hat: np.ndarray
    rho_hat: float
    gram_min_eigenvalue: float


def misspecified_fit(theta, eta: float, sigma: float, L: float, a_max: float, n: int, seed: SeedSpec) -> MisspecifiedFit:
    """Fit the linear model to data with square-root impact and report
    ``rho_hat = max_i |g(z_i) - z_i' w_hat|``.  No bound is asserted."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    Z, Y = generate_instrumented_data(theta, 0.0, sigma, L, a_max, n, seed, eta=eta)
    fit = ols_fit(Z, Y)
    phi, a = Z.rows[:, :-1], Z.rows[:, -1]
    g = phi @ theta + eta * np.sign(a) * np.sqrt(np.abs(a))
    rho = float(np.max(np.abs(g - Z.rows @ fit.w_hat)))
    return MisspecifiedFit(fit.w_hat, rho, fit.gram_min_eigenvalue)
