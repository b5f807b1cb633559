import json
import math

import numpy as np
import pytest

from feedbackrisk.core import Absolute, Linear, Proportional, Squared, Zero
from feedbackrisk.env import ConcaveImpactEnv, CrowdingEnv, LinearFeedbackEnv
from feedbackrisk.risk import (
    Method, RiskEstimate, closed_form_deployment_risk, closed_form_nonid_risk,
    closed_form_passive_risk, feedback_gap, mc_deployment_risk, mc_historical_risk,
)
from feedbackrisk.streams import SeedSpec

N = 200_000
GRID_SEED = SeedSpec(20261016)
CROWD = CrowdingEnv(1.35, 0.5)


def test_historical_risk_of_identity_forecaster():
    r = mc_historical_risk(CROWD, Linear(1.0), Squared(), N, SeedSpec(1))
    assert r.method is Method.MONTE_CARLO and r.n == N
    assert r.value == pytest.approx(0.25, abs=0.005)


def test_historical_risk_conservative():
    r = mc_historical_risk(CROWD, Linear(0.25), Squared(), N, SeedSpec(2))
    assert r.value == pytest.approx(0.8125, abs=0.01)


def test_std_error_definition():
    r = mc_historical_risk(CROWD, Linear(0.5), Squared(), 1000, SeedSpec(3))
    from feedbackrisk.env import sample_passive
    d = sample_passive(CROWD, 1000, SeedSpec(3))
    losses = (0.5 * d.h - d.y) ** 2
    assert r.value == pytest.approx(losses.mean(), rel=1e-15)
    assert r.std_error == pytest.approx(losses.std(ddof=1) / math.sqrt(1000), rel=1e-12)


def test_n_below_two_rejected():
    with pytest.raises(ValueError):
        mc_historical_risk(CROWD, Linear(1.0), Squared(), 1, SeedSpec(0))


@pytest.mark.parametrize("c,expected,tol", [(1.0, 1.4164, 0.02), (0.25, 0.4804, 0.01)])
def test_deployment_risk_examples(c, expected, tol):
    r = mc_deployment_risk(CROWD, Linear(c), Proportional(0.8), Squared(), N, SeedSpec(4))
    assert r.value == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("env", [CROWD, LinearFeedbackEnv(2.0, 0.3), ConcaveImpactEnv(1.0, 0.5)])
def test_zero_policy_deployment_equals_historical(env):
    s = SeedSpec(5)
    assert mc_deployment_risk(env, Linear(0.7), Zero(), Squared(), 1000, s) == \
        mc_historical_risk(env, Linear(0.7), Squared(), 1000, s)


def test_gap_zero_policy_exact():
    g = feedback_gap(CROWD, Linear(1.0), Zero(), Squared(), 1000, SeedSpec(6))
    assert g.gap == 0.0 and g.paired


def test_gap_crowding():
    g = feedback_gap(CROWD, Linear(1.0), Proportional(0.8), Squared(), N, SeedSpec(7))
    assert not g.paired
    assert g.gap == g.deployment.value - g.historical.value
    assert g.gap == pytest.approx(1.1664, abs=0.02)


def test_gap_absolute_loss_linear_feedback():
    g = feedback_gap(LinearFeedbackEnv(0.5, 0.5), Linear(1.0), Proportional(1.0), Absolute(), N, SeedSpec(8))
    # E|beta H + sigma eps| - E|sigma eps| for Gaussians
    exact = math.sqrt(2 / math.pi) * (math.sqrt(0.5**2 + 0.5**2) - 0.5)
    assert exact == pytest.approx(0.1652, abs=1e-4)
    assert g.gap == pytest.approx(exact, abs=0.005)


def test_closed_form_examples():
    assert closed_form_passive_risk(1, 0.5) == 0.25
    assert closed_form_passive_risk(0.25, 0.5) == 0.8125
    assert closed_form_passive_risk(0, 0.3) == pytest.approx(1 + 0.09)
    assert closed_form_deployment_risk(1, 0, 1.35, 0.5) == 0.25
    assert closed_form_deployment_risk(1, 0.8, 1.35, 0.5) == pytest.approx(1.4164, abs=1e-12)
    a_star = 0.6 / 1.35
    assert closed_form_deployment_risk(0.25, a_star, 1.35, 0.5) == pytest.approx(0.61, abs=1e-12)
    assert closed_form_deployment_risk(1.0, a_star, 1.35, 0.5) == pytest.approx(0.61, abs=1e-12)
    assert closed_form_nonid_risk(0, 0.5) == 0.25
    assert closed_form_nonid_risk(1, 0.5) == 1.25
    assert closed_form_nonid_risk(-0.5, 0.5) == 0.5


@pytest.mark.parametrize("c", [0.0, 0.25, 0.5, 1.0])
@pytest.mark.parametrize("alpha", [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
def test_oracle_agreement_grid(c, alpha):
    r = mc_deployment_risk(CROWD, Linear(c), Proportional(alpha), Squared(), N, GRID_SEED.derive(f"{c}-{alpha}"))
    exact = closed_form_deployment_risk(c, alpha, 1.35, 0.5)
    assert abs(r.value - exact) <= 3 * r.std_error
    assert exact >= 0.25 and r.value >= 0


@pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("gamma", [0.1, 1.35, 4.0])
@pytest.mark.parametrize("sigma", [0.01, 0.5, 2.0])
def test_alpha_zero_reduces_to_passive(c, gamma, sigma):
    assert closed_form_deployment_risk(c, 0.0, gamma, sigma) == closed_form_passive_risk(c, sigma)


def test_quadratic_in_beta():
    n = N
    for beta in (-1.0, 0.0, 1.0):
        r = mc_deployment_risk(LinearFeedbackEnv(beta, 0.5), Linear(1.0), Proportional(1.0), Squared(), n, SeedSpec(9))
        assert abs(r.value - closed_form_nonid_risk(beta, 0.5)) <= 3 * r.std_error
    # Lagrange interpolation through the exact values at -1, 0, 1, evaluated at 0.5
    xs = (-1.0, 0.0, 1.0)
    ys = [closed_form_nonid_risk(b, 0.5) for b in xs]
    x = 0.5
    value = sum(
        ys[i] * np.prod([(x - xs[j]) / (xs[i] - xs[j]) for j in range(3) if j != i]) for i in range(3)
    )
    assert value == closed_form_nonid_risk(0.5, 0.5)


def test_json_fields():
    r = mc_historical_risk(CROWD, Linear(1.0), Squared(), 100, SeedSpec(1))
    d = json.loads(json.dumps(r.to_dict()))
    assert set(d) == {"value", "std_error", "n", "method"}
    assert RiskEstimate.closed_form(0.3).to_dict()["std_error"] == 0.0


def test_mc_errors_are_calibrated():
    # z-scores of many independent grid evaluations should look standard normal
    from scipy import stats
    zs = []
    for k in range(10):
        for c in (0.0, 0.5, 1.0):
            for alpha in (0.0, 0.5, 1.0):
                r = mc_deployment_risk(CROWD, Linear(c), Proportional(alpha), Squared(), 20_000,
                                       SeedSpec(777, k).derive(f"{c}-{alpha}"))
                zs.append((r.value - closed_form_deployment_risk(c, alpha, 1.35, 0.5)) / r.std_error)
    zs = np.array(zs)
    assert abs(zs.mean()) < 3 / math.sqrt(zs.size)
    assert stats.kstest(zs, "norm").pvalue > 0.001
