"""Acceptance gate: one test per criterion, summarized at the end of the run.

Each test records its headline numbers with ``record_property`` so the
terminal summary line carries them.
"""

import math
import time

import numpy as np
import pytest

from feedbackrisk import (
    Absolute,
    CoverageConfig,
    CrowdingEnv,
    Linear,
    LinearFeedbackEnv,
    Proportional,
    SeedSpec,
    Squared,
    closed_form_deployment_risk,
    closed_form_passive_risk,
    coverage_experiment,
    crowding_curve,
    default_alpha_grid,
    epsilon_n_bound,
    estimate_elasticity,
    inversion_threshold,
    mc_deployment_risk,
    mc_historical_risk,
    param_error_bound,
    prop1_check,
    sample_passive,
    w1_empirical,
)
from feedbackrisk.cli import run

SEED = SeedSpec(20261016)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "ranking inversion: crossing at 4/9, Monte Carlo sign change in its cell")
def test_ranking_inversion(record_property):
    gamma, sigma = 1.35, 0.5
    alphas = default_alpha_grid(1.0, 0.05)
    with Timer() as t:
        analytic = crowding_curve([1.0, 0.25], alphas, gamma, sigma, mode="analytic")
        mc = crowding_curve([1.0, 0.25], alphas, gamma, sigma, mode="montecarlo", n_mc=200_000, seed=SEED)
    a_star = analytic.crossing_alpha
    record_property("alpha_star", a_star)
    record_property("mc_cell", mc.mc_crossing_interval)
    record_property("seconds", round(t.elapsed, 2))

    assert a_star == pytest.approx(4 / 9, rel=2**-52, abs=0)
    # both closed-form risks coincide at the crossing
    r_hi = closed_form_deployment_risk(1.0, a_star, gamma, sigma)
    r_lo = closed_form_deployment_risk(0.25, a_star, gamma, sigma)
    assert r_hi == pytest.approx(r_lo, rel=1e-14)

    lo, hi = mc.mc_crossing_interval
    assert lo <= a_star <= hi and hi - lo == pytest.approx(0.05)
    for risks, ses, exact in zip(mc.risks, mc.std_errors, analytic.risks):
        z = np.abs(risks - exact) / ses
        assert np.all(z <= 3), f"worst z = {z.max():.2f}"
    assert t.elapsed <= 30


@pytest.mark.criterion(2, "inversion thresholds are exactly 1 and 0.6")
def test_thresholds(record_property):
    record_property("t0", inversion_threshold(0.0))
    record_property("t025", inversion_threshold(0.25))
    assert inversion_threshold(0.0) == 1.0
    assert inversion_threshold(0.25) == 0.6


@pytest.mark.criterion(3, "passive law is blind to beta while deployment risk is not")
def test_passive_nonidentifiability(record_property):
    sigma, n = 0.5, 200_000
    with Timer() as t:
        blobs = {b: sample_passive(LinearFeedbackEnv(b, sigma), n, SEED).tobytes() for b in (-5.0, 0.0, 0.5, 1.0, 5.0)}
        assert len(set(blobs.values())) == 1
        worst = 0.0
        for beta, expected in [(0.0, 0.25), (0.5, 0.5), (1.0, 1.25)]:
            r = mc_deployment_risk(LinearFeedbackEnv(beta, sigma), Linear(1.0), Proportional(1.0), Squared(), n, SEED)
            assert abs(r.value - expected) <= 3 * r.std_error, (beta, r)
            worst = max(worst, abs(r.value - expected) / r.std_error)
    record_property("worst_z", round(worst, 3))
    record_property("seconds", round(t.elapsed, 2))
    assert t.elapsed <= 10


@pytest.mark.criterion(4, "Monte Carlo risks match closed forms on the 4x6 grid")
def test_closed_form_grid(record_property):
    env = CrowdingEnv(1.35, 0.5)
    worst = 0.0
    with Timer() as t:
        for c in (0.0, 0.25, 0.5, 1.0):
            for alpha in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
                point = SEED.derive("grid", f"{c}", f"{alpha}")
                hist = mc_historical_risk(env, Linear(c), Squared(), 200_000, point.derive("historical"))
                dep = mc_deployment_risk(env, Linear(c), Proportional(alpha), Squared(), 200_000,
                                         point.derive("deployment"))
                for est, exact in [(hist, closed_form_passive_risk(c, 0.5)),
                                   (dep, closed_form_deployment_risk(c, alpha, 1.35, 0.5))]:
                    z = abs(est.value - exact) / est.std_error
                    worst = max(worst, z)
                    assert z <= 3, (c, alpha, est, exact)
    record_property("worst_z", round(worst, 3))
    record_property("seconds", round(t.elapsed, 2))
    assert t.elapsed <= 60


@pytest.mark.criterion(5, "finite-sample bounds cover and the sandwich implication holds")
def test_coverage(record_property):
    pb = param_error_bound(1.0, 2.0, 0.5, 2, 10_000, 0.05)
    eps = epsilon_n_bound(1.0, 2.0, 0.5, 2, 10_000, 0.05)
    assert pb == pytest.approx(0.16747, abs=1e-5)
    assert eps == pytest.approx(0.33494, abs=2e-5)

    cfg = CoverageConfig(p=2, n=10_000, sigma=1.0, L=2.0, a_max=1.0, lam=0.25, delta=0.05, trials=500)
    with Timer() as t:
        res = coverage_experiment(cfg, SEED)
    record_property("param_coverage", res.param_coverage)
    record_property("design_event_rate", res.design_event_rate)
    record_property("seconds", round(t.elapsed, 2))
    assert res.coverage_defined
    assert res.param_coverage >= 0.95
    assert res.sandwich_holds
    assert t.elapsed <= 120


@pytest.mark.criterion(6, "small-feedback bound holds across the grid; reference gap and bound")
def test_small_feedback(record_property):
    with Timer() as t:
        for beta in (0.0, 0.25, 0.5, 1.0):
            for alpha in (0.5, 1.0):
                r = prop1_check(LinearFeedbackEnv(beta, 0.5), Linear(1.0), Proportional(alpha), 100_000,
                                SEED.derive("prop", f"{beta}", f"{alpha}"), Absolute())
                assert r.holds, (beta, alpha, r)
        ref = prop1_check(LinearFeedbackEnv(0.5, 0.5), Linear(1.0), Proportional(1.0), 100_000, SEED, Absolute())
    # E|Y - H| deployed minus passive, with Y - H ~ N(0, 0.5) vs N(0, 0.25)
    gap_exact = (math.sqrt(0.5) - 0.5) * math.sqrt(2 / math.pi)
    record_property("gap", round(ref.gap_abs, 5))
    record_property("bound", round(ref.bound, 6))
    record_property("seconds", round(t.elapsed, 2))
    assert gap_exact == pytest.approx(0.1652, abs=5e-5)
    assert abs(ref.gap_abs - gap_exact) <= 3 * ref.std_error
    assert abs(ref.bound - 0.3989) <= 1e-4
    assert t.elapsed <= 20


@pytest.mark.criterion(7, "elasticity recovers beta; W1 metric and shift identities are exact")
def test_elasticity(record_property):
    est = estimate_elasticity(LinearFeedbackEnv(0.7, 0.5), 0.0, 0.0, 1.0, 100_000, SEED)
    record_property("elasticity", round(est.value, 5))
    assert abs(est.value - 0.7) <= 0.05 * 0.7

    rng = np.random.default_rng(20261016)
    for _ in range(100):
        size = int(2 ** rng.integers(0, 8))
        # dyadic values keep every sum and difference exact in binary floating point
        x, y, z = (rng.integers(-2**10, 2**10, size) / 64.0 for _ in range(3))
        shift = rng.integers(-2**10, 2**10) / 64.0
        dxy = w1_empirical(x, y)
        assert w1_empirical(x, x) == 0.0
        assert dxy == w1_empirical(y, x) >= 0.0
        assert w1_empirical(x, z) <= dxy + w1_empirical(y, z)
        assert w1_empirical(x + shift, x) == abs(shift)
        assert w1_empirical(x + shift, y + shift) == dxy


CLI_CASES = {
    "nonid": ["nonid", "--betas=-5,0,0.5,1,5", "--n", "50000"],
    "inversion": ["inversion", "--c-prime", "0.25"],
    "crowding-analytic": ["crowding", "--mode", "analytic"],
    "crowding-mc": ["crowding", "--mode", "montecarlo", "--n", "20000"],
    "elasticity": ["elasticity", "--n", "50000"],
    "smallfeedback": ["smallfeedback", "--n", "50000"],
    "impact": ["impact", "--n", "50000"],
    "estimate": ["estimate", "--theta", "1,0.5", "--n", "5000", "--eta", "1"],
    "coverage-json": ["coverage", "--trials", "100", "--n", "2000", "--n-outer", "2000"],
    "coverage-csv": ["coverage", "--trials", "100", "--n", "2000", "--n-outer", "2000", "--format", "csv"],
}


@pytest.mark.criterion(8, "every CLI subcommand is byte-for-byte reproducible, any thread count")
def test_cli_determinism(tmp_path, record_property):
    covered = set()
    for name, argv in CLI_CASES.items():
        outputs = []
        for k, threads in enumerate(("1", "1", "8")):
            path = tmp_path / f"{name}-{k}"
            assert run(argv + ["--seed", "20261016", "--threads", threads, "--out", str(path)]) == 0, name
            outputs.append(path.read_bytes())
        assert outputs[0] and outputs[0] == outputs[1] == outputs[2], name
        covered.add(argv[0])
    record_property("subcommands", len(covered))
    assert covered == {"nonid", "inversion", "crowding", "elasticity", "smallfeedback", "impact", "estimate", "coverage"}
