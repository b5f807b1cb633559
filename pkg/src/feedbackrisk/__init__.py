"""Simulation and estimation tools for time series whose targets respond to
the forecasts made about them."""

from .core import (
    Absolute, CustomForecaster, CustomPolicy, DomainError, Linear, Proportional,
    Squared, Zero, act, forecast, loss_value,
)
from .diagnostics import (
    CrowdingCurve, NonIdReport, crossing_alpha, crowding_curve, default_alpha_grid,
    impact_perturbation, inversion_threshold, nonid_demo,
)
from .elasticity import estimate_elasticity, prop1_check, w1_empirical
from .env import (
    ConcaveImpactEnv, CrowdingEnv, Draw, Draws, LinearFeedbackEnv,
    conditional_mean, sample_deployed, sample_passive,
)
from .estimation import (
    CoverageConfig, DesignMatrix, InstrumentedPolicy, SingularDesignError, bound_report, check_design_event,
    coverage_experiment, epsilon_n_bound, generate_instrumented_data, ols_fit,
    param_error_bound, plugin_deployment_risk, plugin_error_bound,
)
from .linalg import min_eigen_sym
from .risk import (
    GapEstimate, RiskEstimate, closed_form_deployment_risk, closed_form_nonid_risk,
    closed_form_passive_risk, feedback_gap, mc_deployment_risk, mc_historical_risk,
)
from .streams import SeedSpec

__version__ = "0.1.0"
