"""When the better model loses.

The aggressive forecaster f(h) = h beats the shrunk f(h) = 0.25 h on
historical data.  Deploy both with intensity alpha into a crowded market
(impact -gamma * a) and the ranking flips past alpha* = 0.6 / gamma.
"""

import numpy as np

from feedbackrisk import SeedSpec, crossing_alpha, crowding_curve, default_alpha_grid, inversion_threshold

gamma, sigma = 1.35, 0.5
alphas = default_alpha_grid(1.0, 0.05)

print(f"threshold gamma*alpha > {inversion_threshold(0.25)}, crossing at alpha* = {crossing_alpha(0.25, gamma):.4f}")

analytic = crowding_curve([1.0, 0.25], alphas, gamma, sigma)
mc = crowding_curve([1.0, 0.25], alphas, gamma, sigma, mode="montecarlo", n_mc=200_000, seed=SeedSpec(20261016))

print("\n alpha   R(f_1)   R(f_0.25)   MC R(f_1)  MC R(f_0.25)")
for i, a in enumerate(alphas):
    mark = "  <- ranking flips" if i and np.sign(analytic.risks[0][i] - analytic.risks[1][i]) != np.sign(
        analytic.risks[0][i - 1] - analytic.risks[1][i - 1]) else ""
    print(f" {a:5.2f}  {analytic.risks[0][i]:7.4f}  {analytic.risks[1][i]:9.4f}"
          f"  {mc.risks[0][i]:9.4f}  {mc.risks[1][i]:11.4f}{mark}")
print("\nMonte Carlo sign change in cell", mc.mc_crossing_interval)
