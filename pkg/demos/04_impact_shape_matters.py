"""Same forecaster, different impact law.

Deployment risk depends on the shape of the price response, not just its
size at one point.  Here a linear impact and a square-root impact agree at
|a| = 1 yet give different risks for the same trades.
"""

from feedbackrisk import Linear, Proportional, SeedSpec, impact_perturbation

for alpha in (0.25, 0.5, 1.0, 2.0):
    rep = impact_perturbation(Linear(1.0), Proportional(alpha), 0.5, -1.0, 1.0, 200_000, SeedSpec(20261016))
    print(f"alpha={alpha:<5} linear {rep.linear_risk.value:.4f}   sqrt {rep.concave_risk.value:.4f}"
          f"   difference {rep.delta:+.4f}")
