"""How much does acting move the outcome?

Elasticity is the Wasserstein-1 shift in the outcome law per unit of
action.  For linear feedback it equals |beta|.  When it is small the
feedback gap is small too: under absolute loss the gap never exceeds
E[|beta| |action|].
"""

from feedbackrisk import (Absolute, ConcaveImpactEnv, Linear, LinearFeedbackEnv, Proportional, SeedSpec,
                          estimate_elasticity, prop1_check)

seed = SeedSpec(20261016)
e = estimate_elasticity(LinearFeedbackEnv(0.7, 0.5), 0.0, 0.0, 1.0, 100_000, seed)
print(f"linear impact, beta=0.7: elasticity {e.value:.4f} +/- {e.std_error:.4f}")

for a, a2 in [(0.0, 0.25), (0.0, 1.0), (0.0, 4.0)]:
    e = estimate_elasticity(ConcaveImpactEnv(1.0, 0.5), 0.0, a, a2, 100_000, seed)
    print(f"square-root impact, a: {a} -> {a2}: elasticity {e.value:.4f}  (falls as the step grows)")

print("\n beta  alpha    |gap|    bound   holds")
for beta in (0.0, 0.25, 0.5, 1.0):
    for alpha in (0.5, 1.0):
        r = prop1_check(LinearFeedbackEnv(beta, 0.5), Linear(1.0), Proportional(alpha), 100_000,
                        seed.derive("prop", f"{beta}", f"{alpha}"), Absolute())
        print(f" {beta:4}  {alpha:5}  {r.gap_abs:7.4f}  {r.bound:7.4f}   {r.holds}")
