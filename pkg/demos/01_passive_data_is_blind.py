"""Two markets, one history.

We simulate a feedback coefficient beta that only switches on once a
forecast is traded.  With no trading, every beta produces the very same
sample, bit for bit.  Once the forecast drives actions, the risk moves with
beta.  No amount of passive data tells these worlds apart.
"""

from feedbackrisk import LinearFeedbackEnv, SeedSpec, nonid_demo, sample_passive

seed = SeedSpec(20261016)
betas = [-5.0, 0.0, 0.5, 1.0, 5.0]

samples = [sample_passive(LinearFeedbackEnv(b, 0.5), 5, seed) for b in betas]
print("first passive draws (h, y), identical for every beta:")
for h, _, y in samples[0]:
    print(f"  h={h:+.4f}  y={y:+.4f}")
print("bytes identical across betas:", len({s.tobytes() for s in samples}) == 1)

report = nonid_demo(betas=[0.0, 0.5, 1.0], sigma=0.5, n=200_000, seed=seed)
print("\ndeployed squared-loss risk of f(h) = h, acting A = f(H):")
for b, r, se, cf in zip(report.betas, report.deployment_risks, report.std_errors, report.closed_form):
    print(f"  beta={b:<4}  MC {r:.4f} +/- {se:.4f}   closed form {cf:.4f}")
