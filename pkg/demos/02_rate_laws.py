"""
Where the approximation error comes from
========================================

The network averages M Euler-Maruyama sample paths with step size h. Its error
has two parts:

* sampling error, shrinking like M^(-1/2);
* time-stepping bias, shrinking like h.

We measure each one separately and fit a line in log-log coordinates.
"""

from pathlib import Path

from kolmonet.bench import rate_sweep

out = Path("demo-output")

# Sampling: heat-max on [0, 1]^2, fixed step, growing M
mc = rate_sweep("mc", "heat-max", axis=(4, 16, 64, 256), out=out / "mc.csv")
for M, err, se in zip(mc.axis, mc.values, mc.stderrs):
    print(f"M={M:4d}  L2 error {err:.4f} (se {se:.4f})")
print(f"slope {mc.slope:+.3f}, 95% CI [{mc.ci[0]:+.3f}, {mc.ci[1]:+.3f}], R^2 {mc.r2:.3f}")

# Bias: Ornstein-Uhlenbeck with a linear payoff, so E[f0] is known exactly
# and only the step size matters
eu = rate_sweep("euler", "ou-linear", axis=(0.1, 0.05, 0.025, 0.0125), out=out / "euler.csv")
for h, err in zip(eu.axis, eu.values):
    print(f"h={h:<7g} weak error {err:.2e}")
print(f"slope {eu.slope:+.3f}, R^2 {eu.r2:.4f}")

print("CSV files in", out.resolve())
