"""
A ReLU network for the heat equation with a max initial condition
=================================================================

u(t, x) solves du/dt = Laplacian u on R^2 with u(0, x) = max(x1, x2).
We build one explicit ReLU network that approximates u(1, .) on [0, 1]^2
to L2 accuracy 0.1, then look inside it.
"""

import numpy as np

from kolmonet.constructor import calibrate, select_realization
from kolmonet.network import realize
from kolmonet.oracle import ReferenceSolution, lp_error
from kolmonet.problems import make_problem
from kolmonet.rng import derive_seed

problem = make_problem("heat-max", d=2, T=1.0)
reference = ReferenceSolution.closed_form(problem)

# The initial value max(x1, x2) is itself a small ReLU network
print("f0 network dims:", problem.f0_net.dims)

# Search the (M, delta) ladder for the cheapest pair reaching half the target
constants = calibrate(problem, epsilon=0.1, p=2.0, seed=11, reference=reference)
for row in constants.trace:
    print(f"  M={row['M']:4d} delta={row['delta']:<5g} error={row['error']:.4f}")
print("chosen:", constants.M, "samples,", constants.steps, "Euler steps")

# Draw 8 candidate networks and keep the one with the smallest probe error
report = select_realization(problem, constants, K=8, seed=11, epsilon=0.1, reference=reference)
net = report.network
print(f"network: depth {net.depth}, {report.param_count} parameters, widths {net.dims[:4]}...")

# Score on probes the selection never saw
fresh = lp_error(reference, net, problem.measure, 2.0, 20_000, derive_seed(11, "demo"), 1.0)
print(f"L2 error on fresh probes: {fresh.estimate:.4f} +- {fresh.half_width:.4f}")

# Pointwise view along the diagonal, where the max has its kink
x = np.stack([np.linspace(0, 1, 6)] * 2, axis=1)
for xi, approx, exact in zip(x, realize(net, x)[:, 0], reference(x, 1.0)[0]):
    print(f"  x={xi}  network={approx:.4f}  exact={exact:.4f}")
