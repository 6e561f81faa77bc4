"""
How big does the network get?
=============================

With the constants from the existence argument, M and the step count are
astronomically large, far too large to build. The parameter count can
still be computed exactly from the architecture. We check that it grows
polynomially in the dimension d and in 1/epsilon.
"""

import math

from kolmonet.bench import rate_sweep
from kolmonet.constructor import cube_eta, paper_constants

# Constants in log space: finite even for d = 10^6 and epsilon = 10^-6
kappa = 2.0
eta = cube_eta(kappa)
for d, eps in ((1, 0.1), (1000, 0.1), (10**6, 1e-6)):
    c = paper_constants(d, eps, kappa, eta)
    print(f"d={d:<8d} eps={eps:<6g} log M = {c.log_M:8.1f}   log delta = {c.log_delta:8.1f}")

growth_d = rate_sweep("params-d", "heat-max", axis=(1, 2, 4, 8, 16), fixed={"epsilon": 0.2})
for d, n in zip(growth_d.axis, growth_d.extra["param_count"]):
    print(f"d={d:2d}  parameters ~ 10^{math.log10(n):.1f}")
print(f"log-log slope in d: {growth_d.slope:.2f} (R^2 {growth_d.r2:.4f}); "
      f"certified exponent {growth_d.info['certified_exponent']:.2f}")

growth_eps = rate_sweep("params-eps", "heat-max", axis=(0.4, 0.2, 0.1, 0.05), fixed={"d": 2})
print(f"log-log slope in 1/eps: {growth_eps.slope:.2f}; "
      f"certified exponent {growth_eps.info['certified_exponent']:.2f}")
