"""
Conditioned states add up to the reduced state
==============================================

Projecting the joint state on bath positions gives a conditioned atom
state for every outcome.  Integrating them against their probability
density (Gauss-Hermite quadrature, exact for these Gaussian-times-polynomial
integrands) reproduces the partial trace.
"""

import numpy as np

from nmsse import BathSpec, exact_series, integrate_conditional, reduced_state
from nmsse.qcore import superposition

init = superposition(0.6, 0.8j)
for spec in (BathSpec.single_mode(1.0),
             BathSpec.from_triples([[1.0, 0.0, 0.0], [0.5, 0.2, -1.0], [0.3, 0.0, 1.5]])):
    worst = 0.0
    for joint in exact_series(spec, init, np.linspace(0.0, 1.5, 10)):
        total, rho = integrate_conditional(joint, order=30)
        worst = max(worst, abs(total - 1), np.max(np.abs(rho - reduced_state(joint))))
    print(f"K={spec.K}: max |quadrature - partial trace| = {worst:.2e}")
