"""
Monotone graphs and their Yosida approximations
===============================================

The catalog holds a linear law, power laws and the Stefan enthalpy law with a
latent-heat plateau. Each comes with its convex potential, resolvent and
Yosida approximation.
"""

import numpy as np

from chreg import Perturbation, PowerLaw, Stefan, validate_conditions

stefan = Stefan(ks=2.0, kl=3.0, latent=1.0)
r = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
print("enthalpy r      :", r)
print("temperature     :", stefan.beta(r))
print("potential       :", stefan.potential(r))

# the Yosida approximation approaches beta from below in absolute value
for lam in (1.0, 0.1, 0.01, 0.001):
    print(f"lambda={lam:<6} beta_lambda(2) = {stefan.yosida(lam, 2.0):.6f}")

# the fast-diffusion law q < 1 has an infinite slope at the origin
fast = PowerLaw(0.5)
print("slope near 0 (capped):", fast.derivative(np.array([1e-20, 1e-4, 1.0])))

# structural checks for one regularization level
report = validate_conditions(stefan, Perturbation(0.1))
print("\n".join(report.lines()))
