"""Check the integrator against the exact scalar solution on shared noise.

The scalar self-regulating equation has an explicit solution: a stochastic
exponential divided by one plus its running self-interaction integral.  With
the noise held fixed, halving the step repeatedly must shrink the endpoint
gap between the log-Euler scheme and that formula at strong order >= 1/2
(order ~1 here, since the noise enters the log dynamics additively).
"""

import numpy as np
from scipy import stats

from lvjumps import (
    coarsen_path,
    constant_model,
    explicit_logistic,
    sample_driving_path,
    simulate_upper,
)
from lvjumps.analysis import derive_path_seed

model = constant_model(1, a=1.0, b=1.0, sigma=0.5, gamma=-0.5, weights=(1.0,))

print("deterministic sanity: sigma=0, no jumps reduces to the logistic curve")
det = constant_model(1, a=1.0, b=1.0, sigma=0.0)
path = sample_driving_path(det.marks, T=5.0, h=1e-3, seed=0)
t = path.node_times
exact = 0.5 * np.exp(t) / (1.0 + 0.5 * (np.exp(t) - 1.0))
oracle = explicit_logistic(det, 0, 0.5, path)
print(f"  max relative gap to the analytic solution: "
      f"{np.max(np.abs(oracle.values - exact) / exact):.2e}")

print()
print("strong error vs step size (40 shared paths, T = 5):")
n_paths, finest = 40, 2.0**-12
factors = [2**k for k in range(7)]
errors = np.zeros((n_paths, len(factors)))
for j in range(n_paths):
    fine = sample_driving_path(model.marks, 5.0, finest, derive_path_seed(7, j))
    reference = explicit_logistic(model, 0, 1.0, fine).final()
    for fi, factor in enumerate(factors):
        sim = simulate_upper(model, 0, 1.0, coarsen_path(fine, factor))
        errors[j, fi] = abs(sim.values[0, -1] - reference) / reference
mean_err = errors.mean(axis=0)
for factor, err in zip(factors, mean_err):
    print(f"  h = 2^-{12 - int(np.log2(factor)):<2d}  mean rel error = {err:.3e}")
slope = stats.linregress(
    np.log([finest * f for f in factors]), np.log(mean_err)
).slope
print(f"measured strong order: {slope:.2f}")
