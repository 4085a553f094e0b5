"""Classify long-run regimes analytically and locate a boundary by sweeping.

Three scalar conditions sort each species:

* a negative long-run average of the net log-growth rate
  (growth - diffusion/2 - jump mass) forces extinction;
* a positive infimum of growth - diffusion^2 - second-moment jump mass
  gives stochastic permanence;
* a non-negative net growth rate everywhere plus a positive competition
  margin pins the sample exponent at zero.

For constant and periodic/piecewise coefficients all of these are exact, so
the dying/surviving boundary of a one-parameter family is known in closed
form -- here at growth = 1/2 + (ln 2 - 1/2) = 0.693147.
"""

import json
import math

from lvjumps import constant_model
from lvjumps.conditions import compute_regime_report

for name, params in [
    ("benchmark", dict(a=1.0, sigma=0.5, gamma=-0.5)),
    ("dying", dict(a=0.1, sigma=1.0, gamma=-0.5)),
    ("surviving", dict(a=2.0, sigma=1.0, gamma=0.5)),
]:
    model = constant_model(1, b=1.0, weights=(1.0,), **params)
    s = compute_regime_report(model).species[0]
    print(
        f"{name:10s} eta = {s.eta.value:+.6f}  c1 = {s.c1.value:+.6f}  "
        f"net growth inf = {s.net_growth_inf.value:+.6f}  -> {s.classification}"
    )

print()
boundary = 0.5 + (math.log(2.0) - 0.5)
print(f"sweeping the growth rate (sigma=1, jump size -0.5 at rate 1);")
print(f"the analytic extinction boundary sits at a = {boundary:.6f}")
prev = None
for k in range(1, 21):
    a = k / 10.0
    model = constant_model(1, a=a, b=1.0, sigma=1.0, gamma=-0.5, weights=(1.0,))
    label = compute_regime_report(model).species[0].classification
    if prev is not None and prev != label:
        print(f"  a = {a - 0.1:.1f}: {prev}  ->  a = {a:.1f}: {label}")
    prev = label

print()
print("full report for the dying model:")
model = constant_model(1, a=0.1, b=1.0, sigma=1.0, gamma=-0.5, weights=(1.0,))
print(json.dumps(compute_regime_report(model).to_payload(), indent=2))
