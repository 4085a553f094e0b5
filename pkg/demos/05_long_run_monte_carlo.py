"""Measure sample exponents and moment boundedness by Monte Carlo.

The dying regime has a strictly negative exponential decay rate that the
normalised log population recovers; the surviving regime's exponent is zero.
Moments of the full system stay uniformly bounded in time.  Reduced sizes
here; the full-scale runs live in the acceptance suite.
"""

import math

from lvjumps import constant_model, estimate_moment, sample_lyapunov_mc

T, h, n_paths, seed = 200.0, 2.0**-5, 200, 11

print("== dying regime: a=0.1, sigma=1, jump -0.5 at rate 1 ==")
dying = constant_model(1, a=0.1, b=1.0, sigma=1.0, gamma=-0.5, weights=(1.0,))
rate = 0.1 - 0.5 - (math.log(2.0) - 0.5)
mc = sample_lyapunov_mc(dying, 0, 1.0, T, h, n_paths, seed, checkpoint_count=4)
for t, m, se in zip(mc.over_t.checkpoints, mc.over_t.mean, mc.over_t.std_error):
    print(f"  t = {t:5.0f}   ln Y(t)/t = {m:+.4f} +- {se:.4f}")
print(f"  analytic long-run rate: {rate:+.6f}")
tiny = sum(v < 1e-6 for v in mc.final_values)
print(f"  Y(T) < 1e-6 on {tiny}/{len(mc.final_values)} paths")

print()
print("== surviving regime: a=2, sigma=1, jump +0.5 at rate 1 ==")
surviving = constant_model(1, a=2.0, b=1.0, sigma=1.0, gamma=0.5, weights=(1.0,))
mc = sample_lyapunov_mc(surviving, 0, 1.0, T, h, n_paths, seed, checkpoint_count=4)
for t, m, se in zip(mc.over_t.checkpoints, mc.over_t.mean, mc.over_t.std_error):
    print(f"  t = {t:5.0f}   ln Y(t)/t = {m:+.4f} +- {se:.4f}")
print("  (tends to zero: neither extinction nor explosion)")

print()
print("== second moment of the benchmark stays bounded ==")
benchmark = constant_model(1, a=1.0, b=1.0, sigma=0.5, gamma=-0.5, weights=(1.0,))
series = estimate_moment(benchmark, [1.0], 2.0, 50.0, 2.0**-5, 300, 3, checkpoint_count=10)
for t, m in zip(series.checkpoints, series.mean):
    print(f"  t = {t:4.0f}   E|X|^2 = {m:.4f}")
early = series.mean[series.checkpoints <= 25.0]
late = series.mean[series.checkpoints >= 25.0]
print(f"  late-window mean {late.mean():.4f} <= 1.2 x early max {early.max():.4f}: "
      f"{late.mean() <= 1.2 * early.max()}")
