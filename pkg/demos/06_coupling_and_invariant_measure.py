"""Coupling through common noise, and forgetting the initial condition.

Two copies of the surviving scalar system started at different sizes but
driven by the *same* noise contract toward each other: the mean absolute
difference of their reciprocals decays inside an explicit exponential
envelope, and their difference never changes sign.  Consequently the
time-T law becomes independent of the starting point: the Kolmogorov
distance between empirical laws started at 0.5 and 2.0 falls to the
two-sample sampling floor.
"""

from lvjumps import constant_model, coupling_contraction, invariant_distance

model = constant_model(1, a=2.0, b=1.0, sigma=1.0, gamma=0.5, weights=(1.0,))

print("== coupled pair, x = 0.5 vs y = 2.0, 1000 shared paths ==")
res = coupling_contraction(model, 0, 0.5, 2.0, T=10.0, h=2.0**-6, n_paths=1000,
                           seed=5, checkpoint_count=5)
print("   t     E|1/Yx - 1/Yy|   envelope 1.5 exp(-0.8333 t)")
for t, m, env in zip(res.inverse_diff.checkpoints, res.inverse_diff.mean, res.envelope):
    print(f"  {t:4.1f}   {m:12.6f}     {env:12.6f}")
print(f"within envelope at every checkpoint: {res.all_ok}")
print(f"paths without a sign reversal: {100 * res.sign_consistent_fraction:.1f}%")

print()
print("== empirical laws at T = 25 from two starts (independent paths) ==")
inv = invariant_distance(model, 0, 0.5, 2.0, T=25.0, h=2.0**-6, n_paths=2000, seed=9)
print(f"Kolmogorov distance: {inv.distance:.4f}")
print(f"sampling floor (two-sample DKW 99% + slack): {inv.sampling_floor:.4f}")
print(f"laws indistinguishable at this resolution: {inv.within_floor}")
