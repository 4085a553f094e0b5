"""Analytic classifier against Monte Carlo measurements, across modules."""

import numpy as np

from lvjumps import constant_model, invariant_distance, sample_lyapunov_mc
from lvjumps.analysis import lyapunov_functional_mc
from lvjumps.conditions import CLASS_EXTINCT, CLASS_PERMANENT, compute_regime_report


def test_classifier_agrees_with_measured_exponent():
    # 30 random constant scalar models: the dying class must measure a
    # negative exponent beyond 3 standard errors, the surviving class a
    # near-zero one.  Models with a long-run rate too close to zero to
    # resolve at T=400 are redrawn.
    rng = np.random.default_rng(4040)
    T, h, n_paths = 400.0, 2.0**-4, 60
    checked = 0
    while checked < 30:
        lam = float(rng.uniform(0.3, 1.5))
        model = constant_model(
            1,
            a=float(rng.uniform(0.2, 2.5)),
            b=float(rng.uniform(0.3, 1.5)),
            sigma=float(rng.uniform(0.0, 1.2)),
            gamma=float(rng.uniform(-0.8, 1.5)),
            weights=(lam,),
        )
        s = compute_regime_report(model).species[0]
        if abs(s.eta.value) < 0.08:
            continue  # unresolvable at this horizon and path count
        if s.classification not in (CLASS_EXTINCT, CLASS_PERMANENT):
            continue
        mc = sample_lyapunov_mc(
            model, 0, 1.0, T, h, n_paths, int(rng.integers(1 << 62)), checkpoint_count=1
        )
        mean, se = mc.over_t.mean[-1], mc.over_t.std_error[-1]
        if s.classification == CLASS_EXTINCT:
            assert mean + 3 * se < 0, (s.eta.value, mean, se)
        else:
            assert abs(mean) < 0.05 + 3 * se, (s.eta.value, mean, se)
        checked += 1


def test_growth_functional_tightens_with_horizon():
    model = constant_model(1, a=1.5, b=1.0, sigma=0.5, gamma=0.3, weights=(1.0,))
    short = lyapunov_functional_mc(model, [1.0], 100.0, 2.0**-4, 120, 77)
    long = lyapunov_functional_mc(model, [1.0], 200.0, 2.0**-4, 120, 77)
    noise = 3 * (short.std_error + long.std_error)
    assert long.mean <= short.mean + noise
    assert long.mean <= long.bound + 3 * long.std_error


def test_invariant_distance_shrinks_with_horizon():
    model = constant_model(1, a=2.0, b=1.0, sigma=1.0, gamma=0.5, weights=(1.0,))
    near = invariant_distance(model, 0, 0.5, 2.0, 2.0, 2.0**-5, 400, 3030)
    far = invariant_distance(model, 0, 0.5, 2.0, 8.0, 2.0**-5, 400, 3030)
    assert far.distance <= near.distance + 0.05
    assert far.distance <= far.sampling_floor
