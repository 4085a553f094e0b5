"""Shared fixtures: benchmark models and a bounded random-model generator."""

import numpy as np
import pytest

from lvjumps import Const, MarkSpace, ModelSpec, PiecewiseConst, Sinusoid, constant_model


@pytest.fixture
def benchmark_model():
    """n=1, a=1, b=1, sigma=0.5, one mark gamma=-0.5 at rate 1."""
    return constant_model(1, a=1.0, b=1.0, sigma=0.5, gamma=-0.5, weights=(1.0,))


@pytest.fixture
def extinct_model():
    """n=1, a=0.1, sigma=1, gamma=-0.5 at rate 1: long-run rate -0.593147."""
    return constant_model(1, a=0.1, b=1.0, sigma=1.0, gamma=-0.5, weights=(1.0,))


@pytest.fixture
def permanent_model():
    """n=1, a=2, sigma=1, gamma=0.5 at rate 1: permanence margin 0.8333."""
    return constant_model(1, a=2.0, b=1.0, sigma=1.0, gamma=0.5, weights=(1.0,))


@pytest.fixture
def deterministic_model():
    """n=1, a=b=1, no noise, no jumps: the plain logistic equation."""
    return constant_model(1, a=1.0, b=1.0, sigma=0.0)


def random_coefficient(rng, lo, hi, positive_inf=False, nonneg_inf=False):
    """A random Const/Sinusoid/PiecewiseConst with range inside [lo, hi]."""
    kind = rng.integers(0, 3)
    if kind == 0:
        return Const(float(rng.uniform(lo, hi)))
    if kind == 1:
        base = rng.uniform(lo, hi)
        room = min(base - lo, hi - base)
        amp = rng.uniform(0.0, room)
        return Sinusoid(float(base), float(amp), float(rng.uniform(0.5, 6.0)),
                        float(rng.uniform(0.0, 6.28)))
    n_pieces = int(rng.integers(2, 4))
    breaks = np.sort(rng.uniform(0.3, 4.5, n_pieces - 1))
    vals = rng.uniform(lo, hi, n_pieces)
    return PiecewiseConst(tuple(breaks), tuple(vals))


def random_valid_model(rng, max_n=4, max_marks=3) -> ModelSpec:
    """A random model satisfying the standing hypotheses, with bounded rates."""
    n = int(rng.integers(1, max_n + 1))
    K = int(rng.integers(0, max_marks + 1))
    a = tuple(random_coefficient(rng, 0.3, 2.5) for _ in range(n))
    B = tuple(
        tuple(
            random_coefficient(rng, 0.2, 2.0)
            if i == j
            else random_coefficient(rng, 0.0, 1.0)
            for j in range(n)
        )
        for i in range(n)
    )
    sigma = tuple(random_coefficient(rng, 0.0, 1.0) for _ in range(n))
    gamma = tuple(
        tuple(random_coefficient(rng, -0.85, 1.5) for _ in range(K)) for _ in range(n)
    )
    weights = tuple(float(w) for w in rng.uniform(0.2, 1.5, K))
    return ModelSpec(n=n, a=a, B=B, sigma=sigma, gamma=gamma, marks=MarkSpace(weights))


def random_x0(rng, n):
    return rng.uniform(0.2, 2.0, n)
