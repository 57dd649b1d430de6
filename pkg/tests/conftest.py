"""Shared helpers: seeded random draws of valid model inputs."""

import numpy as np
import pytest

from ipmsim import ImpulseSchedule, ModelParameters
from ipmsim.stability import analytic_multipliers, growth_exponents


def random_parameters(rng: np.random.Generator) -> ModelParameters:
    """A random parameter set satisfying every type invariant."""
    return ModelParameters(
        r=rng.uniform(0.05, 0.5),
        k=rng.uniform(0.5, 3.0),
        alpha=rng.uniform(0.05, 0.6),
        phi=rng.uniform(0.0, 0.5),
        lam=rng.uniform(0.05, 0.8),
        c1=rng.uniform(0.2, 0.9),
        c2=rng.uniform(0.2, 0.9),
        d=rng.uniform(0.02, 0.3),
        delta=rng.uniform(0.05, 0.4),
        theta=rng.uniform(0.2, 0.9),
        gamma=rng.uniform(0.1, 0.6),
        mu=rng.uniform(0.1, 0.6),
        m1=rng.uniform(0.1, 1.0),
        m2=rng.uniform(0.1, 1.0),
    )


def random_state(rng: np.random.Generator) -> tuple:
    return tuple(rng.uniform(0.0, 2.0, size=5))


def draw_same_interval_case(rng: np.random.Generator, max_tries: int = 500):
    """Random same-interval schedule whose analytic multipliers are moderate
    in size and pairwise well separated (so sorted-order matching against the
    numeric multipliers is unambiguous)."""
    for _ in range(max_tries):
        params = random_parameters(rng)
        tau = rng.uniform(1.0, 8.0)
        schedule = ImpulseSchedule(
            tau1=tau, tau2=tau,
            v_i=rng.uniform(0.0, 8.0), s_i=rng.uniform(0.0, 1.0),
        )
        ln2, ln3 = growth_exponents(params, schedule)
        if not (-8.0 < ln2 < 3.0 and -8.0 < ln3 < 3.0):
            continue
        lams = sorted(analytic_multipliers(params, schedule), reverse=True)
        gaps = [(a - b) / a for a, b in zip(lams, lams[1:])]
        if min(gaps) < 1e-3:
            continue
        return params, schedule
    raise RuntimeError("failed to draw a well-separated same-interval case")


def draw_stabilized_case(rng: np.random.Generator, max_tries: int = 1000):
    """Random same-interval schedule that satisfies the same-interval
    stability conditions with margin, sized so the boundedness check also
    applies (moderate k, pulse peaks dominated by the release rate)."""
    for _ in range(max_tries):
        params = random_parameters(rng)
        if params.k > 2.0:
            continue
        tau = rng.uniform(2.0, 6.0)
        v_i = rng.uniform(3.0, 8.0)
        s_i = rng.uniform(0.0, 0.5)
        schedule = ImpulseSchedule(tau1=tau, tau2=tau, v_i=v_i, s_i=s_i)
        s_peak = s_i / (1.0 - np.exp(-params.mu * tau))
        if s_peak > v_i:
            continue
        ln2, ln3 = growth_exponents(params, schedule)
        if max(ln2, ln3) < -0.5:
            return params, schedule
    raise RuntimeError("failed to draw a stabilized case")


def draw_critical_period_case(rng: np.random.Generator, max_tries: int = 500):
    """Random strengths and parameters whose critical shared period has the
    simple closed form (the y-direction exponent crosses zero first), well
    inside the bisection bracket."""
    for _ in range(max_tries):
        params = random_parameters(rng)
        v_i = float(rng.uniform(0.5, 8.0))
        s_i = float(rng.uniform(0.0, 1.0))
        slope2 = params.c1 * params.alpha * params.k - params.d
        slope3 = params.c2 * params.phi * params.k * params.alpha - (
            params.d + params.delta
        )
        if slope2 < 1e-3:
            continue
        drop2 = params.lam * v_i / params.gamma + params.m1 * s_i / params.mu
        drop3 = params.m2 * s_i / params.mu
        tau_star = drop2 / slope2
        if not 0.5 <= tau_star <= 1e5:
            continue
        if slope3 > 0.0 and drop3 / slope3 <= tau_star:
            continue  # the z-direction would bind first
        return params, v_i, s_i, tau_star
    raise RuntimeError("failed to draw a critical-period case")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
