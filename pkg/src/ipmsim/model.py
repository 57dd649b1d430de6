"""Crop / pest / biopesticide / chemical-pesticide model with periodic impulses.

Five state variables: crop biomass x, susceptible pests y, infected pests z,
biopesticide (virus) level v, chemical pesticide concentration s.  Between
impulses the state follows a smooth vector field; at multiples of two
independent periods the controls v and s receive additive jumps.

This module holds the parameterization, the state and schedule types, the
vector field and jump maps, and the closed-form reference solutions used as
oracles elsewhere (periodic control orbits, pest-free logistic crop growth).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParameters",
    "SystemState",
    "ImpulseSchedule",
    "ImpulseKind",
    "vector_field",
    "apply_impulse",
    "analytic_periodic_bio",
    "analytic_periodic_chem",
    "logistic_solution",
    "default_parameters",
]


@dataclass(frozen=True)
class ModelParameters:
    """Rate constants and conversion factors of the pest-management model."""

    r: float      # crop net growth rate [1/day]
    k: float      # crop carrying capacity [biomass]
    alpha: float  # crop <-> susceptible-pest contact rate [1/(biomass day)]
    phi: float    # feeding attenuation of infected pests [-], >= 0
    lam: float    # virus infection rate of susceptible pests [1/(virus day)]
    c1: float     # susceptible-pest conversion factor, in (0,1)
    c2: float     # infected-pest conversion factor, in (0,1)
    d: float      # susceptible-pest mortality [1/day]
    delta: float  # additional infected-pest mortality [1/day]
    theta: float  # virus replication factor, in (0,1)
    gamma: float  # virus lysis/decay rate [1/day]
    mu: float     # chemical-pesticide decay rate [1/day]
    m1: float     # chemical kill rate on susceptible pests [1/(conc day)]
    m2: float     # chemical kill rate on infected pests [1/(conc day)]

    def __post_init__(self):
        for name in ("r", "k", "alpha", "lam", "d", "delta", "gamma", "mu", "m1", "m2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"parameter {name!r} must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.phi) and self.phi >= 0.0):
            raise DomainError(f"parameter 'phi' must be finite and >= 0, got {self.phi!r}")
        for name in ("c1", "c2", "theta"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise DomainError(f"parameter {name!r} must lie strictly in (0,1), got {value!r}")

    def as_tuple(self) -> tuple:
        """Fixed field order consumed by the numeric kernels."""
        return (
            self.r, self.k, self.alpha, self.phi, self.lam, self.c1, self.c2,
            self.d, self.delta, self.theta, self.gamma, self.mu, self.m1, self.m2,
        )

    @property
    def decay_floor(self) -> float:
        """min(d, gamma, mu, (d+delta)(1-theta)), the slowest dissipation rate.

        Strictly positive for any valid parameter set; the uniform bound on the
        total biomass is expressed in terms of it.
        """
        return min(self.d, self.gamma, self.mu, (self.d + self.delta) * (1.0 - self.theta))


@dataclass(frozen=True)
class SystemState:
    """Instantaneous state (x, y, z, v, s); every component is >= 0."""

    x: float  # crop biomass
    y: float  # susceptible pest density
    z: float  # infected pest density
    v: float  # biopesticide (virus) level
    s: float  # chemical pesticide concentration

    def __post_init__(self):
        for name in ("x", "y", "z", "v", "s"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"state component {name!r} must be finite, got {value!r}")
            if value < 0.0:
                raise DomainError(f"state component {name!r} must be >= 0, got {value!r}")

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.v, self.s)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_iterable(cls, values) -> "SystemState":
        x, y, z, v, s = values
        return cls(float(x), float(y), float(z), float(v), float(s))


class ImpulseKind(enum.Enum):
    """Which control(s) jump at an impulse time."""

    BIO = "bio"
    CHEM = "chem"
    BOTH = "both"


@dataclass(frozen=True)
class ImpulseSchedule:
    """Two independent impulse trains: biopesticide every tau1 days adding v_i,
    chemical every tau2 days adding s_i.  A period of None disables that train.

    With ``first_impulse_at_zero`` impulses act on the grid n*tau for
    n = 0, 1, 2, ...; otherwise the n = 0 impulse is skipped.
    """

    tau1: float | None = None   # biopesticide period [day]
    tau2: float | None = None   # chemical period [day]
    v_i: float = 0.0            # biopesticide impulse strength
    s_i: float = 0.0            # chemical impulse strength
    first_impulse_at_zero: bool = True

    def __post_init__(self):
        for name in ("tau1", "tau2"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"period {name!r} must be finite and > 0, got {value!r}")
        for name in ("v_i", "s_i"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"impulse strength {name!r} must be finite and >= 0, got {value!r}")

    @property
    def bio_active(self) -> bool:
        return self.tau1 is not None

    @property
    def chem_active(self) -> bool:
        return self.tau2 is not None


def vector_field(state: SystemState, params: ModelParameters) -> np.ndarray:
    """Smooth part of the dynamics, d(x,y,z,v,s)/dt between impulses.

    dx/dt = r x (1 - x/k) - alpha x y - phi alpha x z
    dy/dt = c1 alpha x y - lam y v - d y - m1 s y
    dz/dt = c2 phi alpha x z + lam y v - (d+delta) z - m2 s z
    dv/dt = theta (d+delta) z - gamma v
    ds/dt = -mu s
    """
    x, y, z, v, s = state.as_tuple()
    for name, value in zip("xyzvs", (x, y, z, v, s)):
        if not math.isfinite(value):
            raise DomainError(f"non-finite state component {name!r}: {value!r}")
    p = params
    return np.array(
        [
            p.r * x * (1.0 - x / p.k) - p.alpha * x * y - p.phi * p.alpha * x * z,
            p.c1 * p.alpha * x * y - p.lam * y * v - p.d * y - p.m1 * s * y,
            p.c2 * p.phi * p.alpha * x * z + p.lam * y * v - (p.d + p.delta) * z - p.m2 * s * z,
            p.theta * (p.d + p.delta) * z - p.gamma * v,
            -p.mu * s,
        ]
    )


def apply_impulse(state: SystemState, kind: ImpulseKind, schedule: ImpulseSchedule) -> SystemState:
    """Jump map at an impulse time: adds v_i and/or s_i to the control levels.

    The two increments act on disjoint coordinates, so a BOTH event is
    order-independent.  x, y, z never jump.
    """
    dv = schedule.v_i if kind in (ImpulseKind.BIO, ImpulseKind.BOTH) else 0.0
    ds = schedule.s_i if kind in (ImpulseKind.CHEM, ImpulseKind.BOTH) else 0.0
    return SystemState(state.x, state.y, state.z, state.v + dv, state.s + ds)


def _periodic_decay(t: float, period: float, strength: float, rate: float) -> float:
    # Right-continuous sawtooth-exponential: value at t = n*period is the
    # post-impulse level strength / (1 - e^{-rate*period}).
    n = math.floor(t / period)
    return strength * math.exp(-rate * (t - n * period)) / (1.0 - math.exp(-rate * period))


def analytic_periodic_bio(t: float, schedule: ImpulseSchedule, params: ModelParameters) -> float:
    """Closed-form periodic biopesticide orbit v*(t) under Bio impulses alone.

    v*(t) = v_i e^{-gamma (t - n tau1)} / (1 - e^{-gamma tau1}) with
    n = floor(t/tau1); right-continuous, so at t = n tau1 the post-impulse
    value is returned.
    """
    if schedule.tau1 is None:
        raise DomainError("biopesticide period tau1 is not set")
    return _periodic_decay(t, schedule.tau1, schedule.v_i, params.gamma)


def analytic_periodic_chem(t: float, schedule: ImpulseSchedule, params: ModelParameters) -> float:
    """Closed-form periodic chemical orbit s*(t); mirror of the bio orbit with
    s_i, mu, tau2."""
    if schedule.tau2 is None:
        raise DomainError("chemical period tau2 is not set")
    return _periodic_decay(t, schedule.tau2, schedule.s_i, params.mu)


def logistic_solution(t: float, x0: float, params: ModelParameters) -> float:
    """Pest-free crop growth x(t) = k x0 / (x0 + (k - x0) e^{-rt}).

    The decaying exponent makes x(t) -> k for every x0 > 0; x0 = 0 stays 0.
    """
    if not (math.isfinite(x0) and x0 >= 0.0):
        raise DomainError(f"initial biomass must be finite and >= 0, got {x0!r}")
    if x0 == 0.0:
        return 0.0
    denom = x0 + (params.k - x0) * math.exp(-params.r * t)
    if denom <= 0.0:
        raise DomainError(f"logistic solution undefined at t={t!r} for x0={x0!r}")
    return params.k * x0 / denom


def default_parameters() -> ModelParameters:
    """Baseline parameter set used by the bundled presets.

    phi, theta and mu are assumptions (not fixed by the scenario sources) and
    are flagged as such in the preset files.
    """
    return ModelParameters(
        r=0.1, k=1.0, alpha=0.2, phi=0.1, lam=0.35,
        c1=0.5, c2=0.8, d=0.05, delta=0.2, theta=0.8,
        gamma=0.15, mu=0.3, m1=0.8, m2=0.6,
    )
