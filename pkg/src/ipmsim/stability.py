"""Floquet analysis of the pest-free periodic orbit E = (k, 0, 0, v*, s*).

Provides the closed-form multipliers available when both impulse trains share
one period, a numeric monodromy matrix for arbitrary commensurate periods,
the sufficient stability condition sets in their period-integrated form, and
a bisection search for the critical impulse period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._backend import kernels
from .errors import DomainError, IntegrationError
from .integrator import impulse_calendar
from .model import ImpulseSchedule, ModelParameters

__all__ = [
    "StabilityReport",
    "combined_period",
    "schedule_period",
    "analytic_multipliers",
    "monodromy",
    "multiplier_moduli",
    "check_conditions",
    "critical_period",
    "analyze",
]

_MAX_DENOMINATOR = 10**9

# Largest/smallest impulse periods considered by the critical-period search.
_TAU_LO = 1e-6
_TAU_HI = 1e6

_CONDITION_SETS = ("same-interval", "different-interval", "bio-only", "chem-only")

_NOTE_DIFFERENT_INTERVAL = (
    "different-interval condition set: the z-direction inequality omits the "
    "chemical kill term (m2 s*), unlike the same-interval set; evaluated as "
    "printed, so it can disagree with the monodromy verdict"
)
_NOTE_NO_ANALYTIC = (
    "analytic multiplier formulas require a single shared period; "
    "numeric monodromy multipliers are authoritative here"
)


@dataclass(frozen=True)
class StabilityReport:
    """Stability summary of the pest-free orbit for one schedule.

    numeric_multipliers are the monodromy eigenvalue moduli in descending
    order; analytic_multipliers (same order convention is NOT applied - they
    stay in the canonical lambda1..lambda5 order) are present only when the
    closed forms apply.  stable is the Floquet criterion: dominant < 1.
    """

    period_T: float
    analytic_multipliers: tuple[float, ...] | None
    numeric_multipliers: tuple[float, ...]
    condition_verdicts: Mapping[str, bool]
    dominant_multiplier: float
    stable: bool
    notes: tuple[str, ...] = ()

    def to_text(self) -> str:
        """Flat key-value block, one `key = value` per line."""
        lines = [
            f"period_T = {self.period_T!r}",
            f"stable = {str(self.stable).lower()}",
            f"dominant_multiplier = {self.dominant_multiplier!r}",
            "numeric_multipliers = "
            + ",".join(repr(m) for m in self.numeric_multipliers),
        ]
        if self.analytic_multipliers is not None:
            lines.append(
                "analytic_multipliers = "
                + ",".join(repr(m) for m in self.analytic_multipliers)
            )
        for name in _CONDITION_SETS:
            if name in self.condition_verdicts:
                value = str(self.condition_verdicts[name]).lower()
                lines.append(f"condition.{name} = {value}")
        for i, note in enumerate(self.notes, start=1):
            lines.append(f"note.{i} = {note}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def csv_header() -> list[str]:
        return ["period_T", "stable", "dominant_multiplier"]

    def csv_cells(self) -> list[str]:
        return [
            repr(self.period_T),
            str(self.stable).lower(),
            repr(self.dominant_multiplier),
        ]


def _as_fraction(value: float, label: str) -> Fraction:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{label} must be finite and > 0, got {value!r}")
    frac = Fraction(repr(value))
    if frac.denominator > _MAX_DENOMINATOR:
        raise DomainError(
            f"no common period: {label}={value!r} has no short exact "
            "rational form"
        )
    return frac


def combined_period(tau1: float, tau2: float) -> float:
    """Least common multiple of two (rational) impulse periods, in days.

    For tau_i = p_i/q_i in lowest terms this is lcm(p1,p2)/gcd(q1,q2).
    Periods without a short exact decimal form are rejected ("no common
    period"): Floquet analysis needs a true joint period.
    """
    f1 = _as_fraction(tau1, "tau1")
    f2 = _as_fraction(tau2, "tau2")
    num = math.lcm(f1.numerator, f2.numerator)
    den = math.gcd(f1.denominator, f2.denominator)
    return num / den


def schedule_period(schedule: ImpulseSchedule) -> float:
    """The period over which the whole schedule repeats (days)."""
    if schedule.bio_active and schedule.chem_active:
        if schedule.tau1 == schedule.tau2:
            # identical periods share themselves; no rational form needed
            return float(schedule.tau1)
        return combined_period(schedule.tau1, schedule.tau2)
    if schedule.bio_active:
        return float(schedule.tau1)
    if schedule.chem_active:
        return float(schedule.tau2)
    raise DomainError("schedule has no active impulse train")


def _shared_period(schedule: ImpulseSchedule) -> float:
    if schedule.bio_active and schedule.chem_active:
        if schedule.tau1 != schedule.tau2:
            raise DomainError(
                "analytic multiplier formulas require tau1 == tau2 "
                f"(got {schedule.tau1!r} and {schedule.tau2!r})"
            )
        return float(schedule.tau1)
    return schedule_period(schedule)


def _control_integrals(params: ModelParameters, schedule: ImpulseSchedule):
    """Per-period integrals of the periodic control levels.

    int_0^tau v*(t) dt = v_i/gamma and int_0^tau s*(t) dt = s_i/mu; an
    inactive train contributes zero.
    """
    bio = schedule.v_i / params.gamma if schedule.bio_active else 0.0
    chem = schedule.s_i / params.mu if schedule.chem_active else 0.0
    return bio, chem


def growth_exponents(
    params: ModelParameters, schedule: ImpulseSchedule
) -> tuple[float, float]:
    """ln lambda2 and ln lambda3: per-period Floquet exponents of the two
    pest directions, for a schedule with a single shared period."""
    tau = _shared_period(schedule)
    p = params
    int_v, int_s = _control_integrals(params, schedule)
    ln2 = tau * (p.c1 * p.alpha * p.k - p.d) - p.lam * int_v - p.m1 * int_s
    ln3 = tau * (p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)) - p.m2 * int_s
    return ln2, ln3


def analytic_multipliers(
    params: ModelParameters, schedule: ImpulseSchedule
) -> tuple[float, float, float, float, float]:
    """Closed-form Floquet multipliers (lambda1..lambda5) for a shared period.

    lambda1 = e^{-r tau}, lambda4 = e^{-gamma tau}, lambda5 = e^{-mu tau};
    lambda2 and lambda3 exponentiate the per-period integrals of the
    linearized y- and z-equations at the pest-free orbit.  Raises DomainError
    when the two trains use distinct periods.
    """
    tau = _shared_period(schedule)
    ln2, ln3 = growth_exponents(params, schedule)
    return (
        math.exp(-params.r * tau),
        math.exp(ln2),
        math.exp(ln3),
        math.exp(-params.gamma * tau),
        math.exp(-params.mu * tau),
    )


def monodromy(
    params: ModelParameters,
    schedule: ImpulseSchedule,
    *,
    rtol: float = 1e-12,
    atol: float = 1e-18,
    h_init: float = 1e-2,
    h_max: float = 1.0,
    max_steps: int = 2_000_000,
) -> np.ndarray:
    """Fundamental matrix of the linearized flow over one combined period.

    Integrates dM/dt = A(t) M from the identity, where A is the Jacobian of
    the smooth dynamics along (k, 0, 0, v*(t), s*(t)).  The linearized jump
    map at impulse times is the identity (the impulse enters the reference
    orbit, not the perturbation), so M is continuous across events; the
    integration is merely split there because A has corners.

    Tight default tolerances keep small multipliers accurate in a relative
    sense.  Returns the 5x5 matrix; its eigenvalue moduli are the Floquet
    multipliers.
    """
    T = schedule_period(schedule)
    breaks = [
        ev.t for ev in impulse_calendar(schedule, (0.0, T)) if 0.0 < ev.t < T
    ]
    bounds = [0.0] + breaks + [T]

    p = params.as_tuple()
    if schedule.bio_active:
        tau1 = float(schedule.tau1)
        cv = schedule.v_i / (1.0 - math.exp(-params.gamma * tau1))
    else:
        tau1 = 0.0
        cv = 0.0
    if schedule.chem_active:
        tau2 = float(schedule.tau2)
        cs = schedule.s_i / (1.0 - math.exp(-params.mu * tau2))
    else:
        tau2 = 0.0
        cs = 0.0

    m = np.eye(5).ravel()
    h = h_init
    for a, b in zip(bounds[:-1], bounds[1:]):
        tb = math.floor(a / tau1 + 1e-9) * tau1 if schedule.bio_active else 0.0
        tsc = math.floor(a / tau2 + 1e-9) * tau2 if schedule.chem_active else 0.0
        m, _, _, _, h_last, status, t_fail = kernels.variational_segment(
            m, a, b, p, cv, tb, cs, tsc, rtol, atol, h, h_max, max_steps
        )
        if status != 0:
            raise IntegrationError(
                "monodromy integration failed (variational system)", t_fail
            )
        h = min(max(h_last, 1e-8), h_max)
    return m.reshape(5, 5)


def multiplier_moduli(matrix: np.ndarray) -> tuple[float, ...]:
    """Eigenvalue moduli of a monodromy matrix, sorted descending."""
    moduli = np.abs(np.linalg.eigvals(np.asarray(matrix, dtype=float)))
    return tuple(sorted((float(m) for m in moduli), reverse=True))


def _applicable_sets(schedule: ImpulseSchedule) -> list[str]:
    names: list[str] = []
    bio, chem = schedule.bio_active, schedule.chem_active
    if bio and chem and schedule.tau1 == schedule.tau2:
        names.append("same-interval")
    if bio and chem and schedule.tau1 != schedule.tau2:
        names.append("different-interval")
    if bio and (not chem or schedule.s_i == 0.0):
        names.append("bio-only")
    if chem and (not bio or schedule.v_i == 0.0):
        names.append("chem-only")
    return names


def check_conditions(
    params: ModelParameters,
    schedule: ImpulseSchedule,
    sets: Iterable[str] | None = None,
) -> dict[str, bool]:
    """Evaluate the sufficient stability condition sets for this schedule.

    Every condition is used in its period-integrated (Floquet-exponent) form;
    the crop-growth coupling term uses c1*alpha*k throughout for consistency
    with the linearized system.  With ``sets=None`` all applicable sets are
    evaluated; naming an inapplicable set raises DomainError.

    Sets:
      same-interval      both trains, tau1 == tau2 (two inequalities)
      different-interval both trains, tau1 != tau2 (three inequalities; the
                         z-direction one carries no chemical term, as stated)
      bio-only           bio train with no chemical control
      chem-only          chem train with no biological control
    """
    applicable = _applicable_sets(schedule)
    if sets is None:
        wanted = applicable
    else:
        wanted = list(sets)
        for name in wanted:
            if name not in _CONDITION_SETS:
                raise DomainError(f"unknown condition set {name!r}")
            if name not in applicable:
                raise DomainError(
                    f"condition set {name!r} is not applicable to this schedule"
                )

    p = params
    grow_y = p.c1 * p.alpha * p.k - p.d
    grow_z = p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)
    verdicts: dict[str, bool] = {}
    for name in wanted:
        if name == "same-interval":
            ln2, ln3 = growth_exponents(params, schedule)
            verdicts[name] = ln2 < 0.0 and ln3 < 0.0
        elif name == "different-interval":
            g1 = schedule.tau1 * grow_y - p.lam * schedule.v_i / p.gamma
            g2 = grow_z
            g3 = schedule.tau2 * grow_y - p.m1 * schedule.s_i / p.mu
            verdicts[name] = g1 < 0.0 and g2 < 0.0 and g3 < 0.0
        elif name == "bio-only":
            g1 = schedule.tau1 * grow_y - p.lam * schedule.v_i / p.gamma
            verdicts[name] = g1 < 0.0 and grow_z < 0.0
        else:  # chem-only
            g1 = schedule.tau2 * grow_y - p.m1 * schedule.s_i / p.mu
            g2 = schedule.tau2 * grow_z - p.m2 * schedule.s_i / p.mu
            verdicts[name] = g1 < 0.0 and g2 < 0.0
    return verdicts


def critical_period(
    params: ModelParameters,
    v_i: float,
    s_i: float,
    mode: str = "same-interval",
) -> float:
    """Largest shared impulse period that keeps the pest-free orbit stable.

    Bisects max(ln lambda2, ln lambda3) as a function of tau (both exponents
    are affine in tau, so the root is unique when it exists) to an absolute
    tolerance of 1e-8 days.  Returns math.inf when the orbit is stable for
    every period and 0.0 when it is unstable even as tau -> 0+.
    """
    if mode != "same-interval":
        raise DomainError(f"unsupported critical-period mode {mode!r}")
    if not (math.isfinite(v_i) and v_i >= 0.0 and math.isfinite(s_i) and s_i >= 0.0):
        raise DomainError("impulse strengths must be finite and >= 0")

    p = params
    slope2 = p.c1 * p.alpha * p.k - p.d
    slope3 = p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)
    drop2 = p.lam * v_i / p.gamma + p.m1 * s_i / p.mu
    drop3 = p.m2 * s_i / p.mu

    def g(tau: float) -> float:
        return max(slope2 * tau - drop2, slope3 * tau - drop3)

    if g(_TAU_HI) < 0.0:
        return math.inf
    if g(_TAU_LO) > 0.0:
        return 0.0
    lo, hi = _TAU_LO, _TAU_HI
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def analyze(
    params: ModelParameters,
    schedule: ImpulseSchedule,
    *,
    rtol: float = 1e-12,
    atol: float = 1e-18,
) -> StabilityReport:
    """Full stability report: period, multipliers, condition verdicts."""
    T = schedule_period(schedule)
    notes: list[str] = []
    try:
        analytic = analytic_multipliers(params, schedule)
    except DomainError:
        analytic = None
        notes.append(_NOTE_NO_ANALYTIC)
    matrix = monodromy(params, schedule, rtol=rtol, atol=atol)
    numeric = multiplier_moduli(matrix)
    verdicts = check_conditions(params, schedule)
    if "different-interval" in verdicts:
        notes.append(_NOTE_DIFFERENT_INTERVAL)
    dominant = max(numeric)
    return StabilityReport(
        period_T=T,
        analytic_multipliers=analytic,
        numeric_multipliers=numeric,
        condition_verdicts=verdicts,
        dominant_multiplier=dominant,
        stable=dominant < 1.0,
        notes=tuple(notes),
    )
