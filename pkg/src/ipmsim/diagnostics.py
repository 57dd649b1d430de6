"""Post-hoc verification of theoretical guarantees on computed trajectories.

Checks a trajectory against the model's proved properties: the uniform
biomass bound, non-negativity, convergence to the pest-free periodic orbit,
and (practical) pest extinction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Mapping, Union

import numpy as np

from .errors import DomainError
from .integrator import Trajectory
from .model import ImpulseSchedule, ModelParameters, analytic_periodic_bio, analytic_periodic_chem
from .stability import schedule_period

__all__ = ["DiagnosticsReport", "theoretical_bound", "verify_trajectory"]

_COMPONENTS = ("x", "y", "z", "v", "s")


@dataclass(frozen=True)
class DiagnosticsReport:
    """Observed-versus-guaranteed summary for one trajectory.

    convergence_sup holds per-component sup-distances to (k, 0, 0, v*, s*)
    over the trailing window, or None when the run is too short to measure.
    extinction_times maps 'y'/'z' to the first time the component drops below
    the threshold and stays below it for a full sustain window (None if that
    never happens within the run).
    """

    bound_M: float
    max_observed: tuple[float, ...]
    nonneg_ok: bool
    convergence_sup: tuple[float, ...] | None
    extinction_times: Mapping[str, float | None]
    extinction_threshold: float
    trailing_window: float | None

    def to_text(self) -> str:
        """Flat key-value block, same shape as the stability report."""
        lines = [
            f"bound_M = {self.bound_M!r}",
            "max_observed = " + ",".join(repr(m) for m in self.max_observed),
            f"nonneg_ok = {str(self.nonneg_ok).lower()}",
        ]
        if self.convergence_sup is None:
            lines.append("convergence_sup = unavailable")
        else:
            lines.append(
                "convergence_sup = " + ",".join(repr(m) for m in self.convergence_sup)
            )
        for name in ("y", "z"):
            value = self.extinction_times.get(name)
            text = "none" if value is None else repr(value)
            lines.append(f"extinction_time.{name} = {text}")
        lines.append(f"extinction_threshold = {self.extinction_threshold!r}")
        if self.trailing_window is not None:
            lines.append(f"trailing_window = {self.trailing_window!r}")
        return "\n".join(lines) + "\n"

    def write(self, target: Union[str, IO[str]]) -> None:
        if hasattr(target, "write"):
            target.write(self.to_text())  # type: ignore[union-attr]
        else:
            with open(target, "w", encoding="utf-8") as fh:
                fh.write(self.to_text())


def theoretical_bound(params: ModelParameters, schedule: ImpulseSchedule) -> float:
    """Asymptotic upper bound on every state component.

    With m = min(d, gamma, mu, (d+delta)(1-theta)) and M0 = k(m+r)^2/(4r),
    the total biomass V = x+y+z+v+s eventually stays below
    M0/m + strength * e^{m tau}/(e^{m tau} - 1), evaluated per active impulse
    train with its own strength and period, taking the larger value.
    """
    if params.theta >= 1.0:
        raise DomainError("bound undefined for theta >= 1")
    m = params.decay_floor
    m0 = params.k * (m + params.r) ** 2 / (4.0 * params.r)
    bound = m0 / m

    def pulse_term(strength: float, tau: float) -> float:
        e = math.exp(m * tau)
        return strength * e / (e - 1.0)

    extra = 0.0
    if schedule.bio_active:
        extra = max(extra, pulse_term(schedule.v_i, float(schedule.tau1)))
    if schedule.chem_active:
        extra = max(extra, pulse_term(schedule.s_i, float(schedule.tau2)))
    return bound + extra


def _first_sustained_below(
    times: np.ndarray, values: np.ndarray, threshold: float, window: float
) -> float | None:
    """First time `values < threshold` holds for a full `window`, else None."""
    below = values < threshold
    n = len(times)
    i = 0
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        # run i..j inclusive
        if times[i] + window <= times[j] + 1e-12 * max(1.0, abs(times[j])):
            return float(times[i])
        i = j + 1
    return None


def verify_trajectory(
    traj: Trajectory,
    params: ModelParameters | None = None,
    schedule: ImpulseSchedule | None = None,
    *,
    extinction_threshold: float = 1e-6,
    trailing_periods: int = 5,
) -> DiagnosticsReport:
    """Measure a trajectory against the theoretical guarantees.

    Convergence distances are taken over the last `trailing_periods` combined
    periods and reported as None when the run is shorter than that.  The
    extinction detector requires the component to stay below the threshold
    for one combined period (or a tenth of the span when the schedule has no
    active train).
    """
    params = params if params is not None else traj.params
    schedule = schedule if schedule is not None else traj.schedule

    times = traj.times
    states = traj.states
    span = traj.tf - traj.t0

    try:
        period = schedule_period(schedule)
    except DomainError:
        period = None

    bound = theoretical_bound(params, schedule)
    max_observed = tuple(float(v) for v in states.max(axis=0))
    nonneg_ok = (
        bool((states >= -traj.solver.atol).all())
        and traj.stats.clamps_beyond_atol == 0
    )

    window = period if period is not None else span / 10.0
    extinction: dict[str, float | None] = {}
    for name, col in (("y", 1), ("z", 2)):
        extinction[name] = _first_sustained_below(
            times, states[:, col], extinction_threshold, window
        )

    convergence: tuple[float, ...] | None = None
    trailing: float | None = None
    if period is not None and span >= trailing_periods * period:
        trailing = trailing_periods * period
        start = traj.tf - trailing
        mask = times >= start
        sel_t = times[mask]
        sel = states[mask]
        if schedule.bio_active:
            v_ref = np.array(
                [analytic_periodic_bio(float(t), schedule, params) for t in sel_t]
            )
        else:
            v_ref = np.zeros(len(sel_t))
        if schedule.chem_active:
            s_ref = np.array(
                [analytic_periodic_chem(float(t), schedule, params) for t in sel_t]
            )
        else:
            s_ref = np.zeros(len(sel_t))
        convergence = (
            float(np.max(np.abs(sel[:, 0] - params.k))),
            float(np.max(sel[:, 1])),
            float(np.max(sel[:, 2])),
            float(np.max(np.abs(sel[:, 3] - v_ref))),
            float(np.max(np.abs(sel[:, 4] - s_ref))),
        )

    return DiagnosticsReport(
        bound_M=bound,
        max_observed=max_observed,
        nonneg_ok=nonneg_ok,
        convergence_sup=convergence,
        extinction_times=extinction,
        extinction_threshold=extinction_threshold,
        trailing_window=trailing,
    )
