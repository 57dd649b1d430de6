"""Hybrid integration of the pest-management system.

Between scheduled impulse times the smooth part of the model is advanced with
an adaptive Dormand-Prince 5(4) pair; steps are clipped so none crosses an
impulse time, and at each impulse the discrete jump map is applied exactly.
Trajectories are right-continuous: the stored value at an impulse time is the
post-jump state, with the left limit kept in the event records.

The per-segment stepping itself lives in the numeric backend (compiled
extension or pure-Python twin); this module owns event scheduling, the dense
(continuous-extension) output, and CSV export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from ._backend import backend_name, kernels
from .errors import DomainError, IntegrationError
from .model import (
    ImpulseKind,
    ImpulseSchedule,
    ModelParameters,
    SystemState,
    apply_impulse,
)

__all__ = [
    "ImpulseEvent",
    "EventRecord",
    "SolverConfig",
    "SolverStats",
    "Trajectory",
    "impulse_calendar",
    "integrate",
    "integrate_rk4",
    "sample_dense",
]

_COMPONENTS = ("x", "y", "z", "v", "s")

# Interpolation weights of the Dormand-Prince continuous extension: the state
# at fraction theta through an accepted step is
#   y(t0 + theta*h) = y0 + h * sum_s k_s * (P[s,0]*theta + ... + P[s,3]*theta^4),
# a quartic matched to the pair's fifth-order result at theta=1.
_DENSE_P = np.array(
    [
        [
            1.0,
            -8048581381.0 / 2820520608.0,
            8663915743.0 / 2820520608.0,
            -12715105075.0 / 11282082432.0,
        ],
        [0.0, 0.0, 0.0, 0.0],
        [
            0.0,
            131558114200.0 / 32700410799.0,
            -68118460800.0 / 10900136933.0,
            87487479700.0 / 32700410799.0,
        ],
        [
            0.0,
            -1754552775.0 / 470086768.0,
            14199869525.0 / 1410260304.0,
            -10690763975.0 / 1880347072.0,
        ],
        [
            0.0,
            127303824393.0 / 49829197408.0,
            -318862633887.0 / 49829197408.0,
            701980252875.0 / 199316789632.0,
        ],
        [
            0.0,
            -282668133.0 / 205662961.0,
            2019193451.0 / 616988883.0,
            -1453857185.0 / 822651844.0,
        ],
        [
            0.0,
            40617522.0 / 29380423.0,
            -110615467.0 / 29380423.0,
            69997945.0 / 29380423.0,
        ],
    ]
)

_STATUS_MESSAGES = {
    1: "step size underflow (local error cannot be met)",
    2: "maximum step budget exhausted",
    3: "non-finite state encountered",
    4: "state component fell below -atol",
}


@dataclass(frozen=True)
class ImpulseEvent:
    """A scheduled impulse: application time and which control(s) fire."""

    t: float
    kind: ImpulseKind


@dataclass(frozen=True)
class EventRecord:
    """An applied impulse with the states on both sides of the jump."""

    t: float
    kind: ImpulseKind
    pre: SystemState
    post: SystemState


@dataclass(frozen=True)
class SolverConfig:
    """Adaptive-step solver settings.

    rtol/atol enter the per-component error scale atol + rtol*|y|; dense_dt is
    the spacing of the regular output samples; max_steps caps the total number
    of attempted steps across the whole run.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float = 1e-2
    h_max: float = 1.0
    dense_dt: float = 0.1
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise DomainError("rtol and atol must be positive")
        if not (self.h_init > 0.0 and self.h_max > 0.0):
            raise DomainError("h_init and h_max must be positive")
        if not self.dense_dt > 0.0:
            raise DomainError("dense_dt must be positive")
        if self.max_steps < 1:
            raise DomainError("max_steps must be at least 1")


@dataclass(frozen=True)
class SolverStats:
    """Bookkeeping from one integration run.

    error_accumulated holds the per-component sum of absolute local error
    estimates over all accepted steps (a pessimistic global-error gauge).
    clamps_beyond_atol is always 0 on a returned trajectory - larger
    violations abort the run instead.
    """

    steps_accepted: int
    steps_rejected: int
    rhs_evaluations: int
    clamps_within_atol: int
    clamps_beyond_atol: int
    error_accumulated: np.ndarray
    backend: str


def impulse_calendar(
    schedule: ImpulseSchedule, t_span: Sequence[float]
) -> list[ImpulseEvent]:
    """All impulse events with t0 <= t <= tf, in strictly increasing time.

    Each active train contributes times n*tau (n = 0,1,2,... by default,
    n = 1,2,... when the schedule suppresses the time-zero impulse).  Bio and
    chem times closer than 1e-9*max(tau1, tau2) are merged into one Both
    event at the earlier of the two times.
    """
    t0, tf = (float(t_span[0]), float(t_span[1]))
    if not (math.isfinite(t0) and math.isfinite(tf) and t0 < tf):
        raise DomainError("t_span must be finite with t0 < tf")

    def train(period: float | None) -> list[float]:
        if period is None:
            return []
        if period <= 0.0:
            raise DomainError("impulse period must be positive")
        n_first = 0 if schedule.first_impulse_at_zero else 1
        n_lo = max(n_first, math.ceil(t0 / period - 1e-9))
        n_hi = math.floor(tf / period + 1e-9)
        return [n * period for n in range(n_lo, n_hi + 1)]

    bio = train(schedule.tau1)
    chem = train(schedule.tau2)
    merge_tol = 1e-9 * max(schedule.tau1 or 0.0, schedule.tau2 or 0.0)

    events: list[ImpulseEvent] = []
    i = j = 0
    while i < len(bio) or j < len(chem):
        if i < len(bio) and j < len(chem) and abs(bio[i] - chem[j]) <= merge_tol:
            events.append(ImpulseEvent(min(bio[i], chem[j]), ImpulseKind.BOTH))
            i += 1
            j += 1
        elif j >= len(chem) or (i < len(bio) and bio[i] < chem[j]):
            events.append(ImpulseEvent(bio[i], ImpulseKind.BIO))
            i += 1
        else:
            events.append(ImpulseEvent(chem[j], ImpulseKind.CHEM))
            j += 1
    return events


class Trajectory:
    """An integrated hybrid trajectory with a continuous extension.

    ``times``/``states`` are the regular output samples (plus the event times
    and the endpoint); at an event time the stored sample is the post-impulse
    state and the left limit lives in ``events``.  ``state_at`` evaluates the
    solver's dense interpolant at arbitrary times in the span.
    """

    def __init__(
        self,
        params: ModelParameters,
        schedule: ImpulseSchedule,
        solver: SolverConfig,
        t0: float,
        tf: float,
        times: np.ndarray,
        states: np.ndarray,
        events: tuple[EventRecord, ...],
        stats: SolverStats,
        step_t: np.ndarray,
        step_h: np.ndarray,
        step_y: np.ndarray,
        step_k: np.ndarray,
        final_state: SystemState,
    ) -> None:
        self.params = params
        self.schedule = schedule
        self.solver = solver
        self.t0 = t0
        self.tf = tf
        self.times = times
        self.states = states
        self.events = events
        self.stats = stats
        self._step_t = step_t
        self._step_h = step_h
        self._step_y = step_y
        self._step_k = step_k
        self._final_state = final_state

    @property
    def samples(self) -> list[tuple[float, SystemState]]:
        """The output samples as (time, state) pairs."""
        return [
            (float(t), SystemState.from_iterable(row))
            for t, row in zip(self.times, self.states)
        ]

    @property
    def final_state(self) -> SystemState:
        """State at the right endpoint (post-impulse if an event falls there)."""
        return self._final_state

    def component(self, name: str) -> np.ndarray:
        """Sampled values of one state component ('x', 'y', 'z', 'v' or 's')."""
        try:
            idx = _COMPONENTS.index(name)
        except ValueError:
            raise DomainError(f"unknown component {name!r}") from None
        return self.states[:, idx]

    def _dense_state(self, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self._step_t, t, side="right")) - 1
        if idx < 0:
            idx = 0
        last = len(self._step_t) - 1
        if idx > last:
            idx = last
        h = self._step_h[idx]
        theta = (t - self._step_t[idx]) / h
        powers = np.array([theta, theta * theta, theta**3, theta**4])
        weights = _DENSE_P @ powers
        return self._step_y[idx] + h * (self._step_k[idx].T @ weights)

    def state_at(self, t: float) -> SystemState:
        """Dense-output state at time t (post-impulse at event times)."""
        t = float(t)
        if not (self.t0 <= t <= self.tf):
            raise DomainError(f"time {t!r} outside trajectory span")
        if t == self.tf:
            return self._final_state
        values = self._dense_state(t)
        return SystemState.from_iterable(np.maximum(values, 0.0))

    def to_csv(self, target: Union[str, Path, IO[str]]) -> None:
        """Write the samples as CSV.

        Header ``t,x,y,z,v,s,event``; at an event time two consecutive rows
        share t - the pre-impulse row carries the event tag, the post-impulse
        row follows untagged.
        """
        if hasattr(target, "write"):
            self._write_csv(target)  # type: ignore[arg-type]
        else:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh: IO[str]) -> None:
        by_time = {rec.t: rec for rec in self.events}
        fh.write("t,x,y,z,v,s,event\n")
        for t, row in zip(self.times, self.states):
            t = float(t)
            rec = by_time.get(t)
            if rec is not None:
                fh.write(_csv_row(t, rec.pre.as_tuple(), rec.kind.value))
                fh.write(_csv_row(t, rec.post.as_tuple(), ""))
            else:
                fh.write(_csv_row(t, tuple(row), ""))


def _csv_row(t: float, values: Iterable[float], tag: str) -> str:
    cells = [repr(float(t))] + [repr(float(v)) for v in values] + [tag]
    return ",".join(cells) + "\n"


def sample_dense(traj: Trajectory, times: Iterable[float]) -> list[SystemState]:
    """States at the given times via the trajectory's continuous extension."""
    return [traj.state_at(t) for t in times]


def _split_span(
    schedule: ImpulseSchedule, t0: float, tf: float
) -> tuple[list[ImpulseEvent], list[ImpulseEvent]]:
    """Calendar split into events applied at t0 and events after t0."""
    calendar = impulse_calendar(schedule, (t0, tf))
    at_start = [ev for ev in calendar if ev.t <= t0]
    after = [ev for ev in calendar if ev.t > t0]
    return at_start, after


def integrate(
    params: ModelParameters,
    schedule: ImpulseSchedule,
    initial: SystemState,
    t_span: Sequence[float],
    solver: SolverConfig | None = None,
) -> Trajectory:
    """Integrate the hybrid system over t_span.

    Impulses scheduled exactly at t0 are applied before any flow; an impulse
    at tf is applied after the final flow segment, so the returned final state
    is always the right-continuous value.  Raises IntegrationError (carrying
    the failure time) if stepping breaks down.
    """
    if solver is None:
        solver = SolverConfig()
    t0, tf = (float(t_span[0]), float(t_span[1]))
    if not (math.isfinite(t0) and math.isfinite(tf) and t0 < tf):
        raise DomainError("t_span must be finite with t0 < tf")

    p = params.as_tuple()
    at_start, upcoming = _split_span(schedule, t0, tf)

    records: list[EventRecord] = []
    state = initial
    for ev in at_start:
        post = apply_impulse(state, ev.kind, schedule)
        records.append(EventRecord(ev.t, ev.kind, state, post))
        state = post

    step_t: list[np.ndarray] = []
    step_h: list[np.ndarray] = []
    step_y: list[np.ndarray] = []
    step_k: list[np.ndarray] = []
    naccept = nreject = nfev = nclamp = 0
    err_accum = np.zeros(5)
    h_next = min(solver.h_init, solver.h_max)

    def flow(y: SystemState, a: float, b: float) -> SystemState:
        nonlocal naccept, nreject, nfev, nclamp, err_accum, h_next
        budget = solver.max_steps - (naccept + nreject)
        if budget <= 0:
            raise IntegrationError(_STATUS_MESSAGES[2], a)
        (ts, hs, ys, ks, acc, rej, fev, clamp, errs, h_last, status, t_fail) = (
            kernels.integrate_segment(
                y.as_tuple(), a, b, p, solver.rtol, solver.atol,
                h_next, solver.h_max, budget,
            )
        )
        naccept += acc
        nreject += rej
        nfev += fev
        nclamp += clamp
        err_accum += errs
        h_next = min(max(h_last, 1e-8), solver.h_max)
        if status != 0:
            raise IntegrationError(_STATUS_MESSAGES[status], t_fail)
        if acc:
            step_t.append(ts)
            step_h.append(hs)
            step_y.append(ys[:-1])
            step_k.append(ks)
        return SystemState.from_iterable(ys[-1])

    t = t0
    for ev in upcoming:
        state = flow(state, t, ev.t)
        post = apply_impulse(state, ev.kind, schedule)
        records.append(EventRecord(ev.t, ev.kind, state, post))
        state = post
        t = ev.t
    if t < tf:
        state = flow(state, t, tf)

    stats = SolverStats(
        steps_accepted=naccept,
        steps_rejected=nreject,
        rhs_evaluations=nfev,
        clamps_within_atol=nclamp,
        clamps_beyond_atol=0,
        error_accumulated=err_accum,
        backend=backend_name(),
    )

    all_t = np.concatenate(step_t) if step_t else np.array([t0])
    all_h = np.concatenate(step_h) if step_h else np.array([tf - t0])
    all_y = (
        np.concatenate(step_y)
        if step_y
        else np.array([state.as_tuple()])
    )
    all_k = np.concatenate(step_k) if step_k else np.zeros((1, 7, 5))

    traj = Trajectory(
        params=params,
        schedule=schedule,
        solver=solver,
        t0=t0,
        tf=tf,
        times=np.array([]),
        states=np.zeros((0, 5)),
        events=tuple(records),
        stats=stats,
        step_t=all_t,
        step_h=all_h,
        step_y=all_y,
        step_k=all_k,
        final_state=state,
    )
    times, states = _build_samples(traj, solver.dense_dt)
    traj.times = times
    traj.states = states
    return traj


def _build_samples(traj: Trajectory, dense_dt: float) -> tuple[np.ndarray, np.ndarray]:
    t0, tf = traj.t0, traj.tf
    n = int(math.floor((tf - t0) / dense_dt + 1e-9))
    grid = t0 + dense_dt * np.arange(n + 1)
    special = np.unique(
        np.array([rec.t for rec in traj.events] + [t0, tf], dtype=float)
    )
    tol = 1e-9 * max(1.0, dense_dt)
    keep = np.ones(len(grid), dtype=bool)
    for i, g in enumerate(grid):
        j = np.searchsorted(special, g)
        near = []
        if j < len(special):
            near.append(abs(special[j] - g))
        if j > 0:
            near.append(abs(special[j - 1] - g))
        if near and min(near) <= tol:
            keep[i] = False
    times = np.unique(np.concatenate([grid[keep], special]))
    states = np.empty((len(times), 5))
    for i, t in enumerate(times):
        states[i] = traj.state_at(float(t)).as_array()
    return times, states


def integrate_rk4(
    params: ModelParameters,
    schedule: ImpulseSchedule,
    initial: SystemState,
    t_span: Sequence[float],
    h: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step classical RK4 reference run.

    Uses the same event calendar and jump maps as :func:`integrate` but a
    non-adaptive fourth-order stepper between events (the step is shrunk per
    segment to divide it exactly).  Returns (times, states) at the segment
    boundaries - t0, every event time (post-impulse) and tf - for use as an
    independent oracle.
    """
    if h <= 0.0:
        raise DomainError("step size must be positive")
    t0, tf = (float(t_span[0]), float(t_span[1]))
    if not (math.isfinite(t0) and math.isfinite(tf) and t0 < tf):
        raise DomainError("t_span must be finite with t0 < tf")
    p = params.as_tuple()
    at_start, upcoming = _split_span(schedule, t0, tf)

    state = initial
    for ev in at_start:
        state = apply_impulse(state, ev.kind, schedule)

    times = [t0]
    states = [state.as_tuple()]
    t = t0
    for ev in upcoming:
        y, _ = kernels.rk4_segment(state.as_tuple(), t, ev.t, h, p)
        state = SystemState.from_iterable(np.maximum(y, 0.0))
        state = apply_impulse(state, ev.kind, schedule)
        t = ev.t
        times.append(t)
        states.append(state.as_tuple())
    if t < tf:
        y, _ = kernels.rk4_segment(state.as_tuple(), t, tf, h, p)
        state = SystemState.from_iterable(np.maximum(y, 0.0))
        times.append(tf)
        states.append(state.as_tuple())
    return np.array(times), np.array(states)
