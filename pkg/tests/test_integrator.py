"""Integrator tests: the impulse calendar, hybrid trajectories, dense output,
CSV serialization, error control, and the fixed-step cross-check."""

import io
import math

import numpy as np
import pytest

from ipmsim import (
    DomainError,
    ImpulseKind,
    ImpulseSchedule,
    IntegrationError,
    SolverConfig,
    SystemState,
    analytic_periodic_bio,
    analytic_periodic_chem,
    default_parameters,
    impulse_calendar,
    integrate,
    integrate_rk4,
    sample_dense,
)


def _calendar_tuples(schedule, span):
    return [(ev.t, ev.kind) for ev in impulse_calendar(schedule, span)]


class TestImpulseCalendar:
    def test_shared_grid_merges_to_both(self):
        schedule = ImpulseSchedule(tau1=2.0, tau2=3.0, v_i=1.0, s_i=1.0)
        cal = _calendar_tuples(schedule, (0.0, 18.0))
        both = [t for t, kind in cal if kind is ImpulseKind.BOTH]
        bio = [t for t, kind in cal if kind is ImpulseKind.BIO]
        chem = [t for t, kind in cal if kind is ImpulseKind.CHEM]
        assert both == [0.0, 6.0, 12.0, 18.0]
        assert bio == [2.0, 4.0, 8.0, 10.0, 14.0, 16.0]
        assert chem == [3.0, 9.0, 15.0]

    def test_skip_time_zero_sequence(self):
        # tau1=3, tau2=2, first impulse suppressed at t=0: the window (0, 12]
        # fires chem,bio,chem,both,chem,bio,chem,both.
        schedule = ImpulseSchedule(
            tau1=3.0, tau2=2.0, v_i=1.0, s_i=1.0, first_impulse_at_zero=False
        )
        cal = _calendar_tuples(schedule, (0.0, 12.0))
        assert cal == [
            (2.0, ImpulseKind.CHEM),
            (3.0, ImpulseKind.BIO),
            (4.0, ImpulseKind.CHEM),
            (6.0, ImpulseKind.BOTH),
            (8.0, ImpulseKind.CHEM),
            (9.0, ImpulseKind.BIO),
            (10.0, ImpulseKind.CHEM),
            (12.0, ImpulseKind.BOTH),
        ]

    def test_single_train_and_offset_window(self):
        schedule = ImpulseSchedule(tau1=2.0, v_i=1.0)
        cal = _calendar_tuples(schedule, (3.5, 10.0))
        assert cal == [
            (4.0, ImpulseKind.BIO),
            (6.0, ImpulseKind.BIO),
            (8.0, ImpulseKind.BIO),
            (10.0, ImpulseKind.BIO),
        ]

    def test_empty_when_no_train_active(self):
        assert impulse_calendar(ImpulseSchedule(), (0.0, 10.0)) == []

    def test_times_strictly_increase(self, rng):
        for _ in range(20):
            schedule = ImpulseSchedule(
                tau1=float(rng.uniform(0.5, 4.0)),
                tau2=float(rng.uniform(0.5, 4.0)),
                v_i=1.0,
                s_i=1.0,
            )
            cal = impulse_calendar(schedule, (0.0, 40.0))
            times = [ev.t for ev in cal]
            assert times == sorted(times)
            assert len(set(times)) == len(times)

    def test_bad_span_rejected(self):
        schedule = ImpulseSchedule(tau1=1.0, v_i=1.0)
        with pytest.raises(DomainError):
            impulse_calendar(schedule, (5.0, 5.0))
        with pytest.raises(DomainError):
            impulse_calendar(schedule, (0.0, float("inf")))


class TestSolverConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rtol": 0.0},
            {"atol": -1e-10},
            {"h_init": 0.0},
            {"dense_dt": 0.0},
            {"max_steps": 0},
        ],
    )
    def test_invalid_settings_rejected(self, kwargs):
        with pytest.raises(DomainError):
            SolverConfig(**kwargs)


class TestTrajectoryBasics:
    def test_equilibrium_is_constant(self):
        params = default_parameters()
        traj = integrate(
            params,
            ImpulseSchedule(),
            SystemState(params.k, 0, 0, 0, 0),
            (0.0, 50.0),
        )
        assert np.max(np.abs(traj.states[:, 0] - params.k)) < 1e-12
        assert np.max(np.abs(traj.states[:, 1:])) == 0.0

    def test_chemical_decays_exponentially(self):
        params = default_parameters()
        traj = integrate(
            params,
            ImpulseSchedule(),
            SystemState(params.k, 0, 0, 0, 0.7),
            (0.0, 30.0),
        )
        expected = 0.7 * np.exp(-params.mu * traj.times)
        assert np.max(np.abs(traj.component("s") - expected)) < 1e-7

    def test_sample_times_strictly_increase(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=3.0, v_i=6.0, s_i=0.15)
        traj = integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 31.0)
        )
        assert np.all(np.diff(traj.times) > 0.0)

    def test_event_records_jump_exactly_by_strength(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=3.0, v_i=6.0, s_i=0.15)
        traj = integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 31.0)
        )
        jumps = {
            ImpulseKind.BIO: (6.0, 0.0),
            ImpulseKind.CHEM: (0.0, 0.15),
            ImpulseKind.BOTH: (6.0, 0.15),
        }
        assert traj.events  # the schedule fires inside the span
        for rec in traj.events:
            dv, ds = jumps[rec.kind]
            # x, y, z never jump; v and s gain exactly the computed sum
            assert rec.post.x == rec.pre.x
            assert rec.post.y == rec.pre.y
            assert rec.post.z == rec.pre.z
            assert rec.post.v == rec.pre.v + dv
            assert rec.post.s == rec.pre.s + ds

    def test_sample_at_event_time_is_post_impulse(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, v_i=6.0)
        traj = integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 20.0)
        )
        by_time = dict(zip(traj.times, traj.states[:, 3]))
        for rec in traj.events:
            assert by_time[rec.t] == rec.post.v
            assert traj.state_at(rec.t).v == pytest.approx(rec.post.v, rel=1e-12)

    def test_first_impulse_can_be_suppressed(self):
        params = default_parameters()
        schedule = ImpulseSchedule(
            tau1=5.0, v_i=6.0, first_impulse_at_zero=False
        )
        traj = integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 10.0)
        )
        assert [rec.t for rec in traj.events] == [5.0, 10.0]
        assert traj.states[0, 3] == 0.0  # no jump applied at t=0

    def test_unknown_component_rejected(self):
        params = default_parameters()
        traj = integrate(
            params, ImpulseSchedule(), SystemState(1, 0, 0, 0, 0), (0.0, 1.0)
        )
        with pytest.raises(DomainError):
            traj.component("w")

    def test_bad_span_rejected(self):
        params = default_parameters()
        with pytest.raises(DomainError):
            integrate(
                params, ImpulseSchedule(), SystemState(1, 0, 0, 0, 0), (2.0, 2.0)
            )


class TestDenseOutput:
    def _periodic_run(self):
        # Starting on the pre-impulse periodic level makes v and s follow
        # their closed-form sawtooth orbits exactly (y = z = 0 keeps the
        # controls uncoupled), so the dense output has an analytic target.
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.15)
        v_pre = analytic_periodic_bio(5.0 - 1e-14, schedule, params)
        s_pre = analytic_periodic_chem(5.0 - 1e-14, schedule, params)
        initial = SystemState(params.k, 0.0, 0.0, v_pre, s_pre)
        traj = integrate(params, schedule, initial, (0.0, 25.0))
        return params, schedule, traj

    def test_matches_closed_form_between_impulses(self, rng):
        params, schedule, traj = self._periodic_run()
        probes = rng.uniform(0.0, 25.0, size=200)
        for t in probes:
            state = traj.state_at(float(t))
            assert state.v == pytest.approx(
                analytic_periodic_bio(float(t), schedule, params), rel=1e-7
            )
            assert state.s == pytest.approx(
                analytic_periodic_chem(float(t), schedule, params), rel=1e-7
            )

    def test_endpoint_and_out_of_span(self):
        params, schedule, traj = self._periodic_run()
        assert traj.state_at(25.0) == traj.final_state
        with pytest.raises(DomainError):
            traj.state_at(-0.5)
        with pytest.raises(DomainError):
            traj.state_at(25.0 + 1e-9)

    def test_sample_dense_matches_state_at(self):
        params, schedule, traj = self._periodic_run()
        times = [0.3, 7.75, 11.0, 24.9]
        states = sample_dense(traj, times)
        for t, state in zip(times, states):
            assert state == traj.state_at(t)

    def test_agrees_with_stored_samples(self):
        params, schedule, traj = self._periodic_run()
        for t, row in zip(traj.times, traj.states):
            if any(rec.t == t for rec in traj.events):
                continue
            dense = traj.state_at(float(t)).as_array()
            assert np.max(np.abs(dense - row)) < 1e-12


class TestCsvOutput:
    def _run(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=3.0, v_i=6.0, s_i=0.15)
        return integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 16.0)
        )

    def test_header_and_event_row_pairs(self):
        traj = self._run()
        buf = io.StringIO()
        traj.to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,x,y,z,v,s,event"
        tagged = [ln for ln in lines[1:] if ln.split(",")[6] != ""]
        assert len(tagged) == len(traj.events)
        for ln in tagged:
            cells = ln.split(",")
            assert cells[6] in ("bio", "chem", "both")
            # the tagged (pre) row is followed by an untagged row at the same t
            follower = lines[lines.index(ln) + 1].split(",")
            assert follower[0] == cells[0]
            assert follower[6] == ""

    def test_event_rows_carry_pre_then_post_values(self):
        traj = self._run()
        buf = io.StringIO()
        traj.to_csv(buf)
        lines = buf.getvalue().splitlines()[1:]
        for rec in traj.events:
            t_repr = repr(rec.t)
            pair = [ln for ln in lines if ln.split(",")[0] == t_repr]
            assert len(pair) == 2
            pre_cells = pair[0].split(",")
            post_cells = pair[1].split(",")
            assert pre_cells[6] == rec.kind.value
            assert [float(c) for c in pre_cells[1:6]] == list(rec.pre.as_tuple())
            assert [float(c) for c in post_cells[1:6]] == list(rec.post.as_tuple())

    def test_byte_determinism_across_runs(self):
        first = io.StringIO()
        second = io.StringIO()
        self._run().to_csv(first)
        self._run().to_csv(second)
        assert first.getvalue() == second.getvalue()


class TestErrorControl:
    def test_tolerance_refinement_converges(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.15)
        initial = SystemState(0.5, 0.5, 0.2, 0, 0)
        span = (0.0, 60.0)
        finals = {}
        gauges = {}
        for rtol, atol in ((1e-6, 1e-8), (1e-8, 1e-10), (1e-10, 1e-12)):
            traj = integrate(
                params, schedule, initial, span,
                SolverConfig(rtol=rtol, atol=atol),
            )
            finals[rtol] = np.array(traj.final_state.as_tuple())
            gauges[rtol] = traj.stats.error_accumulated
        d_coarse = np.abs(finals[1e-6] - finals[1e-8])
        d_fine = np.abs(finals[1e-8] - finals[1e-10])
        # the accumulated local-error gauge bounds the realized drift ...
        assert np.all(d_coarse <= gauges[1e-6])
        assert np.all(d_fine <= gauges[1e-8])
        # ... and tightening tolerances 100x shrinks the drift >= 10x
        assert d_fine.max() < 0.1 * d_coarse.max()

    def test_step_budget_exhaustion_raises(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, v_i=6.0)
        with pytest.raises(IntegrationError) as excinfo:
            integrate(
                params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0),
                (0.0, 100.0), SolverConfig(max_steps=10),
            )
        assert 0.0 <= excinfo.value.t_fail <= 100.0

    def test_stats_are_populated(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, v_i=6.0)
        traj = integrate(
            params, schedule, SystemState(0.5, 0.5, 0.2, 0, 0), (0.0, 20.0)
        )
        stats = traj.stats
        assert stats.steps_accepted > 0
        assert stats.rhs_evaluations > stats.steps_accepted
        assert stats.clamps_beyond_atol == 0
        assert stats.backend in ("compiled", "python")
        assert stats.error_accumulated.shape == (5,)
        assert np.all(stats.error_accumulated >= 0.0)


class TestFixedStepCrossCheck:
    def test_rk4_matches_adaptive_at_boundaries(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=3.0, v_i=6.0, s_i=0.15)
        initial = SystemState(0.5, 0.5, 0.2, 0, 0)
        span = (0.0, 20.0)
        traj = integrate(params, schedule, initial, span)
        times, states = integrate_rk4(params, schedule, initial, span, h=1e-3)
        assert times[0] == 0.0 and times[-1] == 20.0
        for t, row in zip(times, states):
            reference = traj.state_at(float(t)).as_array()
            assert np.max(np.abs(np.asarray(row) - reference)) < 1e-6

    def test_rk4_step_count_honors_requested_h(self):
        params = default_parameters()
        times, states = integrate_rk4(
            params, ImpulseSchedule(), SystemState(1, 0, 0, 0, 0),
            (0.0, 1.0), h=0.3,
        )
        # single flow segment: boundary times only
        assert list(times) == [0.0, 1.0]
