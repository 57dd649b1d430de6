"""Stability-analysis tests: period arithmetic, closed-form Floquet
multipliers, the numeric monodromy matrix, sufficient-condition sets, and the
critical shared period."""

import math

import numpy as np
import pytest

from ipmsim import (
    DomainError,
    ImpulseSchedule,
    ModelParameters,
    analytic_multipliers,
    analyze,
    check_conditions,
    combined_period,
    critical_period,
    default_parameters,
    growth_exponents,
    monodromy,
    multiplier_moduli,
    schedule_period,
)
from conftest import draw_same_interval_case, random_parameters


class TestPeriods:
    @pytest.mark.parametrize(
        "tau1,tau2,expected",
        [
            (2.0, 3.0, 6.0),
            (5.0, 5.0, 5.0),
            (0.5, 0.75, 1.5),
            (0.1, 0.25, 0.5),
            (3.0, 2.0, 6.0),
        ],
    )
    def test_combined_period(self, tau1, tau2, expected):
        assert combined_period(tau1, tau2) == expected

    def test_irrational_ratio_rejected(self):
        # 1/3 has no short exact decimal form, so there is no usable joint
        # period with tau2 = 1
        with pytest.raises(DomainError):
            combined_period(1.0 / 3.0, 1.0)

    def test_nonpositive_period_rejected(self):
        with pytest.raises(DomainError):
            combined_period(-2.0, 3.0)

    def test_schedule_period_shapes(self):
        assert schedule_period(ImpulseSchedule(tau1=7.0, v_i=1.0)) == 7.0
        assert schedule_period(ImpulseSchedule(tau2=4.0, s_i=1.0)) == 4.0
        assert schedule_period(
            ImpulseSchedule(tau1=3.0, tau2=2.0, v_i=1.0, s_i=1.0)
        ) == 6.0
        with pytest.raises(DomainError):
            schedule_period(ImpulseSchedule())


class TestAnalyticMultipliers:
    def test_pinned_values_shared_period(self):
        # default parameters, tau = 5, v_i = 6, s_i = 0.1
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        ln2, ln3 = growth_exponents(params, schedule)
        assert ln2 == pytest.approx(-14.016666666666667, rel=1e-13)
        assert ln3 == pytest.approx(-1.37, rel=1e-13)
        lams = analytic_multipliers(params, schedule)
        assert lams[0] == pytest.approx(0.6065306597126334, rel=1e-14)
        assert lams[1] == pytest.approx(8.177847582712133e-07, rel=1e-12)
        assert lams[2] == pytest.approx(math.exp(-1.37), rel=1e-12)
        assert lams[3] == pytest.approx(math.exp(-0.75), rel=1e-14)
        assert lams[4] == pytest.approx(math.exp(-1.5), rel=1e-14)

    def test_zero_strength_reduces_to_growth_rates(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=0.0, s_i=0.0)
        ln2, ln3 = growth_exponents(params, schedule)
        p = params
        assert ln2 == pytest.approx(5.0 * (p.c1 * p.alpha * p.k - p.d), rel=1e-13)
        assert ln3 == pytest.approx(
            5.0 * (p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)), rel=1e-13
        )

    def test_distinct_periods_rejected(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=3.0, v_i=6.0, s_i=0.1)
        with pytest.raises(DomainError):
            analytic_multipliers(params, schedule)

    def test_single_train_drops_other_control_term(self):
        params = default_parameters()
        bio_only = ImpulseSchedule(tau1=5.0, v_i=6.0)
        ln2, ln3 = growth_exponents(params, bio_only)
        p = params
        assert ln2 == pytest.approx(
            5.0 * (p.c1 * p.alpha * p.k - p.d) - p.lam * 6.0 / p.gamma, rel=1e-13
        )
        # no chemical train: ln3 has no kill term
        assert ln3 == pytest.approx(
            5.0 * (p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)), rel=1e-13
        )


class TestMonodromy:
    def test_constant_coefficient_case(self):
        # With zero impulse strengths the variational matrix is constant and
        # every multiplier is a plain matrix exponential of a diagonal entry.
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=2.0, tau2=2.0, v_i=0.0, s_i=0.0)
        p = params
        expected = sorted(
            (
                math.exp(-2.0 * p.r),
                math.exp(2.0 * (p.c1 * p.alpha * p.k - p.d)),
                math.exp(2.0 * (p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta))),
                math.exp(-2.0 * p.gamma),
                math.exp(-2.0 * p.mu),
            ),
            reverse=True,
        )
        numeric = multiplier_moduli(monodromy(params, schedule))
        assert numeric == pytest.approx(expected, rel=1e-9)

    def test_matches_closed_forms_with_controls(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        numeric = multiplier_moduli(monodromy(params, schedule))
        expected = sorted(analytic_multipliers(params, schedule), reverse=True)
        for got, want in zip(numeric, expected):
            assert got == pytest.approx(want, rel=1e-9)

    def test_structural_zeros_and_decoupled_entries(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        m = monodromy(params, schedule)
        # a crop perturbation never reaches the other components ...
        assert np.all(m[1:, 0] == 0.0)
        # ... and v/s perturbations decay autonomously
        assert np.all(m[[0, 1, 2, 4], 3] == 0.0)
        assert np.all(m[0:4, 4] == 0.0)
        assert m[0, 0] == pytest.approx(math.exp(-5.0 * params.r), rel=1e-10)
        assert m[3, 3] == pytest.approx(math.exp(-5.0 * params.gamma), rel=1e-10)
        assert m[4, 4] == pytest.approx(math.exp(-5.0 * params.mu), rel=1e-10)
        # infection transfer makes a y perturbation feed the z direction
        assert m[2, 1] > 0.0

    def test_random_cases_agree_with_analytic(self, rng):
        for _ in range(3):
            params, schedule = draw_same_interval_case(rng)
            numeric = multiplier_moduli(monodromy(params, schedule))
            expected = sorted(analytic_multipliers(params, schedule), reverse=True)
            for got, want in zip(numeric, expected):
                assert got == pytest.approx(want, rel=1e-8)


class TestConditionSets:
    def test_applicable_sets_by_schedule_shape(self):
        params = default_parameters()
        same = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        assert set(check_conditions(params, same)) == {"same-interval"}
        diff = ImpulseSchedule(tau1=3.0, tau2=2.0, v_i=6.0, s_i=0.1)
        assert set(check_conditions(params, diff)) == {"different-interval"}
        bio = ImpulseSchedule(tau1=5.0, v_i=6.0)
        assert set(check_conditions(params, bio)) == {"bio-only"}
        chem = ImpulseSchedule(tau2=5.0, s_i=0.2)
        assert set(check_conditions(params, chem)) == {"chem-only"}
        # a coexisting train with zero strength keeps the single-control
        # sets applicable
        both_zero_chem = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.0)
        assert set(check_conditions(params, both_zero_chem)) == {
            "same-interval",
            "bio-only",
        }

    def test_explicit_inapplicable_set_rejected(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        with pytest.raises(DomainError):
            check_conditions(params, schedule, sets=["different-interval"])
        with pytest.raises(DomainError):
            check_conditions(params, schedule, sets=["no-such-set"])

    def test_chem_only_threshold(self):
        # With the default parameters the y-inequality of the chem-only set
        # flips at s_i = tau2 grow_y mu / m1 = 0.09375
        params = default_parameters()
        weak = ImpulseSchedule(tau2=5.0, s_i=0.05)
        strong = ImpulseSchedule(tau2=5.0, s_i=0.2)
        assert check_conditions(params, weak)["chem-only"] is False
        assert check_conditions(params, strong)["chem-only"] is True

    def test_same_interval_matches_multiplier_signs(self, rng):
        for _ in range(50):
            params = random_parameters(rng)
            schedule = ImpulseSchedule(
                tau1=float(rng.uniform(1.0, 8.0)),
                tau2=None,
                v_i=float(rng.uniform(0.0, 8.0)),
            )
            schedule = ImpulseSchedule(
                tau1=schedule.tau1, tau2=schedule.tau1,
                v_i=schedule.v_i, s_i=float(rng.uniform(0.0, 1.0)),
            )
            verdict = check_conditions(params, schedule)["same-interval"]
            lams = analytic_multipliers(params, schedule)
            assert verdict == (lams[1] < 1.0 and lams[2] < 1.0)


class TestCriticalPeriod:
    def test_matches_closed_form(self):
        # tau* = (lam v_i/gamma + m1 s_i/mu) / (c1 alpha k - d); the
        # z-exponent stays negative at that point, so the y-direction binds
        params = default_parameters()
        tau = critical_period(params, 6.0, 0.1)
        assert tau == pytest.approx(285.33333333333333, abs=1e-6)
        # stable strictly below, unstable strictly above
        for probe, want in ((tau - 1e-3, True), (tau + 1e-3, False)):
            schedule = ImpulseSchedule(tau1=probe, tau2=probe, v_i=6.0, s_i=0.1)
            ln2, ln3 = growth_exponents(params, schedule)
            assert (max(ln2, ln3) < 0.0) is want

    def test_random_cases_match_closed_form(self, rng):
        for _ in range(50):
            params = random_parameters(rng)
            v_i = float(rng.uniform(0.1, 8.0))
            s_i = float(rng.uniform(0.0, 1.0))
            tau = critical_period(params, v_i, s_i)
            if not math.isfinite(tau) or tau == 0.0:
                continue
            p = params
            slope2 = p.c1 * p.alpha * p.k - p.d
            slope3 = p.c2 * p.phi * p.k * p.alpha - (p.d + p.delta)
            drop2 = p.lam * v_i / p.gamma + p.m1 * s_i / p.mu
            drop3 = p.m2 * s_i / p.mu
            candidates = [
                drop2 / slope2 if slope2 > 0 else math.inf,
                drop3 / slope3 if slope3 > 0 else math.inf,
            ]
            assert tau == pytest.approx(min(candidates), abs=1e-6)

    def test_always_stable_returns_inf(self):
        params = ModelParameters(
            r=0.1, k=1.0, alpha=0.2, phi=0.1, lam=0.35,
            c1=0.5, c2=0.8, d=0.15, delta=0.2, theta=0.8,
            gamma=0.15, mu=0.3, m1=0.8, m2=0.6,
        )
        assert critical_period(params, 0.0, 0.0) == math.inf

    def test_never_stable_returns_zero(self):
        # positive pest growth with no control at all
        assert critical_period(default_parameters(), 0.0, 0.0) == 0.0

    def test_argument_validation(self):
        params = default_parameters()
        with pytest.raises(DomainError):
            critical_period(params, -1.0, 0.0)
        with pytest.raises(DomainError):
            critical_period(params, 1.0, 0.0, mode="different-interval")


class TestAnalyzeReport:
    def test_shared_period_report(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=5.0, tau2=5.0, v_i=6.0, s_i=0.1)
        report = analyze(params, schedule)
        assert report.period_T == 5.0
        assert report.analytic_multipliers is not None
        assert report.condition_verdicts == {"same-interval": True}
        assert report.stable is True
        assert report.dominant_multiplier == max(report.numeric_multipliers)
        assert report.dominant_multiplier < 1.0
        assert report.notes == ()
        text = report.to_text()
        assert "stable = true" in text
        assert "condition.same-interval = true" in text

    def test_distinct_period_report_notes(self):
        params = default_parameters()
        schedule = ImpulseSchedule(tau1=3.0, tau2=2.0, v_i=12.0, s_i=0.15)
        report = analyze(params, schedule)
        assert report.period_T == 6.0
        assert report.analytic_multipliers is None
        assert set(report.condition_verdicts) == {"different-interval"}
        assert len(report.notes) == 2
        text = report.to_text()
        assert "note.1 = " in text and "note.2 = " in text
        assert "analytic_multipliers" not in text

    def test_stability_flag_tracks_dominant(self, rng):
        for _ in range(3):
            params, schedule = draw_same_interval_case(rng)
            report = analyze(params, schedule)
            assert report.stable == (report.dominant_multiplier < 1.0)
            assert report.numeric_multipliers == tuple(
                sorted(report.numeric_multipliers, reverse=True)
            )
