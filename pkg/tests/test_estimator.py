"""Backlog-estimator tests: the idle correction algebra, burst boosting,
clamping, determinism, and tracking quality under stationary load."""

import math

import numpy as np
import pytest

from rachsim.estimator import EstimatorState, observe_idle, observe_successes
from rachsim.model import DomainError


class TestObserveIdle:
    def test_initial_state(self):
        s = EstimatorState()
        assert s.n_prior == 1.0 and s.boost_q == 0

    def test_observation_matching_prior_gives_zero_correction(self):
        prior = 400.0
        p = 0.1
        M = 54
        # idle fraction exactly at its expectation: no correction
        idle = M * math.exp(-p * prior / M)
        s = EstimatorState(n_prior=prior)
        e = math.exp(-p * prior / M)
        delta = p * prior * (e - idle / M) / (1 - e)
        assert delta == pytest.approx(0.0, abs=1e-12)

    def test_all_idle_shrinks_by_factor(self):
        prior = 200.0
        p = 0.25
        s = observe_idle(EstimatorState(n_prior=prior), p, 54, 54)
        assert s.delta_n == pytest.approx(-p * prior, rel=1e-12)
        assert s.n_posterior == pytest.approx((1 - p) * prior, rel=1e-12)

    def test_pinned_reference_value(self):
        # independently evaluated at 30 significant digits
        s = observe_idle(EstimatorState(n_prior=1000.0), 0.054, 20, 54)
        assert s.delta_n == pytest.approx(-0.2127919664429016, rel=1e-12)
        assert s.n_posterior == pytest.approx(1000.0 - 0.2127919664429016, rel=1e-12)

    def test_zero_prior_takes_occupancy_limit(self):
        # continuity limit of the correction at a vanishing prior is the
        # observed occupancy, so the estimator can restart from 0
        s = observe_idle(EstimatorState(n_prior=0.0), 0.5, 10, 54)
        assert s.delta_n == 44.0
        assert s.n_posterior == 44.0

    def test_zero_prior_all_idle_stays_zero(self):
        s = observe_idle(EstimatorState(n_prior=0.0), 0.5, 54, 54)
        assert s.delta_n == 0.0
        assert s.n_posterior == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            observe_idle(EstimatorState(), 0.0, 10, 54)
        with pytest.raises(DomainError):
            observe_idle(EstimatorState(), 0.5, 55, 54)


class TestObserveSuccesses:
    def test_no_boost_when_correction_nonpositive(self):
        s = EstimatorState(n_prior=100.0, n_posterior=95.0, delta_n=-5.0, boost_q=3)
        nxt = observe_successes(s, 10)
        assert nxt.boost_q == 0
        # posterior base: 95 - 10
        assert nxt.n_prior == pytest.approx(85.0)

    def test_prior_base_variant(self):
        s = EstimatorState(n_prior=100.0, n_posterior=95.0, delta_n=-5.0, boost_q=0)
        nxt = observe_successes(s, 10, update_base="prior")
        assert nxt.n_prior == pytest.approx(90.0)

    def test_boost_accumulates(self):
        s = EstimatorState(n_prior=50.0, n_posterior=58.0, delta_n=8.0, boost_q=0)
        for expected_q in (1, 2, 3):
            nxt = observe_successes(s, 0)
            assert nxt.boost_q == expected_q
            # arrivals allowance is q_next * delta on top of the base
            assert nxt.n_prior == pytest.approx(58.0 + expected_q * 8.0)
            s = EstimatorState(n_prior=50.0, n_posterior=58.0, delta_n=8.0,
                               boost_q=nxt.boost_q)

    def test_clamps_to_zero(self):
        s = EstimatorState(n_prior=3.0, n_posterior=2.0, delta_n=-1.0, boost_q=0)
        assert observe_successes(s, 10).n_prior == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            observe_successes(EstimatorState(), -1)
        with pytest.raises(DomainError):
            observe_successes(EstimatorState(), 1, update_base="other")


class TestDeterminismAndTracking:
    def test_identical_observations_identical_trajectory(self):
        def run():
            s = EstimatorState()
            out = []
            for idle, succ in [(10, 5), (30, 8), (54, 0), (20, 12)]:
                s = observe_idle(s, 0.7, idle, 54)
                s = observe_successes(s, succ)
                out.append((s.n_prior, s.n_posterior, s.delta_n, s.boost_q))
            return out

        assert run() == run()

    def test_stationary_tracking(self):
        # replenished backlog held at n = 500; after warm-up the posterior
        # should stay within 25% of the truth in at least 90% of rounds
        rng = np.random.default_rng(42)
        n_true, M = 500, 54
        s = EstimatorState(n_prior=1.0)
        errors = []
        for i in range(400):
            p = min(1.0, M / max(s.n_prior, 1.0))
            transmitters = rng.binomial(n_true, p)
            counts = rng.multinomial(transmitters, np.full(M, 1.0 / M))
            idle = int((counts == 0).sum())
            successes = int((counts == 1).sum())
            s = observe_idle(s, p, idle, M)
            if i >= 50:
                errors.append(abs(s.n_posterior - n_true) / n_true)
            # replenished load: successes leave and are replaced, so the
            # roll-forward sees 0 departures
            s = observe_successes(s, 0)
        errors = np.array(errors)
        assert np.mean(errors <= 0.25) >= 0.90
