import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqsentinel import (
    ActionProfile,
    BettingMixture,
    EProcessState,
    detection_bound_uniform,
    eprocess_update,
    evalue,
    exact_uniform_mixture,
    increment,
    mixture_value,
    optimal_lambda,
    slack_lower_bound,
)
from eqsentinel.errors import CapacityError, DomainError, ShapeError


class TestIncrement:
    def test_played_worse_than_deviation(self, two_signal):
        game, _, _ = two_signal
        assert increment(game, ActionProfile((1, 0)), 0, 0) == pytest.approx(-0.6)

    def test_played_better_than_deviation(self, two_signal):
        game, _, _ = two_signal
        assert increment(game, ActionProfile((1, 1)), 0, 0) == pytest.approx(0.5)

    def test_self_deviation_returns_shift(self, two_signal):
        game, _, _ = two_signal
        assert increment(game, ActionProfile((1, 1)), 0, 1, eps_shift=0.25) == 0.25

    def test_bad_indices(self, two_signal):
        game, _, _ = two_signal
        with pytest.raises(ShapeError):
            increment(game, ActionProfile((1, 1)), 0, 5)
        with pytest.raises(ShapeError):
            increment(game, ActionProfile((1, 2)), 0, 0)


class TestEvalue:
    @pytest.mark.parametrize(
        "x, lam, expected",
        [(-0.6, 0.1, 1.06), (0.0, 0.7, 1.0), (1.0, 1.0, 0.0)],
    )
    def test_formula(self, x, lam, expected):
        assert evalue(x, lam) == pytest.approx(expected)

    def test_lambda_domain(self):
        with pytest.raises(DomainError):
            evalue(0.0, 0.0)
        with pytest.raises(DomainError):
            evalue(0.0, 1.5)

    @given(x=st.floats(-1.0, 1.0), lam=st.floats(0.001, 1.0))
    @settings(max_examples=200)
    def test_nonnegative(self, x, lam):
        assert evalue(x, lam) >= 0.0


class TestMixtureConstruction:
    def test_grid_excludes_endpoints(self):
        grid = BettingMixture.uniform_grid(101)
        assert 0.0 < grid.lambdas[0] and grid.lambdas[-1] < 1.0
        assert grid.weights.sum() == pytest.approx(1.0)

    def test_dirac_at_one_allowed(self):
        assert BettingMixture.dirac(1.0).lambdas[0] == 1.0

    def test_invalid_fractions(self):
        with pytest.raises(DomainError):
            BettingMixture.dirac(0.0)
        with pytest.raises(DomainError):
            BettingMixture("grid", np.array([0.5, 0.25]), np.array([0.5, 0.5]))

    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            BettingMixture("grid", np.array([0.2, 0.4]), np.array([0.5, 0.6]))


class TestStateUpdates:
    def test_fresh_state_value_is_one(self):
        st_ = EProcessState.fresh(BettingMixture.uniform_grid(11))
        assert mixture_value(st_) == 1.0
        assert st_.round == 0

    def test_single_factor(self):
        st_ = EProcessState.fresh(BettingMixture.dirac(0.05))
        st_.update(-0.6)
        assert mixture_value(st_) == pytest.approx(1.03)

    def test_zero_stream_pins_wealth(self):
        st_ = EProcessState.fresh(BettingMixture.uniform_grid(7))
        for _ in range(50):
            st_.update(0.0)
        assert mixture_value(st_) == pytest.approx(1.0)
        assert st_.running_max == pytest.approx(1.0)

    def test_grid_matches_exact_integral(self):
        st_ = EProcessState.fresh(BettingMixture.uniform_grid(1001))
        st_.update(-1.0)
        st_.update(-1.0)
        assert mixture_value(st_) == pytest.approx(7.0 / 3.0, rel=1e-3)

    def test_single_negative_one(self):
        st_ = EProcessState.fresh(BettingMixture.uniform_grid(101))
        st_.update(-1.0)
        assert mixture_value(st_) == pytest.approx(1.5, rel=1e-6)

    def test_dead_flag_on_exact_zero(self):
        st_ = EProcessState.fresh(BettingMixture.dirac(1.0))
        st_.update(1.0)
        assert st_.dead.all()
        assert mixture_value(st_) == 0.0
        st_.update(-1.0)  # dead components stay dead
        assert mixture_value(st_) == 0.0

    def test_grid_mismatch_rejected(self):
        st_ = EProcessState.fresh(BettingMixture.uniform_grid(11))
        with pytest.raises(ShapeError):
            eprocess_update(st_, 0.0, BettingMixture.uniform_grid(12))

    def test_crossing_time_recorded_once(self):
        st_ = EProcessState.fresh(BettingMixture.dirac(0.5), threshold=2.0)
        for _ in range(10):
            st_.update(-1.0)
        assert st_.crossing_time == math.ceil(math.log(2.0) / math.log(1.5))

    @given(
        xs=st.lists(st.floats(-0.9, 0.9), min_size=1, max_size=30),
        nodes=st.sampled_from([1, 5, 51]),
    )
    @settings(max_examples=60, deadline=None)
    def test_running_max_replays_prefix_maximum(self, xs, nodes):
        mixture = BettingMixture.uniform_grid(nodes)
        state = EProcessState.fresh(mixture)
        prefix_values = [1.0]
        for x in xs:
            state.update(x)
            prefix_values.append(mixture_value(state))
        assert state.running_max == pytest.approx(max(prefix_values), rel=1e-12)
        assert state.round == len(xs)
        assert np.isfinite(state.log_wealth[~state.dead]).all()


class TestExactUniformMixture:
    @pytest.mark.parametrize(
        "xs, expected",
        [((), 1.0), ((-1.0,), 1.5), ((-1.0, -1.0), 7.0 / 3.0)],
    )
    def test_known_integrals(self, xs, expected):
        assert exact_uniform_mixture(xs) == pytest.approx(expected, abs=1e-12)

    def test_capacity_limit(self):
        with pytest.raises(CapacityError):
            exact_uniform_mixture([0.0] * 65)

    def test_quadrature_agreement_on_random_streams(self):
        rng = np.random.default_rng(99)
        mixture = BettingMixture.uniform_grid(1001)
        for _ in range(30):
            xs = rng.uniform(-0.9, 0.9, size=rng.integers(1, 21))
            state = EProcessState.fresh(mixture)
            for x in xs:
                state.update(x)
            exact = exact_uniform_mixture(xs)
            assert mixture_value(state) == pytest.approx(exact, rel=1e-3)


class TestClosedForms:
    def test_optimal_lambda_is_identity_on_slack(self):
        assert optimal_lambda(0.1) == 0.1
        assert optimal_lambda(1.0) == 1.0
        assert optimal_lambda(0.05) == 0.05
        with pytest.raises(DomainError):
            optimal_lambda(0.0)
        with pytest.raises(DomainError):
            optimal_lambda(1.2)

    def test_detection_bound_values(self):
        assert detection_bound_uniform(20, 0.1) == pytest.approx(8508.2, abs=0.15)
        expected = 12.0 * (1.0 + math.log(4.0) + math.log(1.5))
        assert detection_bound_uniform(math.e, 1.0) == pytest.approx(expected)

    def test_detection_bound_log_linearity_in_threshold(self):
        eta = 0.3
        delta = detection_bound_uniform(40, eta) - detection_bound_uniform(20, eta)
        assert delta == pytest.approx(12.0 * math.log(2.0) / eta**2)

    def test_detection_bound_domain(self):
        with pytest.raises(DomainError):
            detection_bound_uniform(1.0, 0.1)
        with pytest.raises(DomainError):
            detection_bound_uniform(20, 0.0)

    def test_slack_lower_bound_values(self):
        assert slack_lower_bound(20, 0.05, 0.05) == 1200
        assert slack_lower_bound(1.0000001, 0.5, 0.5) == 1

    def test_slack_lower_bound_small_gap_scaling(self):
        coarse = slack_lower_bound(20, 0.01, 0.02)
        fine = slack_lower_bound(20, 0.01, 0.01)
        assert fine / coarse == pytest.approx(2.0, rel=1e-3)


class TestSupermartingaleProperty:
    @pytest.mark.parametrize(
        "values, probs",
        [
            ((-1.0, 1.0), (0.5, 0.5)),  # mean zero, extreme support
            ((-0.6, 0.0, 0.5), (10 / 77, 5 / 7, 12 / 77)),  # equilibrium increments
            ((-0.2, 0.4), (0.5, 0.5)),  # strictly positive mean
        ],
    )
    def test_monte_carlo_mean_not_above_one(self, values, probs):
        # Mean of the mixture wealth under any null stream stays <= 1 + 3 SE.
        rng = np.random.default_rng(2024)
        seeds, horizon = 10_000, 30
        lam = BettingMixture.uniform_grid(31)
        draws = rng.choice(values, p=probs, size=(seeds, horizon))
        logw = np.cumsum(
            np.log1p(-draws[:, :, None] * lam.lambdas), axis=1
        )
        shift = logw[:, -1, :].max(axis=1)
        wealth = np.exp(shift) * np.sum(
            lam.weights * np.exp(logw[:, -1, :] - shift[:, None]), axis=1
        )
        se = wealth.std(ddof=1) / math.sqrt(seeds)
        assert wealth.mean() <= 1.0 + 3.0 * se
