import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqsentinel.envs import soccer
from eqsentinel.errors import ShapeError, StateError
from eqsentinel.stochastic import smooth_policy


class TestStateSpace:
    def test_index_round_trip(self):
        for idx in range(soccer.NUM_STATES):
            assert soccer.state_index(soccer.index_state(idx)) == idx

    def test_positions_validated(self):
        with pytest.raises(ShapeError):
            soccer.SoccerState((4, 0), (0, 0), 0)
        with pytest.raises(ShapeError):
            soccer.SoccerState((0, 5), (0, 0), 0)

    def test_terminal_definition(self):
        assert soccer.is_terminal(soccer.SoccerState((2, 4), (0, 1), 0))
        assert not soccer.is_terminal(soccer.SoccerState((2, 4), (0, 1), 1))
        assert soccer.is_terminal(soccer.SoccerState((2, 2), (3, 0), 1))
        assert not soccer.is_terminal(soccer.SoccerState((2, 2), (3, 0), 0))


class TestStep:
    def test_free_move_east(self, rng):
        state = soccer.SoccerState((1, 0), (3, 4), 0)
        nxt, reward, terminal = soccer.soccer_step(state, 2, 4, rng)
        assert nxt.a_pos == (1, 1)
        assert reward == pytest.approx(-0.05)
        assert not terminal

    def test_scoring_move(self, rng):
        state = soccer.SoccerState((0, 3), (3, 0), 0)
        nxt, reward, terminal = soccer.soccer_step(state, 2, 4, rng)
        assert terminal and nxt.a_pos == (0, 4)
        assert reward == pytest.approx(100.0 - 0.05)

    def test_defender_steal_and_score(self, rng):
        state = soccer.SoccerState((3, 4), (2, 1), 1)
        nxt, reward, terminal = soccer.soccer_step(state, 4, 3, rng)
        if nxt.b_pos == (2, 0):  # the defender may slip
            assert terminal
            assert reward == pytest.approx(-100.0 - 0.05)

    def test_both_wait_far_apart_only_slip_noise(self, rng):
        state = soccer.SoccerState((0, 0), (3, 4), 0)
        nxt, reward, terminal = soccer.soccer_step(state, 4, 4, rng)
        assert nxt == state and not terminal
        assert reward == pytest.approx(-0.05)

    def test_step_on_terminal_rejected(self, rng):
        with pytest.raises(StateError):
            soccer.soccer_step(soccer.SoccerState((0, 4), (0, 0), 0), 4, 4, rng)

    def test_wall_clipping(self, rng):
        state = soccer.SoccerState((0, 0), (3, 4), 0)
        nxt, _, _ = soccer.soccer_step(state, 0, 4, rng)  # N at the top wall
        assert nxt.a_pos == (0, 0)

    def test_move_into_waiting_defender_transfers_ball(self):
        # Deterministic given no slip: force slip draw above 0.25.
        class FakeRng:
            def __init__(self, values):
                self.values = list(values)

            def random(self):
                return self.values.pop(0)

        state = soccer.SoccerState((1, 2), (1, 3), 0)
        nxt, _, terminal = soccer.soccer_step(state, 2, 4, FakeRng([0.9]))
        assert nxt.a_pos == (1, 2) and nxt.b_pos == (1, 3)
        assert nxt.possession == 1 and not terminal

    def test_swap_flips_possession_half_the_time(self):
        state = soccer.SoccerState((1, 2), (1, 3), 0)
        flips = 0
        rng = np.random.default_rng(3)
        for _ in range(4000):
            nxt, _, _ = soccer.soccer_step(state, 2, 3, rng)
            assert nxt.a_pos == state.a_pos and nxt.b_pos == state.b_pos
            flips += nxt.possession
        # Possession flip only happens on non-slip branches: P = 0.75 * 0.5
        # (slip turns the swap into a move onto a waiting defender).
        assert flips / 4000 == pytest.approx(0.75 * 0.5 + 0.25, abs=0.03)


class TestTabularModel:
    def test_dimensions(self, soccer_game):
        assert soccer_game.model.num_states == 800
        assert soccer_game.model.action_counts == (5, 5)
        assert soccer_game.model.transition.shape == (800, 5, 5, 800)

    def test_rows_sum_to_one(self, soccer_game):
        sums = soccer_game.model.transition.sum(axis=-1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12

    def test_slip_split_for_nonadjacent_players(self, soccer_game):
        state = soccer.SoccerState((0, 0), (3, 4), 0)
        s = soccer.state_index(state)
        row = soccer_game.model.transition[s, 4, 0]  # A waits, B commanded N
        moved = soccer.state_index(soccer.SoccerState((0, 0), (2, 4), 0))
        slipped = soccer.state_index(state)
        assert row[moved] == pytest.approx(0.75)
        assert row[slipped] == pytest.approx(0.25)
        assert row.sum() == pytest.approx(1.0)

    def test_terminal_states_absorbing_with_zero_native_reward(self, soccer_game):
        for s in np.nonzero(soccer_game.terminal)[0]:
            assert soccer_game.model.transition[s, :, :, s].min() == 1.0
            assert np.all(soccer_game.native_reward[s] == 0.0)

    def test_scaled_rewards_are_constant_sum(self, soccer_game):
        total = soccer_game.model.rewards[0] + soccer_game.model.rewards[1]
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_native_zero_maps_to_half(self, soccer_game):
        terminal = np.nonzero(soccer_game.terminal)[0][0]
        assert soccer_game.model.rewards[0][terminal].max() == pytest.approx(0.5)

    def test_simulator_matches_model_rows(self, soccer_game):
        # Monte-Carlo frequencies of the simulator against the exact kernel.
        cases = [
            (soccer.SoccerState((1, 2), (1, 3), 0), 2, 3),  # swap contention
            (soccer.SoccerState((1, 0), (1, 4), 0), 2, 2),  # kickoff pushes
            (soccer.SoccerState((2, 2), (2, 3), 1), 2, 4),  # carrier B waits
        ]
        n = 100_000
        for state, a_act, b_act in cases:
            s = soccer.state_index(state)
            expected = soccer_game.model.transition[s, a_act, b_act]
            rng = np.random.default_rng(s)
            counts = np.zeros(soccer.NUM_STATES)
            for _ in range(n):
                nxt, _, _ = soccer.soccer_step(state, a_act, b_act, rng)
                counts[soccer.state_index(nxt)] += 1
            freq = counts / n
            for idx in np.nonzero(expected)[0]:
                p = expected[idx]
                se = np.sqrt(p * (1 - p) / n)
                assert abs(freq[idx] - p) <= 3 * se + 1e-12
            assert freq[expected == 0].sum() == 0.0


class TestAfraidTransform:
    def test_east_heavy_row(self):
        row = soccer.afraid_transform([0.01, 0.01, 0.96, 0.01, 0.01])
        assert row == pytest.approx([0.01, 0.01, 0.096, 0.442, 0.442])

    def test_no_east_mass_is_identity(self):
        row = np.array([0.5, 0.2, 0.0, 0.2, 0.1])
        assert soccer.afraid_transform(row) == pytest.approx(row)

    @given(st.lists(st.floats(0.001, 1.0), min_size=5, max_size=5))
    @settings(max_examples=100)
    def test_preserves_simplex(self, raw):
        row = np.array(raw)
        row /= row.sum()
        out = soccer.afraid_transform(row)
        assert out.sum() == pytest.approx(1.0, abs=1e-12)
        assert out.min() >= 0.0


class TestEquilibrium:
    def test_solver_reaches_fixed_point_quickly(self, soccer_solution):
        assert soccer_solution.converged
        assert soccer_solution.iterations <= 100

    def test_kickoff_policy_pushes_east(self, soccer_solution):
        idx = soccer.state_index(soccer.INITIAL_STATE)
        smoothed = smooth_policy(soccer_solution.row_policy, 0.05)
        assert smoothed.table[idx] == pytest.approx(
            [0.01, 0.01, 0.96, 0.01, 0.01], abs=1e-9
        )

    def test_episodes_terminate_under_smoothed_play(self, soccer_solution):
        attacker = smooth_policy(soccer_solution.row_policy, 0.05)
        defender = smooth_policy(soccer_solution.col_policy, 0.05)
        rng = np.random.default_rng(2)
        lengths = []
        for _ in range(1000):
            state = soccer.INITIAL_STATE
            for t in range(1, 100_000):
                s = soccer.state_index(state)
                a = int(rng.choice(5, p=attacker.table[s]))
                b = int(rng.choice(5, p=defender.table[s]))
                state, _, terminal = soccer.soccer_step(state, a, b, rng)
                if terminal:
                    lengths.append(t)
                    break
            else:
                pytest.fail("episode did not terminate")
        assert np.mean(lengths) < 1000


class TestEpisodeTrace:
    def test_nash_play_trace(self, soccer_solution):
        from eqsentinel.envs import trace

        attacker = smooth_policy(soccer_solution.row_policy, 0.05)
        defender = smooth_policy(soccer_solution.col_policy, 0.05)
        rng = np.random.default_rng(0)
        cols, rows = trace.soccer_episode_trace(
            attacker, defender, null_attacker=attacker, rng=rng
        )
        assert cols[0] == "step" and "martingale" in cols
        first = rows[0]
        assert (first[1], first[2]) == soccer.INITIAL_STATE.a_pos
        assert first[9] == "A"
        # Attacker starts East-heavy under the smoothed equilibrium.
        east = first[cols.index("pa_E")]
        assert east == pytest.approx(0.96, abs=1e-9)
        # Monitoring the played policy against itself keeps the wealth at 1.
        assert all(r[cols.index("martingale")] == pytest.approx(1.0) for r in rows)
        # Realized defender action is Wait whenever the slip fired.
        for r in rows:
            if r[cols.index("slip")]:
                assert r[cols.index("real_b")] == "X"

    def test_timid_play_drives_wealth_up(self, soccer_solution):
        from eqsentinel.envs import trace
        from eqsentinel.stochastic import Policy, mixture_policy

        null = smooth_policy(soccer_solution.row_policy, 0.05)
        defender = smooth_policy(soccer_solution.col_policy, 0.05)
        afraid = Policy(np.vstack([soccer.afraid_transform(r) for r in null.table]))
        played = mixture_policy(null, afraid, 0.5)
        rng = np.random.default_rng(4)
        cols, rows = trace.soccer_episode_trace(
            played, defender, null_attacker=null, rng=rng, max_steps=40
        )
        for before, after in zip(rows, rows[1:]):
            assert after[cols.index("martingale")] == pytest.approx(
                before[cols.index("martingale")] * before[cols.index("evalue")],
                rel=1e-12,
            )


class TestVisitAveragedDivergence:
    def test_rollout_kl_diagnostic_grows_with_deviation(self, soccer_solution):
        # Detection-rate diagnostics on the episodic match use the empirical
        # visit distribution of a long alternative-play rollout.
        from eqsentinel.stochastic import (
            Policy,
            empirical_state_distribution,
            lr_detection_bound,
            mixture_policy,
            state_avg_kl,
        )

        null = smooth_policy(soccer_solution.row_policy, 0.05)
        defender = smooth_policy(soccer_solution.col_policy, 0.05)
        afraid = Policy(np.vstack([soccer.afraid_transform(r) for r in null.table]))
        rng = np.random.default_rng(6)
        kls = []
        for eps in (0.1, 0.3):
            alt = mixture_policy(null, afraid, eps)
            visits = []
            state = soccer.INITIAL_STATE
            for _ in range(10_000):
                s = soccer.state_index(state)
                visits.append(s)
                a = int(rng.choice(5, p=alt.table[s]))
                b = int(rng.choice(5, p=defender.table[s]))
                state, _, terminal = soccer.soccer_step(state, a, b, rng)
                if terminal:
                    state = soccer.INITIAL_STATE
            mu = empirical_state_distribution(visits, soccer.NUM_STATES)
            kl = state_avg_kl(null, alt, mu)
            assert np.isfinite(kl) and kl > 0.0
            # The ceiling composes with the empirical divergence.
            assert lr_detection_bound(20.0, 0.0, kl) > 0.0
            kls.append(kl)
        assert kls[1] > kls[0]
