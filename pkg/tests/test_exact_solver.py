import math

import numpy as np
import pytest

from lsmdp.exact_solver import (DivergentValueError, enumerate_trajectories,
                                evaluate_nonstationary, evaluate_stationary,
                                freeze, value_iteration)
from lsmdp.objectives import Objective, make_leading_ones, make_onemax
from lsmdp.policies import (HillClimbing, Metropolis, RandomWalk,
                            SimulatedAnnealing)
from lsmdp.search_space import LocalSearchMdp, ResourceLimitError


@pytest.fixture
def onemax2():
    return LocalSearchMdp(make_onemax(2))


class TestFreeze:
    def test_hill_climbing_rows(self, onemax2):
        pm = freeze(HillClimbing(), onemax2, 0)
        assert pm.P[0b01].tolist() == [0.0, 0.0, 0.0, 1.0]
        assert pm.P[0b11].tolist() == [0.0, 0.0, 0.0, 1.0]
        assert pm.P[0b00].tolist() == [0.0, 0.5, 0.5, 0.0]
        assert pm.r.tolist() == [1.0, 1.0, 1.0, 0.0]

    def test_random_walk_uniform(self, onemax2):
        pm = freeze(RandomWalk(), onemax2, 0)
        for i in range(4):
            for j in onemax2.neighbors(i):
                assert pm.P[i, j] == 0.5
            assert pm.P[i, i] == 0.0

    def test_cooling_shrinks_worsening_entries(self, onemax2):
        sa = SimulatedAnnealing(1.0, 0.5)
        early = freeze(sa, onemax2, 0)
        late = freeze(sa, onemax2, 5)
        for i in range(4):
            for j in onemax2.neighbors(i):
                if onemax2.value(j) <= onemax2.value(i):
                    assert late.P[i, j] < early.P[i, j]

    def test_rows_are_stochastic(self):
        mdp = LocalSearchMdp(make_onemax(6))
        for policy in (HillClimbing(), RandomWalk(), SimulatedAnnealing(2.0, 0.8)):
            pm = freeze(policy, mdp, 3)
            assert np.max(np.abs(pm.P.sum(axis=1) - 1.0)) <= 1e-12
            assert np.min(pm.P) >= 0.0

    def test_dense_cap(self):
        mdp = LocalSearchMdp(make_onemax(15))
        with pytest.raises(ResourceLimitError):
            freeze(HillClimbing(), mdp, 0)


class TestEvaluateStationary:
    def test_hill_climbing_undiscounted_telescopes(self, onemax2):
        vv = evaluate_stationary(freeze(HillClimbing(), onemax2, 0), 1.0)
        assert np.allclose(vv.v, [2.0, 1.0, 1.0, 0.0], atol=1e-12)
        assert vv.residual <= 1e-10

    def test_zero_objective_has_zero_value(self):
        flat = LocalSearchMdp(Objective(3, lambda x: 0.0, "flat", None))
        for policy in (HillClimbing(), RandomWalk(), Metropolis(1.0)):
            vv = evaluate_stationary(freeze(policy, flat, 0), 1.0)
            assert np.allclose(vv.v, 0.0, atol=1e-12)

    def test_myopic_discount_zero(self, onemax2):
        pm = freeze(RandomWalk(), onemax2, 0)
        vv = evaluate_stationary(pm, 0.0)
        assert np.array_equal(vv.v, pm.r)

    def test_recurrent_reward_diverges(self, onemax2):
        with pytest.raises(DivergentValueError):
            evaluate_stationary(freeze(RandomWalk(), onemax2, 0), 1.0)

    def test_rejects_bad_discount(self, onemax2):
        pm = freeze(HillClimbing(), onemax2, 0)
        with pytest.raises(ValueError):
            evaluate_stationary(pm, 1.5)

    def test_telescoping_identity_on_deterministic_paths(self):
        # leading_ones has a unique argmax neighbor at every non-optimal state,
        # so the strict climb is deterministic and the undiscounted value is
        # f(reached optimum) - f(start).
        mdp = LocalSearchMdp(make_leading_ones(4))
        vv = evaluate_stationary(freeze(HillClimbing(), mdp, 0), 1.0)
        for i in range(16):
            assert vv.v[i] == pytest.approx(4.0 - mdp.value(i), abs=1e-10)


class TestEvaluateNonstationary:
    def test_matches_fixed_point_for_stationary_policies(self, onemax2):
        for policy in (HillClimbing(), RandomWalk(), Metropolis(1.0)):
            finite = evaluate_nonstationary(policy, onemax2, 500, 0.9)
            fixed = evaluate_stationary(freeze(policy, onemax2, 0), 0.9)
            assert np.max(np.abs(finite.v - fixed.v)) <= 1e-6

    def test_single_step_is_reward(self, onemax2):
        sa = SimulatedAnnealing(1.0, 0.5)
        finite = evaluate_nonstationary(sa, onemax2, 1, 0.9)
        assert np.array_equal(finite.v, freeze(sa, onemax2, 0).r)

    def test_zero_horizon(self, onemax2):
        assert np.array_equal(evaluate_nonstationary(RandomWalk(), onemax2, 0, 1.0).v,
                              np.zeros(4))

    def test_annealing_value_nondecreasing_in_horizon(self):
        mdp = LocalSearchMdp(make_onemax(3))
        sa = SimulatedAnnealing(1.0, 0.5)
        previous = 0.0
        for horizon in range(1, 101):
            value = evaluate_nonstationary(sa, mdp, horizon, 1.0).v[0]
            assert value >= previous - 1e-12
            previous = value

    def test_annealing_small_horizons_match_enumerator(self):
        mdp = LocalSearchMdp(make_onemax(3))
        sa = SimulatedAnnealing(1.0, 0.5)
        for horizon in range(5):
            finite = evaluate_nonstationary(sa, mdp, horizon, 1.0)
            assert finite.v[0] == pytest.approx(
                enumerate_trajectories(sa, mdp, 0, horizon), abs=1e-12)


class TestValueIteration:
    def test_greedy_improves_on_every_non_optimal_state(self):
        mdp = LocalSearchMdp(make_onemax(3))
        _, greedy = value_iteration(mdp, 0.9)
        for i in range(8):
            move = greedy[i]
            if i == 0b111:
                assert move is None
            else:
                assert move is not None
                assert mdp.value(move.dst) > mdp.value(i)

    def test_constant_objective_all_zero(self):
        flat = LocalSearchMdp(Objective(3, lambda x: 1.0, "flat", None))
        vv, greedy = value_iteration(flat, 0.9)
        assert np.allclose(vv.v, 0.0, atol=1e-10)
        assert all(move is None for move in greedy.values())

    def test_dominates_policy_values(self):
        mdp = LocalSearchMdp(make_onemax(3))
        optimal, _ = value_iteration(mdp, 0.9, 1e-10)
        for policy in (HillClimbing(), RandomWalk()):
            vv = evaluate_stationary(freeze(policy, mdp, 0), 0.9)
            assert np.all(optimal.v >= vv.v - 1e-8)

    def test_parameter_validation(self):
        mdp = LocalSearchMdp(make_onemax(2))
        with pytest.raises(ValueError):
            value_iteration(mdp, 1.0)
        with pytest.raises(ValueError):
            value_iteration(mdp, 0.9, tolerance=0.0)


class TestEnumerateTrajectories:
    def test_hill_climbing_hand_value(self, onemax2):
        assert enumerate_trajectories(HillClimbing(), onemax2, 0, 3) == pytest.approx(2.0,
                                                                                      abs=1e-12)

    def test_zero_horizon_is_zero(self, onemax2):
        assert enumerate_trajectories(RandomWalk(), onemax2, 0, 0) == 0.0

    def test_cross_oracle_agreement(self, onemax2):
        sa = SimulatedAnnealing(1.0, 0.5)
        expected = evaluate_nonstationary(sa, onemax2, 2, 1.0).v[0]
        assert enumerate_trajectories(sa, onemax2, 0, 2) == pytest.approx(expected, abs=1e-12)

    def test_leaf_budget(self):
        mdp = LocalSearchMdp(make_onemax(8))
        with pytest.raises(ResourceLimitError):
            enumerate_trajectories(RandomWalk(), mdp, 0, 10)
