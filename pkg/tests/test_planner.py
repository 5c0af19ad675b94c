"""
test_planner.py

Tests for policy enumeration, the EFE path integral and the exhaustive planner.
"""

# General Imports
import time
import numpy as np
import pytest
from numpy.testing import assert_allclose

# Custom Imports
from src.efe import EfeRewardVector, EfeWeights, efe_reward_vector
from src.errors import ExplosionCap
from src.gridworld import Action, GridSpec, build_model, next_cell, shortest_distances
from src.model import Belief, GenerativeModel, random_stochastic
from src.planner import (GREEDY, Policy, PlannerAgent, PlannerConfig, complexity_estimate, enumerate_policies,
                         first_action_marginal, plan_action, policy_costs, policy_efe)
from src.successor import SrAgent


# ENUMERATION

def test_two_actions_one_step():
    assert [p.actions for p in enumerate_policies(2, 1)] == [(0,), (1,)]


def test_policy_count():
    assert len(list(enumerate_policies(5, 2))) == 25


def test_explosion_cap_is_eager():
    with pytest.raises(ExplosionCap):
        enumerate_policies(5, 10, cap=10 ** 6)


def test_lexicographic_order():
    policies = [p.actions for p in enumerate_policies(3, 3)]
    assert policies == sorted(policies)


# PATH INTEGRAL

def test_zero_reward_costs_nothing(rng):
    model = build_model(GridSpec(3))
    g = EfeRewardVector(np.zeros(9))
    for policy in enumerate_policies(5, 2):
        assert policy_efe(model, Belief.uniform(9), policy, g, 0.9) == 0.0


def test_single_step_cost():
    model = build_model(GridSpec(3))
    g = EfeRewardVector(np.arange(9, dtype=float))
    cost = policy_efe(model, Belief.one_hot(9, 4), Policy((Action.RIGHT,)), g, 0.9)
    assert cost == pytest.approx(-0.9 * 5.0)


def test_walking_beats_staying():
    spec = GridSpec(3)
    model = build_model(spec)
    g = efe_reward_vector(model)
    start = Belief.one_hot(9, 0)
    walk = Policy((Action.RIGHT, Action.RIGHT, Action.DOWN, Action.DOWN))
    stay = Policy((Action.STAY,) * 4)
    assert policy_efe(model, start, walk, g, 0.99) < policy_efe(model, start, stay, g, 0.99)


@pytest.mark.parametrize("horizon", [1, 2, 3, 4])
def test_vectorised_costs_match_rollouts(rng, horizon):
    B = np.stack([random_stochastic(rng, 6) for _ in range(3)], axis=2)
    model = GenerativeModel(A=np.eye(6), B=B, C=np.zeros(6))
    belief = Belief(rng.dirichlet(np.ones(6)))
    g = EfeRewardVector(rng.normal(size=6))
    expected = [policy_efe(model, belief, p, g, 0.95) for p in enumerate_policies(3, horizon)]
    assert_allclose(policy_costs(model, belief, horizon, g, 0.95), expected, atol=1e-10)
    assert_allclose(policy_costs(model, belief, horizon, g, 0.95, evaluation="rollout"), expected, atol=1e-10)


def test_prefix_blocks_match_single_block(monkeypatch):
    import src.planner as planner
    model = build_model(GridSpec(4, unknowable=frozenset({5})))
    g = efe_reward_vector(model)
    belief = Belief.uniform(16)
    whole = policy_costs(model, belief, 4, g, 0.9)
    monkeypatch.setattr(planner, "MAX_BLOCK_ELEMENTS", 16 * 5 ** 2)
    assert_allclose(policy_costs(model, belief, 4, g, 0.9), whole, atol=1e-12)


# ACTION SELECTION

def test_equal_costs_give_uniform_marginal():
    assert_allclose(first_action_marginal(np.zeros(125), 5, 1.0), 0.2)


def test_planner_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(gamma=1.5)
    with pytest.raises(ValueError):
        PlannerConfig(evaluation="sampled")


def test_one_step_planner_agrees_with_successor_agent(chain_model, rng):
    # with g set to the successor values, the one-step planner ranks actions like Q
    sr = SrAgent(chain_model, gamma=0.5, beta=GREEDY)
    g = EfeRewardVector(sr.value_field())
    config = PlannerConfig(horizon=1, beta=GREEDY, gamma=0.5)
    for state in range(2):
        belief = Belief.one_hot(2, state)
        assert plan_action(chain_model, belief, config, g, rng) == sr.act(belief, rng)


def test_greedy_planner_follows_shortest_paths(rng):
    spec = GridSpec(3)
    model = build_model(spec)
    distances = shortest_distances(spec)
    agent = PlannerAgent(model, PlannerConfig(horizon=4, beta=GREEDY), efe_reward_vector(model))
    for cell in range(8):
        action = agent.act(Belief.one_hot(9, cell), rng)
        assert distances[next_cell(spec, cell, action)] == distances[cell] - 1


def test_actions_after_an_absorbing_goal_do_not_change_the_choice():
    spec = GridSpec(3)
    grid = build_model(spec)
    B = grid.B.copy()
    B[:, spec.goal, :] = 0.0
    B[spec.goal, spec.goal, :] = 1.0
    model = GenerativeModel(grid.A, B, grid.C)
    g = efe_reward_vector(model, EfeWeights(1.0, 0.0))
    for cell in range(8):
        belief = Belief.one_hot(9, cell)
        marginals = [first_action_marginal(policy_costs(model, belief, horizon, g, 0.99), 5, GREEDY)
                     for horizon in (4, 5, 6)]
        for longer in marginals[1:]:
            assert np.array_equal(longer, marginals[0])


def test_planner_agent_checks_cap():
    model = build_model(GridSpec(3))
    with pytest.raises(ExplosionCap):
        PlannerAgent(model, PlannerConfig(horizon=6, cap=1000), efe_reward_vector(model))


def test_complexity_estimate():
    estimate = complexity_estimate(25, 5, 7)
    assert estimate["planner_policies"] == 78125
    assert estimate["planner_ops"] == 25 * 49 * 78125
    assert estimate["sr_ops"] == 25 ** 3 + 35
    assert estimate["log10_ratio"] > 0


@pytest.mark.slow
def test_decision_time_grows_exponentially_with_horizon(rng):
    model = build_model(GridSpec(5))
    g = efe_reward_vector(model)
    belief = Belief.uniform(25)

    def decision_time(horizon):
        config = PlannerConfig(horizon=horizon, beta=8.0, evaluation="rollout")
        best = np.inf
        for _ in range(5):
            tic = time.perf_counter()
            plan_action(model, belief, config, g, rng)
            best = min(best, time.perf_counter() - tic)
        return best

    times = [decision_time(h) for h in (3, 4, 5)]
    for shorter, longer in zip(times, times[1:]):
        assert 0.5 * 5 <= longer / shorter <= 2.0 * 5
