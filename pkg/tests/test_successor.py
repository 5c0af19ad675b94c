"""
test_successor.py

Tests for the default transition, the analytic successor matrix, the value functions
and the successor-representation agent.
"""

# General Imports
import math
import numpy as np
import pytest
from numpy.testing import assert_allclose

# Custom Imports
from src.efe import EfeRewardVector, EfeWeights
from src.errors import DivergentSeries, HeuristicDiscountWarning, NonFinite, NumericallySingular
from src.gridworld import GridSpec, build_model
from src.model import Belief, GenerativeModel, random_stochastic
from src.successor import (GREEDY, DefaultPolicy, SrAgent, SuccessorMatrix, action_values, default_transition,
                           observation_value, sample_action, state_value, successor_matrix,
                           successor_matrix_truncated)

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


# DEFAULT TRANSITION

def test_identity_and_swap_average():
    model = GenerativeModel(A=np.eye(2), B=np.stack([np.eye(2), SWAP], axis=2), C=np.zeros(2))
    assert_allclose(default_transition(model), [[0.5, 0.5], [0.5, 0.5]])


def test_single_action_is_returned_exactly(rng):
    B = random_stochastic(rng, 4)
    model = GenerativeModel(A=np.eye(4), B=B[:, :, np.newaxis], C=np.zeros(4))
    assert np.array_equal(default_transition(model), B)


def test_delta_policy_selects_first_action(rng):
    B = np.stack([random_stochastic(rng, 3), random_stochastic(rng, 3)], axis=2)
    model = GenerativeModel(A=np.eye(3), B=B, C=np.zeros(3))
    assert_allclose(default_transition(model, DefaultPolicy(np.array([1.0, 0.0]))), B[:, :, 0])


# SUCCESSOR MATRIX

def test_scalar_geometric_series():
    assert_allclose(successor_matrix(np.array([[1.0]]), 0.5).M, [[2.0]])


def test_two_state_chain(chain_b_tilde):
    M = successor_matrix(chain_b_tilde, 0.5)
    assert_allclose(M.M, [[2.0, 0.0], [2.0 / 3.0, 4.0 / 3.0]], atol=1e-12)
    assert_allclose(M.M, successor_matrix_truncated(chain_b_tilde, 0.5, 50), atol=1e-12)
    assert M.warnings == ()


def test_gamma_one_is_singular(rng):
    with pytest.raises(NumericallySingular) as info:
        successor_matrix(random_stochastic(rng, 6), 1.0)
    assert info.value.hint == "adjust gamma"


def test_fixed_point_and_series_on_random_instances(rng):
    gamma = 0.95
    bound = gamma ** 101 / (1.0 - gamma)
    for _ in range(100):
        size = int(rng.integers(2, 65))
        b_tilde = random_stochastic(rng, size)
        M = successor_matrix(b_tilde, gamma).M
        fixed_point = np.eye(size) + gamma * b_tilde.T @ M
        assert np.max(np.abs(M - fixed_point)) <= 1e-8
        truncated = successor_matrix_truncated(b_tilde, gamma, 100)
        assert np.max(np.abs(M - truncated)) <= bound + 1e-9
        assert_allclose(M.sum(axis=1), 1.0 / (1.0 - gamma), atol=1e-6)
        assert np.all(M >= -1e-12)


def test_heuristic_gamma_warns_and_stays_finite():
    b_tilde = default_transition(build_model(GridSpec(8)))
    with pytest.warns(HeuristicDiscountWarning):
        M = successor_matrix(b_tilde, 5.0)
    assert np.all(np.isfinite(M.M))
    assert M.warnings


def test_truncated_series_edges():
    assert_allclose(successor_matrix_truncated(np.eye(3), 0.5, 0), np.eye(3))
    assert_allclose(successor_matrix_truncated(np.eye(3), 0.5, 1), 1.5 * np.eye(3))
    with pytest.raises(DivergentSeries):
        successor_matrix_truncated(np.eye(3), 1.0, 10)


# VALUE FUNCTIONS

def test_zero_reward_has_zero_value(chain_b_tilde):
    M = successor_matrix(chain_b_tilde, 0.5)
    assert_allclose(state_value(M, EfeRewardVector(np.zeros(2))), 0.0)


def test_chain_state_value(chain_b_tilde):
    v = state_value(successor_matrix(chain_b_tilde, 0.5), EfeRewardVector(np.array([1.0, 0.0])))
    assert_allclose(v, [2.0, 2.0 / 3.0], atol=1e-12)


def test_all_ones_reward_gives_row_sums(rng):
    gamma = 0.9
    M = successor_matrix(random_stochastic(rng, 7), gamma)
    assert_allclose(state_value(M, EfeRewardVector(np.ones(7))), 1.0 / (1.0 - gamma), atol=1e-6)


def test_state_value_is_linear_in_the_reward(rng):
    M = successor_matrix(random_stochastic(rng, 6), 0.9)
    g1, g2 = rng.normal(size=6), rng.normal(size=6)
    a, b = rng.normal(size=2)
    combined = state_value(M, EfeRewardVector(a * g1 + b * g2))
    parts = a * state_value(M, EfeRewardVector(g1)) + b * state_value(M, EfeRewardVector(g2))
    assert_allclose(combined, parts, atol=1e-9)


def test_observation_value(chain_b_tilde, rng):
    M = successor_matrix(chain_b_tilde, 0.5)
    g = EfeRewardVector(np.array([1.0, 0.0]))
    assert observation_value(Belief.one_hot(2, 1), M, g) == pytest.approx(2.0 / 3.0)
    assert observation_value(Belief.uniform(2), M, g) == pytest.approx(np.mean([2.0, 2.0 / 3.0]))
    assert observation_value(Belief(np.array([0.25, 0.75])), M, g) == pytest.approx(1.0)


def test_chain_action_values(chain_model, chain_b_tilde):
    M = successor_matrix(chain_b_tilde, 0.5)
    Q = action_values(chain_model, Belief.one_hot(2, 1), M, EfeRewardVector(np.array([1.0, 0.0])))
    assert_allclose(Q, [2.0, 2.0 / 3.0], atol=1e-12)


def test_identical_actions_have_equal_values(rng):
    B = random_stochastic(rng, 4)
    model = GenerativeModel(A=np.eye(4), B=np.stack([B, B, B], axis=2), C=np.zeros(4))
    M = successor_matrix(default_transition(model), 0.9)
    Q = action_values(model, Belief.uniform(4), M, EfeRewardVector(rng.normal(size=4)))
    assert_allclose(Q, Q[0])


# ACTION SAMPLING

def test_greedy_takes_argmax(rng):
    assert all(sample_action([5.0, 0.0], GREEDY, rng) == 0 for _ in range(20))
    assert sample_action([1.0, 1.0], GREEDY, rng) == 0


def test_equal_values_split_evenly(rng):
    draws = np.array([sample_action([3.0, 3.0], 1.0, rng) for _ in range(10000)])
    assert abs(draws.mean() - 0.5) <= 3 * math.sqrt(0.25 / 10000)


def test_softmax_frequency(rng):
    p = math.e / (math.e + 1.0)
    draws = np.array([sample_action([1.0, 0.0], 1.0, rng) for _ in range(10000)])
    assert abs(np.mean(draws == 0) - p) <= 3 * math.sqrt(p * (1 - p) / 10000)


def test_softmax_sampling_prefers_the_best_action(rng):
    Q = np.array([0.2, 1.5, -0.3, 0.9])
    counts = np.bincount([sample_action(Q, 2.0, rng) for _ in range(5000)], minlength=4)
    assert np.argmax(counts) == np.argmax(Q)


def test_non_finite_values_are_rejected(rng):
    with pytest.raises(NonFinite):
        sample_action([np.nan, 0.0], 1.0, rng)


# AGENT

def test_agent_reweight_keeps_successor():
    model = build_model(GridSpec(3, unknowable=frozenset({4})))
    agent = SrAgent(model, gamma=0.9, beta=GREEDY)
    before = agent.successor
    full = agent.value_field()
    agent.reweight(EfeWeights(1.0, 0.0))
    assert agent.successor is before
    assert np.all(full - agent.value_field() > 0)


def test_agent_moves_toward_goal(rng):
    spec = GridSpec(3)
    agent = SrAgent(build_model(spec), gamma=0.99, beta=GREEDY)
    # from the centre cell DOWN and RIGHT are both one step closer
    assert agent.act(Belief.one_hot(9, 4), rng) in (1, 3)
    assert agent.act(Belief.one_hot(9, 7), rng) == 3


def test_successor_matrix_is_immutable(chain_b_tilde):
    M = successor_matrix(chain_b_tilde, 0.5)
    assert isinstance(M, SuccessorMatrix)
    with pytest.raises(ValueError):
        M.M[0, 0] = 1.0
