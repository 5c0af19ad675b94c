"""
test_model.py

Tests for the generative model, beliefs, softmax and exact state inference.
"""

# General Imports
import math
import numpy as np
import pytest
from numpy.testing import assert_allclose

# Custom Imports
from src.errors import IndexOutOfRange, NonFinite, NotStochastic, ShapeMismatch, ZeroEvidenceWarning
from src.model import (Belief, Controller, GenerativeModel, condition_on_observation, infer_state,
                       predict_next, random_stochastic, softmax_cost, validate_model)
from tests.conftest import identity_model

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def _model_with(B, A=None):
    B = np.asarray(B, dtype=float)
    if B.ndim == 2:
        B = B[:, :, np.newaxis]
    A = np.eye(B.shape[0]) if A is None else np.asarray(A, dtype=float)
    return GenerativeModel(A=A, B=B, C=np.zeros(A.shape[0]))


# VALIDATION

def test_identity_model_is_valid():
    validate_model(identity_model(2, num_actions=3))


def test_column_summing_below_one_is_rejected():
    A = np.array([[0.9, 0.0], [0.0, 1.0]])
    with pytest.raises(NotStochastic):
        validate_model(_model_with(np.eye(2), A=A))


def test_state_count_disagreement_is_rejected():
    model = GenerativeModel(A=np.eye(4), B=np.repeat(np.eye(3)[:, :, None], 2, axis=2), C=np.zeros(4))
    with pytest.raises(ShapeMismatch):
        validate_model(model)


def test_nan_is_rejected():
    C = np.array([0.0, np.nan])
    with pytest.raises(NonFinite):
        validate_model(GenerativeModel(A=np.eye(2), B=np.eye(2)[:, :, None], C=C))


def test_model_arrays_are_read_only():
    model = identity_model(2)
    with pytest.raises(ValueError):
        model.A[0, 0] = 0.5


def test_random_stochastic_axes(rng):
    columns = random_stochastic(rng, 6, axis=0)
    rows = random_stochastic(rng, 6, axis=1)
    assert_allclose(columns.sum(axis=0), 1.0)
    assert_allclose(rows.sum(axis=1), 1.0)


# BELIEFS

def test_belief_constructors():
    assert_allclose(Belief.uniform(4).probs, 0.25)
    assert_allclose(Belief.one_hot(3, 1).probs, [0.0, 1.0, 0.0])
    assert_allclose(Belief.over(4, [0, 2]).probs, [0.5, 0.0, 0.5, 0.0])


def test_belief_off_simplex_is_rejected():
    with pytest.raises(NotStochastic):
        Belief(np.array([0.5, 0.6]))


# SOFTMAX

def test_softmax_symmetric():
    assert_allclose(softmax_cost([0.0, 0.0], 1.0), [0.5, 0.5])


def test_softmax_hand_value():
    assert_allclose(softmax_cost([0.0, math.log(3.0)], 1.0), [0.75, 0.25])


def test_softmax_saturates_without_overflow():
    probs = softmax_cost([3.0, 1003.0], 1.0)
    assert np.all(np.isfinite(probs))
    assert probs[0] == pytest.approx(1.0)
    assert probs[1] == pytest.approx(0.0, abs=1e-300)


def test_softmax_rejects_nan():
    with pytest.raises(NonFinite):
        softmax_cost([0.0, np.nan], 1.0)


def test_softmax_ignores_constant_shifts(rng):
    for _ in range(20):
        costs = rng.normal(size=6)
        beta = float(rng.uniform(0.1, 10.0))
        shift = float(rng.uniform(-50.0, 50.0))
        assert_allclose(softmax_cost(costs + shift, beta), softmax_cost(costs, beta), atol=1e-12)


def test_softmax_favours_the_lowest_cost(rng):
    for _ in range(20):
        costs = rng.normal(size=6)
        assert np.argmax(softmax_cost(costs, float(rng.uniform(0.1, 10.0)))) == np.argmin(costs)


# INFERENCE

def test_predict_identity():
    belief = predict_next(_model_with(np.eye(2)), Belief(np.array([0.3, 0.7])), 0)
    assert_allclose(belief.probs, [0.3, 0.7])


def test_predict_swap():
    belief = predict_next(_model_with(SWAP), Belief.one_hot(2, 0), 0)
    assert_allclose(belief.probs, [0.0, 1.0])


def test_predict_hand_product():
    B = np.array([[0.9, 0.4], [0.1, 0.6]])
    belief = predict_next(_model_with(B), Belief.uniform(2), 0)
    assert_allclose(belief.probs, [0.65, 0.35])


def test_predict_bad_action():
    with pytest.raises(IndexOutOfRange):
        predict_next(_model_with(np.eye(2)), Belief.uniform(2), 1)


def test_infer_noiseless_likelihood():
    model = identity_model(4)
    belief = infer_state(model, Belief(np.array([0.1, 0.2, 0.3, 0.4])), 0, 2)
    assert_allclose(belief.probs, [0.0, 0.0, 1.0, 0.0])


def test_infer_uninformative_likelihood():
    model = _model_with(np.eye(3), A=np.full((3, 3), 1.0 / 3.0))
    prior = Belief(np.array([0.2, 0.5, 0.3]))
    assert_allclose(infer_state(model, prior, 0, 1).probs, prior.probs)


def test_infer_hand_bayes():
    model = _model_with(np.eye(2), A=np.array([[0.8, 0.2], [0.2, 0.8]]))
    assert_allclose(infer_state(model, Belief.uniform(2), 0, 0).probs, [0.8, 0.2])


def test_zero_evidence_returns_prior():
    model = identity_model(3)
    prior = Belief(np.array([0.5, 0.5, 0.0]))
    with pytest.warns(ZeroEvidenceWarning):
        posterior = condition_on_observation(model, prior, 2)
    assert_allclose(posterior.probs, prior.probs)


def test_infer_bad_observation():
    with pytest.raises(IndexOutOfRange):
        infer_state(identity_model(2), Belief.uniform(2), 0, 5)


def test_infer_stays_on_simplex(rng):
    A = random_stochastic(rng, 5)
    B = np.stack([random_stochastic(rng, 5) for _ in range(3)], axis=2)
    model = GenerativeModel(A=A, B=B, C=np.zeros(5))
    belief = Belief.uniform(5)
    for _ in range(50):
        belief = infer_state(model, belief, int(rng.integers(3)), int(rng.integers(5)))
        assert belief.probs.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(belief.probs >= 0)


def test_infer_matches_brute_force_bayes(rng):
    for _ in range(50):
        num_states, num_obs, num_actions = (int(k) for k in rng.integers(1, 17, size=3))
        A = rng.dirichlet(np.ones(num_obs), size=num_states).T
        B = np.stack([random_stochastic(rng, num_states) for _ in range(num_actions)], axis=2)
        model = GenerativeModel(A=A, B=B, C=np.zeros(num_obs))
        prev = Belief(rng.dirichlet(np.ones(num_states)))
        action, obs = int(rng.integers(num_actions)), int(rng.integers(num_obs))

        joint = A[obs] * (B[:, :, action] @ prev.probs)
        expected = joint / joint.sum()
        assert_allclose(infer_state(model, prev, action, obs).probs, expected, atol=1e-12)


def test_agents_satisfy_controller_protocol(chain_model):
    from src.successor import SrAgent
    assert isinstance(SrAgent(chain_model, gamma=0.5), Controller)
