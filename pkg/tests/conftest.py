"""
conftest.py

Shared fixtures: seeded random streams and small hand-checkable models.
"""

# General Imports
import numpy as np
import pytest

# Custom Imports
from src.model import GenerativeModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain_model():
    """
    Two-state chain with actions LEAVE (0) and STAY (1).

    LEAVE sends both states to state 0; STAY keeps the state.
    """
    leave = np.array([[1.0, 1.0], [0.0, 0.0]])
    stay = np.eye(2)
    return GenerativeModel(A=np.eye(2), B=np.stack([leave, stay], axis=2), C=np.array([1.0, 0.0]))


@pytest.fixture
def chain_b_tilde():
    """Column-stochastic B~ whose forward operator B~^T has rows [[1, 0], [0.5, 0.5]]."""
    return np.array([[1.0, 0.5], [0.0, 0.5]])


def identity_model(num_states: int, num_actions: int = 1) -> GenerativeModel:
    B = np.repeat(np.eye(num_states)[:, :, np.newaxis], num_actions, axis=2)
    return GenerativeModel(A=np.eye(num_states), B=B, C=np.zeros(num_states))
