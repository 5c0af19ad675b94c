"""
model.py

This module houses the discrete generative model (A, B, C), categorical beliefs,
exact state inference and the numerical helpers shared by the other modules.

Matrices follow the column-conditioning convention: A[o, s] = p(o | s) and
B[s', s, u] = p(s' | s, u).
"""

# General Imports
import logging
import warnings
import numpy as np
from dataclasses import dataclass
from typing import Iterable, Protocol, runtime_checkable
from scipy.special import softmax

# Custom Imports
from src.errors import (ShapeMismatch, NotStochastic, NonFinite, IndexOutOfRange,
                        ZeroEvidenceWarning)

# Set up logging
logger = logging.getLogger('app')

# Constants
STOCHASTIC_TOL = 1e-8       # allowed deviation of a column sum from 1
LOG_EPS = 1e-16             # probabilities are clamped here before taking logs
ZERO_EVIDENCE = 1e-300      # below this the posterior falls back to the prior


def _readonly(array, dtype=float) -> np.ndarray:
    """Returns a read-only float copy of `array`."""
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def safe_log(x) -> np.ndarray:
    """
    Natural log with probabilities clamped at LOG_EPS.

    Args:
        x (np.ndarray): Probabilities.

    Returns:
        (np.ndarray): log(max(x, LOG_EPS)).
    """
    return np.log(np.clip(x, LOG_EPS, None))


@dataclass(frozen=True)
class GenerativeModel:
    """
    The agent's world model.

    Args:
        A (np.ndarray): O x S likelihood, column s is p(o | x=s).
        B (np.ndarray): S x S x U transitions, B[:, :, u] column s is p(x' | x=s, u).
        C (np.ndarray): Length-O log-preferences (nats), unnormalised.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _readonly(self.A))
        object.__setattr__(self, "B", _readonly(self.B))
        object.__setattr__(self, "C", _readonly(self.C))

    @property
    def num_obs(self) -> int:
        return self.A.shape[0]

    @property
    def num_states(self) -> int:
        return self.A.shape[1] if self.A.ndim == 2 else 0

    @property
    def num_actions(self) -> int:
        return self.B.shape[2] if self.B.ndim == 3 else 0

    def __repr__(self):
        return f"GenerativeModel(S={self.num_states}, O={self.num_obs}, U={self.num_actions})"


@dataclass(frozen=True)
class Belief:
    """
    Categorical posterior q(x) over hidden states.

    Args:
        probs (np.ndarray): Length-S probability vector.
    """
    probs: np.ndarray

    def __post_init__(self):
        probs = _readonly(self.probs)
        if probs.ndim != 1:
            raise ShapeMismatch(f"belief must be a vector, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise NonFinite("belief contains non-finite entries")
        if np.any(probs < -STOCHASTIC_TOL) or abs(probs.sum() - 1.0) > STOCHASTIC_TOL:
            raise NotStochastic(f"belief does not lie on the simplex (sum={probs.sum():.12g})")
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, num_states: int) -> "Belief":
        return cls(np.full(num_states, 1.0 / num_states))

    @classmethod
    def one_hot(cls, num_states: int, state: int) -> "Belief":
        probs = np.zeros(num_states)
        probs[state] = 1.0
        return cls(probs)

    @classmethod
    def over(cls, num_states: int, cells: Iterable[int]) -> "Belief":
        """Uniform belief restricted to `cells`."""
        probs = np.zeros(num_states)
        probs[list(cells)] = 1.0
        return cls(probs / probs.sum())


@runtime_checkable
class Controller(Protocol):
    """
    Anything that picks actions from beliefs.

    `act` must be deterministic given the belief and the state of `rng`.
    """
    model: GenerativeModel

    def act(self, belief: Belief, rng: np.random.Generator) -> int: ...


# VALIDATION

def _check_columns(name: str, matrix: np.ndarray) -> None:
    if np.any(matrix < 0.0) or np.any(matrix > 1.0 + STOCHASTIC_TOL):
        raise NotStochastic(f"{name} has entries outside [0, 1]")
    sums = matrix.sum(axis=0)
    worst = np.max(np.abs(sums - 1.0))
    if worst > STOCHASTIC_TOL:
        raise NotStochastic(f"{name} columns must sum to 1 (worst deviation {worst:.3g})")


def validate_model(model: GenerativeModel) -> None:
    """
    Checks every GenerativeModel invariant.

    Args:
        model (GenerativeModel): The model to check.

    Raises:
        ShapeMismatch: Dimensions of A, B and C disagree.
        NonFinite: NaN or infinity anywhere.
        NotStochastic: A column of A or B(u) is not a distribution.
    """
    A, B, C = model.A, model.B, model.C
    if A.ndim != 2 or B.ndim != 3 or C.ndim != 1:
        raise ShapeMismatch(f"expected A 2-D, B 3-D, C 1-D; got {A.ndim}, {B.ndim}, {C.ndim}")
    num_obs, num_states = A.shape
    if B.shape[0] != B.shape[1]:
        raise ShapeMismatch(f"B slices must be square, got {B.shape[:2]}")
    if B.shape[0] != num_states:
        raise ShapeMismatch(f"A has {num_states} states but B has {B.shape[0]}")
    if C.shape[0] != num_obs:
        raise ShapeMismatch(f"A has {num_obs} observations but C has {C.shape[0]}")
    if 0 in (num_obs, num_states, B.shape[2]):
        raise ShapeMismatch("model dimensions must be positive")

    for name, array in (("A", A), ("B", B), ("C", C)):
        if not np.all(np.isfinite(array)):
            raise NonFinite(f"{name} contains NaN or infinite entries")

    _check_columns("A", A)
    for u in range(B.shape[2]):
        _check_columns(f"B[:, :, {u}]", B[:, :, u])
    logger.debug(f"Validated {model!r}")


def random_stochastic(rng: np.random.Generator, n: int, axis: int = 0, concentration: float = 1.0) -> np.ndarray:
    """
    Samples an n x n stochastic matrix with Dirichlet columns (axis=0) or rows (axis=1).

    Args:
        rng (np.random.Generator): Random stream.
        n (int): Matrix size.
        axis (int): 0 for column-stochastic, 1 for row-stochastic.
        concentration (float): Dirichlet concentration.

    Returns:
        (np.ndarray): The sampled matrix.
    """
    rows = rng.dirichlet(np.full(n, concentration), size=n)
    return rows.T.copy() if axis == 0 else rows


# DISTRIBUTIONS

def softmax_cost(costs, beta: float) -> np.ndarray:
    """
    Softmax over costs: p_i is proportional to exp(-beta * costs_i).

    Args:
        costs (np.ndarray): Finite cost vector; lower cost means higher probability.
        beta (float): Positive precision.

    Returns:
        (np.ndarray): Probability vector.
    """
    costs = np.asarray(costs, dtype=float)
    if not np.all(np.isfinite(costs)):
        raise NonFinite("costs must be finite")
    if not beta > 0 or not np.isfinite(beta):
        raise ValueError(f"beta must be a positive finite number, got {beta}")
    # scipy subtracts the max internally
    return softmax(-beta * costs)


# INFERENCE

def _check_index(name: str, value: int, bound: int) -> None:
    if not 0 <= value < bound:
        raise IndexOutOfRange(f"{name} {value} outside [0, {bound})")


def predict_next(model: GenerativeModel, belief: Belief, action: int) -> Belief:
    """
    Propagates a belief one step through B(action).

    Args:
        model (GenerativeModel): The generative model.
        belief (Belief): Current belief.
        action (int): Action index.

    Returns:
        (Belief): B[:, :, action] @ belief.
    """
    _check_index("action", action, model.num_actions)
    return Belief(model.B[:, :, action] @ belief.probs)


def condition_on_observation(model: GenerativeModel, prior: Belief, obs: int) -> Belief:
    """
    Bayes update of `prior` with the likelihood row A[obs, :].

    Falls back to the prior (with a ZeroEvidenceWarning) when the evidence is below 1e-300.

    Args:
        model (GenerativeModel): The generative model.
        prior (Belief): Predicted prior.
        obs (int): Observation index.

    Returns:
        (Belief): Normalised posterior.
    """
    _check_index("observation", obs, model.num_obs)
    joint = model.A[obs, :] * prior.probs
    evidence = joint.sum()
    if not np.isfinite(evidence):
        raise NonFinite("posterior evidence is not finite")
    if evidence < ZERO_EVIDENCE:
        logger.warning(f"Observation {obs} has zero probability under the model; keeping the prior")
        warnings.warn(f"observation {obs} has zero evidence, returning the predicted prior",
                      ZeroEvidenceWarning, stacklevel=2)
        return prior
    return Belief(joint / evidence)


def infer_state(model: GenerativeModel, prev_belief: Belief, action: int, obs: int) -> Belief:
    """
    Exact filtered posterior after taking `action` and seeing `obs`.

    For a single categorical factor the free-energy minimiser is the Bayes posterior,
    so no iteration is needed.

    Args:
        model (GenerativeModel): The generative model.
        prev_belief (Belief): Posterior at the previous step.
        action (int): Action taken.
        obs (int): Observation received.

    Returns:
        (Belief): q(x) proportional to A[obs, x] * (B(action) @ prev_belief)[x].
    """
    _check_index("observation", obs, model.num_obs)
    prior = predict_next(model, prev_belief, action)
    return condition_on_observation(model, prior, obs)
