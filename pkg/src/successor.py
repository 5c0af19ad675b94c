"""
successor.py

This module computes the default transition matrix, the analytic successor matrix M,
the state/observation/action value functions built on it, and the successor-representation
agent that selects actions from those values.
"""

# General Imports
import math
import logging
import warnings
import numpy as np
import scipy.linalg
from dataclasses import dataclass, field
from typing import Optional, Tuple

# Custom Imports
from src.errors import (NumericallySingular, DivergentSeries, NonFinite, ShapeMismatch,
                        NotStochastic, HeuristicDiscountWarning)
from src.model import GenerativeModel, Belief, softmax_cost, STOCHASTIC_TOL
from src.efe import EfeWeights, EfeRewardVector, efe_reward_vector

# Set up logging
logger = logging.getLogger('app')

# Constants
GREEDY = math.inf           # beta sentinel for argmax action selection
DEFAULT_BETA = 8.0
DEFAULT_GAMMA = 0.99
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DefaultPolicy:
    """
    Fixed action distribution p(u) under which the successor matrix is computed.

    Args:
        weights (np.ndarray): Length-U probability vector.
    """
    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise ShapeMismatch(f"policy weights must be a non-empty vector, got shape {weights.shape}")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > STOCHASTIC_TOL:
            raise NotStochastic("default policy must be a probability vector")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, num_actions: int) -> "DefaultPolicy":
        return cls(np.full(num_actions, 1.0 / num_actions))


@dataclass(frozen=True)
class SuccessorMatrix:
    """
    Discounted expected occupancies, M[s, s'] = sum_k gamma^k p(x_k = s' | x_0 = s).

    Args:
        M (np.ndarray): S x S matrix.
        gamma (float): Discount used to build it.
        warnings (Tuple[str, ...]): Numerical caveats attached to this solve.
    """
    M: np.ndarray
    gamma: float
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def size(self) -> int:
        return self.M.shape[0]


def default_transition(model: GenerativeModel, policy: Optional[DefaultPolicy] = None) -> np.ndarray:
    """
    Policy-averaged transition matrix B~ = sum_u p(u) B[:, :, u].

    Args:
        model (GenerativeModel): The generative model.
        policy (DefaultPolicy): Action weights, uniform when omitted.

    Returns:
        (np.ndarray): S x S column-stochastic matrix.
    """
    if policy is None:
        policy = DefaultPolicy.uniform(model.num_actions)
    if policy.weights.shape[0] != model.num_actions:
        raise ShapeMismatch(f"policy has {policy.weights.shape[0]} actions, model has {model.num_actions}")
    return np.einsum("iju,u->ij", model.B, policy.weights)


def _singular(operator_lu: np.ndarray) -> bool:
    """True when the LU factor has a pivot that is zero relative to the largest."""
    pivots = np.abs(np.diag(operator_lu))
    tolerance = pivots.shape[0] * np.finfo(float).eps * max(pivots.max(), 1.0)
    return bool(pivots.min() <= tolerance)


def successor_matrix(b_tilde: np.ndarray, gamma: float) -> SuccessorMatrix:
    """
    Analytic successor matrix: solves (I - gamma * B~^T) M = I.

    The transpose turns the column-conditioning storage into the forward row operator.
    Values of gamma above 1 are accepted as a stabilising heuristic; the solve then
    falls back to a pseudo-inverse if the operator is singular at that gamma.

    Args:
        b_tilde (np.ndarray): S x S column-stochastic default transition matrix.
        gamma (float): Positive discount.

    Returns:
        (SuccessorMatrix): The solved matrix.

    Raises:
        NumericallySingular: The solve failed or its residual exceeds 1e-8 (gamma <= 1).
    """
    b_tilde = np.asarray(b_tilde, dtype=float)
    if b_tilde.ndim != 2 or b_tilde.shape[0] != b_tilde.shape[1]:
        raise ShapeMismatch(f"B~ must be square, got shape {b_tilde.shape}")
    if not gamma > 0 or not np.isfinite(gamma):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")

    size = b_tilde.shape[0]
    identity = np.eye(size)
    operator = identity - gamma * b_tilde.T
    heuristic = gamma > 1.0
    notes = []
    if gamma >= 1.0:
        notes.append(f"gamma={gamma:g} >= 1: series oracle unavailable, nonnegativity and row-sum invariants suspended")

    M = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(operator)
            if not _singular(lu):
                with np.errstate(all="ignore"):
                    M = scipy.linalg.lu_solve((lu, piv), identity)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.debug(f"LU solve failed at gamma={gamma}: {e}")

    if M is not None and np.all(np.isfinite(M)):
        residual = np.max(np.abs(operator @ M - identity))
        tolerance = RESIDUAL_TOL * (max(1.0, np.max(np.abs(M))) if heuristic else 1.0)
        if residual > tolerance:
            logger.debug(f"Successor residual {residual:.3g} exceeds {tolerance:.3g}")
            M = None
    else:
        M = None

    if M is None:
        if not heuristic:
            logger.error(f"Successor operator is singular at gamma={gamma} (S={size})")
            raise NumericallySingular(f"(I - gamma * B~^T) is singular at gamma={gamma}; {NumericallySingular.hint}")
        M = scipy.linalg.pinv(operator)
        notes.append(f"operator singular at gamma={gamma:g}; pseudo-inverse used")

    for note in notes:
        logger.warning(note)
        warnings.warn(note, HeuristicDiscountWarning, stacklevel=2)

    logger.info(f"Successor matrix solved (S={size}, gamma={gamma:g})")
    return SuccessorMatrix(M, float(gamma), tuple(notes))


def successor_matrix_truncated(b_tilde: np.ndarray, gamma: float, K: int) -> np.ndarray:
    """
    Partial sum of the successor series, sum_{k=0..K} gamma^k (B~^T)^k.

    Args:
        b_tilde (np.ndarray): S x S column-stochastic matrix.
        gamma (float): Discount, must be < 1.
        K (int): Last power included.

    Returns:
        (np.ndarray): S x S partial sum.
    """
    if gamma >= 1.0:
        raise DivergentSeries(f"series diverges for gamma={gamma}")
    if K < 0:
        raise ValueError(f"K must be non-negative, got {K}")
    step = gamma * np.asarray(b_tilde, dtype=float).T
    term = np.eye(step.shape[0])
    total = term.copy()
    for _ in range(K):
        term = term @ step
        total += term
    return total


# VALUE FUNCTIONS

def _check_sizes(M: SuccessorMatrix, g: EfeRewardVector) -> None:
    if M.size != len(g):
        raise ShapeMismatch(f"successor matrix is {M.size} x {M.size} but reward has {len(g)} entries")


def state_value(M: SuccessorMatrix, g: EfeRewardVector) -> np.ndarray:
    """
    State values v = M g under the default policy.

    Args:
        M (SuccessorMatrix): Successor matrix.
        g (EfeRewardVector): Per-state gain.

    Returns:
        (np.ndarray): Length-S value vector.
    """
    _check_sizes(M, g)
    return M.M @ g.g


def observation_value(belief: Belief, M: SuccessorMatrix, g: EfeRewardVector) -> float:
    """Expected state value under the posterior, q^T M g."""
    if belief.size != M.size:
        raise ShapeMismatch(f"belief has {belief.size} states, successor matrix {M.size}")
    return float(belief.probs @ state_value(M, g))


def action_values(model: GenerativeModel, belief: Belief, M: SuccessorMatrix, g: EfeRewardVector) -> np.ndarray:
    """
    One-step lookahead values Q[u] = (M g)^T (B[:, :, u] q).

    Args:
        model (GenerativeModel): The generative model.
        belief (Belief): Current posterior.
        M (SuccessorMatrix): Successor matrix.
        g (EfeRewardVector): Per-state gain.

    Returns:
        (np.ndarray): Length-U action values.
    """
    if belief.size != model.num_states:
        raise ShapeMismatch(f"belief has {belief.size} states, model {model.num_states}")
    values = state_value(M, g)
    return np.einsum("s,sju,j->u", values, model.B, belief.probs)


def sample_action(Q, beta: float, rng: np.random.Generator) -> int:
    """
    Samples an action from softmax(beta * Q); beta=GREEDY takes the argmax.

    Args:
        Q (np.ndarray): Action values (gain convention).
        beta (float): Precision, or GREEDY.
        rng (np.random.Generator): Random stream owned by the caller.

    Returns:
        (int): Selected action index (lowest index on greedy ties).
    """
    Q = np.asarray(Q, dtype=float)
    if not np.all(np.isfinite(Q)):
        raise NonFinite("action values must be finite")
    if beta == GREEDY:
        return int(np.argmax(Q))
    probs = softmax_cost(-Q, beta)
    return int(rng.choice(Q.shape[0], p=probs))


class SrAgent:
    """
    Successor-representation active inference agent.

    The successor matrix is built once at construction; the reward vector can be
    swapped at any time with `reweight` without touching it.

    Args:
        model (GenerativeModel): The generative model.
        gamma (float): Discount for the successor matrix.
        beta (float): Action precision, or GREEDY.
        weights (EfeWeights): EFE term weights.
        policy (DefaultPolicy): Default policy, uniform when omitted.
    """
    def __init__(self, model: GenerativeModel, gamma: float = DEFAULT_GAMMA, beta: float = DEFAULT_BETA,
                 weights: EfeWeights = EfeWeights(), policy: Optional[DefaultPolicy] = None):
        self.model = model
        self.beta = beta
        self.policy = policy or DefaultPolicy.uniform(model.num_actions)
        self.b_tilde = default_transition(model, self.policy)
        self.successor = successor_matrix(self.b_tilde, gamma)
        self.reweight(weights)
        logger.info(f"SrAgent ready for {model!r} with gamma={gamma:g}, beta={beta:g}")

    @property
    def warnings(self) -> Tuple[str, ...]:
        return self.successor.warnings

    def reweight(self, weights: EfeWeights, ambiguity_averse: bool = False) -> None:
        """
        Recomputes the EFE reward vector for new weights; M is left unchanged.

        Args:
            weights (EfeWeights): New term weights.
            ambiguity_averse (bool): Penalise likelihood entropy instead of rewarding it.
        """
        self.weights = weights
        self.reward = efe_reward_vector(self.model, weights, ambiguity_averse=ambiguity_averse)
        self._values = state_value(self.successor, self.reward)
        logger.debug(f"SrAgent reweighted to {weights}")

    def value_field(self) -> np.ndarray:
        """Returns the state values M g for the current weights."""
        return self._values.copy()

    def act(self, belief: Belief, rng: np.random.Generator) -> int:
        """Scores each action by its one-step successor value and samples one."""
        Q = np.einsum("s,sju,j->u", self._values, self.model.B, belief.probs)
        return sample_action(Q, self.beta, rng)
