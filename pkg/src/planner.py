"""
planner.py

This module contains the standard active inference baseline: it enumerates every
fixed-length policy, scores each by its discounted EFE path integral and samples
the first action from the resulting policy posterior. Replans at every step.
"""

# General Imports
import itertools
import logging
import math
import numpy as np
from dataclasses import dataclass
from typing import Iterator, Tuple
from scipy import sparse

# Custom Imports
from src.errors import ExplosionCap, IndexOutOfRange, ShapeMismatch
from src.model import GenerativeModel, Belief, softmax_cost
from src.efe import EfeRewardVector
from src.successor import GREEDY, DEFAULT_BETA, DEFAULT_GAMMA

# Set up logging
logger = logging.getLogger('app')

# Constants
DEFAULT_HORIZON = 7
DEFAULT_POLICY_CAP = 10 ** 7
MAX_BLOCK_ELEMENTS = 2 ** 22    # beliefs held in memory at once while expanding the policy tree
EVALUATIONS = ("tree", "rollout")


@dataclass(frozen=True)
class Policy:
    """
    A sequence of action indices.

    Args:
        actions (Tuple[int, ...]): The actions, first to last.
    """
    actions: Tuple[int, ...]

    def __post_init__(self):
        actions = tuple(int(a) for a in self.actions)
        if not actions:
            raise ValueError("a policy needs at least one action")
        if min(actions) < 0:
            raise IndexOutOfRange(f"negative action in policy {actions}")
        object.__setattr__(self, "actions", actions)

    def __len__(self):
        return len(self.actions)


@dataclass(frozen=True)
class PlannerConfig:
    """
    Settings of the exhaustive planner.

    Args:
        horizon (int): Policy length H.
        beta (float): Policy precision, or GREEDY.
        gamma (float): Per-step discount inside the path integral.
        cap (int): Largest number of policies the planner will enumerate.
        evaluation (str): "tree" expands all policies together, "rollout" scores them one by one.
    """
    horizon: int = DEFAULT_HORIZON
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    cap: int = DEFAULT_POLICY_CAP
    evaluation: str = "tree"

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.evaluation not in EVALUATIONS:
            raise ValueError(f"evaluation must be one of {EVALUATIONS}, got {self.evaluation!r}")


def _check_cap(num_actions: int, horizon: int, cap: int) -> int:
    count = num_actions ** horizon
    if count > cap:
        raise ExplosionCap(f"{num_actions}^{horizon} = {count} policies exceeds the cap of {cap}")
    return count


def enumerate_policies(num_actions: int, horizon: int, cap: int = DEFAULT_POLICY_CAP) -> Iterator[Policy]:
    """
    All U^H action sequences in lexicographic order.

    The cap is checked eagerly; the policies themselves are produced lazily.

    Args:
        num_actions (int): U.
        horizon (int): H.
        cap (int): Maximum allowed U^H.

    Returns:
        (Iterator[Policy]): Lazy sequence of policies.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    _check_cap(num_actions, horizon, cap)
    return (Policy(actions) for actions in itertools.product(range(num_actions), repeat=horizon))


def policy_efe(model: GenerativeModel, belief: Belief, policy: Policy, g: EfeRewardVector, gamma: float) -> float:
    """
    Discounted EFE path integral of one policy, sum_t gamma^t * (-g^T q_t).

    Args:
        model (GenerativeModel): The generative model.
        belief (Belief): Starting belief q_0.
        policy (Policy): Actions to roll out.
        g (EfeRewardVector): Per-state gain shared with the successor agent.
        gamma (float): Per-step discount.

    Returns:
        (float): Cost of the policy (lower is better).
    """
    if max(policy.actions) >= model.num_actions:
        raise IndexOutOfRange(f"policy {policy.actions} uses an action >= {model.num_actions}")
    if len(g) != model.num_states:
        raise ShapeMismatch(f"reward has {len(g)} entries, model {model.num_states} states")
    q = belief.probs
    cost = 0.0
    for t, action in enumerate(policy.actions, start=1):
        q = model.B[:, :, action] @ q
        cost += gamma ** t * -float(g.g @ q)
    return cost


def _transition_stack(model: GenerativeModel) -> sparse.csr_matrix:
    """Sparse (U*S) x S matrix whose u-th row block is B[:, :, u]."""
    return sparse.csr_matrix(np.concatenate([model.B[:, :, u] for u in range(model.num_actions)], axis=0))


def _expand(stack, beliefs: np.ndarray, costs: np.ndarray, g: np.ndarray, gamma: float,
            start: int, depth: int, num_actions: int) -> np.ndarray:
    """Expands a block of prefixes `depth` more levels; returns costs in lexicographic order."""
    num_states = g.shape[0]
    for t in range(start + 1, start + depth + 1):
        # column p of the product holds B(u) q_p for every u, stacked
        successors = (stack @ beliefs.T).T
        beliefs = np.ascontiguousarray(successors.reshape(-1, num_states))
        costs = np.repeat(costs, num_actions) - gamma ** t * (beliefs @ g)
    return costs


def policy_costs(model: GenerativeModel, belief: Belief, horizon: int, g: EfeRewardVector,
                 gamma: float, cap: int = DEFAULT_POLICY_CAP, evaluation: str = "tree") -> np.ndarray:
    """
    Costs of all U^H policies, ordered like `enumerate_policies`.

    The policy tree is expanded level by level with a sparse transition stack; when the
    full tree would not fit in memory it is processed one prefix block at a time. The "rollout"
    evaluation calls `policy_efe` once per policy instead, at the exhaustive per-policy cost.

    Args:
        model (GenerativeModel): The generative model.
        belief (Belief): Starting belief.
        horizon (int): H.
        g (EfeRewardVector): Per-state gain.
        gamma (float): Per-step discount.
        cap (int): Maximum allowed U^H.
        evaluation (str): "tree" or "rollout".

    Returns:
        (np.ndarray): Length-U^H cost vector.
    """
    num_actions, num_states = model.num_actions, model.num_states
    count = _check_cap(num_actions, horizon, cap)
    if len(g) != num_states:
        raise ShapeMismatch(f"reward has {len(g)} entries, model {num_states} states")
    if evaluation == "rollout":
        return np.fromiter((policy_efe(model, belief, policy, g, gamma)
                            for policy in enumerate_policies(num_actions, horizon, cap)), dtype=float, count=count)

    stack = _transition_stack(model)
    # deepest suffix that fits in one block
    suffix = horizon
    while suffix > 1 and num_actions ** suffix * num_states > MAX_BLOCK_ELEMENTS:
        suffix -= 1
    prefix = horizon - suffix

    root = belief.probs[np.newaxis, :]
    if prefix == 0:
        return _expand(stack, root, np.zeros(1), g.g, gamma, 0, horizon, num_actions)

    blocks = []
    for actions in itertools.product(range(num_actions), repeat=prefix):
        q = belief.probs
        cost = 0.0
        for t, action in enumerate(actions, start=1):
            q = model.B[:, :, action] @ q
            cost -= gamma ** t * float(g.g @ q)
        blocks.append(_expand(stack, q[np.newaxis, :], np.array([cost]), g.g, gamma, prefix, suffix, num_actions))
    return np.concatenate(blocks)


def first_action_marginal(costs: np.ndarray, num_actions: int, beta: float) -> np.ndarray:
    """
    p(u) = sum of q(pi) over policies whose first action is u.

    Greedy mode puts all mass on the first action of the lowest-index minimum-cost policy.

    Args:
        costs (np.ndarray): Lexicographically ordered policy costs.
        num_actions (int): U.
        beta (float): Policy precision, or GREEDY.

    Returns:
        (np.ndarray): Length-U probability vector.
    """
    if beta == GREEDY:
        marginal = np.zeros(num_actions)
        marginal[int(np.argmin(costs)) // (costs.shape[0] // num_actions)] = 1.0
        return marginal
    q_pi = softmax_cost(costs, beta)
    return q_pi.reshape(num_actions, -1).sum(axis=1)


def plan_action(model: GenerativeModel, belief: Belief, config: PlannerConfig, g: EfeRewardVector,
                rng: np.random.Generator) -> int:
    """
    Receding-horizon action choice from the policy posterior q(pi) = softmax(-beta * costs).

    Args:
        model (GenerativeModel): The generative model.
        belief (Belief): Current posterior.
        config (PlannerConfig): Planner settings.
        g (EfeRewardVector): Per-state gain.
        rng (np.random.Generator): Random stream owned by the caller.

    Returns:
        (int): Selected first action.
    """
    costs = policy_costs(model, belief, config.horizon, g, config.gamma, config.cap, config.evaluation)
    marginal = first_action_marginal(costs, model.num_actions, config.beta)
    if config.beta == GREEDY:
        return int(np.argmax(marginal))
    return int(rng.choice(model.num_actions, p=marginal))


class PlannerAgent:
    """
    Exhaustive-planning active inference agent.

    Args:
        model (GenerativeModel): The generative model.
        config (PlannerConfig): Planner settings.
        reward (EfeRewardVector): Per-state gain, the same one the successor agent uses.
    """
    def __init__(self, model: GenerativeModel, config: PlannerConfig, reward: EfeRewardVector):
        _check_cap(model.num_actions, config.horizon, config.cap)
        self.model = model
        self.config = config
        self.reward = reward
        self.warnings: Tuple[str, ...] = ()
        logger.info(f"PlannerAgent ready for {model!r}: {model.num_actions ** config.horizon} policies per step")

    def act(self, belief: Belief, rng: np.random.Generator) -> int:
        return plan_action(self.model, belief, self.config, self.reward, rng)


def complexity_estimate(num_states: int, num_actions: int, horizon: int) -> dict:
    """
    Rough operation counts: S * H^2 * U^H for exhaustive planning, S^3 + U * H for the successor agent.

    Args:
        num_states (int): S.
        num_actions (int): U.
        horizon (int): H.

    Returns:
        (dict): {"planner_ops": ..., "sr_ops": ...}.
    """
    return {
        "planner_ops": num_states * horizon ** 2 * num_actions ** horizon,
        "sr_ops": num_states ** 3 + num_actions * horizon,
        "planner_policies": num_actions ** horizon,
        "log10_ratio": math.log10(num_states * horizon ** 2 * num_actions ** horizon)
                       - math.log10(num_states ** 3 + num_actions * horizon),
    }
