"""
duality.py

This module checks the control/inference correspondence numerically on small standalone MDPs:
the desirability recursion of linearly solvable MDPs, its identity with the backward filtering
recursion, the Jensen bound between log messages and the fixed-policy Bellman value, and the
occupancy reading of the successor matrix.
"""

# General Imports
import logging
import warnings
import numpy as np
from dataclasses import dataclass
from typing import List

# Custom Imports
from src.errors import NonPositiveLikelihood, NotStochastic, ShapeMismatch, NonFinite, UnderflowWarning
from src.model import GenerativeModel, Belief, random_stochastic, STOCHASTIC_TOL
from src.efe import EfeRewardVector
from src.planner import Policy, policy_efe
from src.successor import successor_matrix_truncated

# Set up logging
logger = logging.getLogger('app')

# Constants
UNDERFLOW = 1e-300
BOUND_TOL = 1e-12
OCCUPANCY_TOL = 1e-10


@dataclass(frozen=True)
class LinearMdp:
    """
    Passive dynamics with a state cost, over a finite horizon.

    Args:
        P (np.ndarray): S x S row-stochastic prior dynamics, P[x, x'] = p(x' | x).
        state_cost (np.ndarray): Length-S non-negative cost r(x) in nats.
        horizon (int): Number of time slices T.
    """
    P: np.ndarray
    state_cost: np.ndarray
    horizon: int

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        cost = np.array(self.state_cost, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or cost.shape != (P.shape[0],):
            raise ShapeMismatch(f"P {P.shape} and state_cost {cost.shape} disagree")
        if np.any(P < 0) or np.max(np.abs(P.sum(axis=1) - 1.0)) > STOCHASTIC_TOL:
            raise NotStochastic("rows of P must be distributions")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise NonFinite("state_cost must be finite and non-negative")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "state_cost", cost)

    @property
    def num_states(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class BoundCheck:
    """Jensen comparison at one state."""
    lhs: float
    rhs: float
    holds: bool


def _backward(weights: np.ndarray, P: np.ndarray, terminal: np.ndarray, horizon: int, gamma: float) -> np.ndarray:
    """m_T = terminal; m_t = weights * (gamma * P @ m_{t+1}). Row t-1 holds slice t."""
    messages = np.empty((horizon, weights.shape[0]))
    messages[-1] = terminal
    for t in range(horizon - 2, -1, -1):
        messages[t] = weights * (gamma * (P @ messages[t + 1]))
    if np.any(messages < UNDERFLOW):
        logger.warning(f"Backward recursion underflowed below {UNDERFLOW:g} (horizon={horizon})")
        warnings.warn("backward messages underflowed", UnderflowWarning, stacklevel=3)
    return messages


def desirability_recursion(mdp: LinearMdp, gamma: float = 1.0) -> np.ndarray:
    """
    Desirability z_t = exp(-r) * (gamma * P z_{t+1}) with z_T = exp(-r).

    Args:
        mdp (LinearMdp): The MDP.
        gamma (float): Discount in (0, 1].

    Returns:
        (np.ndarray): T x S matrix, row t-1 is z_t.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    weights = np.exp(-mdp.state_cost)
    return _backward(weights, mdp.P, weights, mdp.horizon, gamma)


def filtering_recursion(likelihood, P, terminal, horizon: int, gamma: float = 1.0) -> np.ndarray:
    """
    Unnormalised backward filtering messages m_t = likelihood * (P m_{t+1}), m_T = terminal.

    Runs the exact code path of `desirability_recursion`, so substituting
    likelihood = exp(-r) reproduces it bit for bit.

    Args:
        likelihood (np.ndarray): Length-S non-negative likelihood p(o_t | x).
        P (np.ndarray): S x S row-stochastic dynamics.
        terminal (np.ndarray): Length-S last message.
        horizon (int): Number of slices T.
        gamma (float): Discount, 1 for plain filtering.

    Returns:
        (np.ndarray): T x S messages.
    """
    likelihood = np.asarray(likelihood, dtype=float)
    if np.any(likelihood < 0):
        raise NonPositiveLikelihood("likelihood entries must be non-negative")
    return _backward(likelihood, np.asarray(P, dtype=float), np.asarray(terminal, dtype=float), horizon, gamma)


def _passive_model(P: np.ndarray) -> GenerativeModel:
    """Single-action generative model whose only transition is the passive dynamics."""
    size = P.shape[0]
    return GenerativeModel(A=np.eye(size), B=P.T[:, :, np.newaxis], C=np.zeros(size))


def jensen_bound_check(mdp: LinearMdp) -> List[BoundCheck]:
    """
    Compares the log backward message with its Jensen bound at every state.

    lhs is log z_1 (desirability at gamma=1). rhs pushes each expectation outside the log,
    which is the fixed-policy Bellman value with reward log-likelihood = -r. As log is
    concave, rhs <= lhs, with equality under deterministic dynamics.

    Args:
        mdp (LinearMdp): The MDP, horizon >= 2.

    Returns:
        (List[BoundCheck]): One record per state.
    """
    if mdp.horizon < 2:
        raise ValueError("the Jensen comparison needs horizon >= 2")
    likelihood = np.exp(-mdp.state_cost)
    if np.any(likelihood <= 0):
        raise NonPositiveLikelihood("exp(-r) underflowed to zero; costs are too large")

    lhs = np.log(desirability_recursion(mdp, gamma=1.0)[0])

    # rhs through the planner's rollout: value = g[s] - cost of staying passive for T-1 steps
    model = _passive_model(mdp.P)
    reward = EfeRewardVector(np.log(likelihood))
    passive = Policy((0,) * (mdp.horizon - 1))
    records = []
    for s in range(mdp.num_states):
        start = Belief.one_hot(mdp.num_states, s)
        rhs = reward.g[s] - policy_efe(model, start, passive, reward, gamma=1.0)
        records.append(BoundCheck(float(lhs[s]), float(rhs), bool(rhs <= lhs[s] + BOUND_TOL)))
    return records


def occupancy_interpretation_check(b_tilde, gamma: float, T: int) -> float:
    """
    Max-norm gap between discounted k-step occupancies and the truncated successor series.

    Args:
        b_tilde (np.ndarray): S x S column-stochastic matrix.
        gamma (float): Discount in (0, 1).
        T (int): Last step included.

    Returns:
        (float): Largest absolute discrepancy over all rows.
    """
    b_tilde = np.asarray(b_tilde, dtype=float)
    truncated = successor_matrix_truncated(b_tilde, gamma, T)
    size = b_tilde.shape[0]
    worst = 0.0
    for s in range(size):
        occupancy = np.zeros(size)
        # gamma^k * p(x_k | x_0 = s)
        discounted = np.zeros(size)
        discounted[s] = 1.0
        for _ in range(T + 1):
            occupancy += discounted
            discounted = gamma * (b_tilde @ discounted)
        worst = max(worst, float(np.max(np.abs(occupancy - truncated[s]))))
    return worst


def _random_mdp(rng: np.random.Generator, states: int, horizon: int, deterministic: bool) -> LinearMdp:
    size = int(rng.integers(1, states + 1))
    T = int(rng.integers(2, horizon + 1)) if horizon >= 2 else 2
    if deterministic:
        P = np.eye(size)[rng.permutation(size)]
    else:
        P = random_stochastic(rng, size, axis=1)
    return LinearMdp(P, rng.exponential(1.0, size=size), T)


def run_duality_suite(states: int, trials: int, horizon: int, seed: int, gamma: float = 0.9) -> dict:
    """
    Samples random instances and runs every check of this module on them.

    Every fourth trial uses permutation dynamics, where the Jensen bound is tight.

    Args:
        states (int): Largest number of states per instance.
        trials (int): Number of instances.
        horizon (int): Largest horizon; also the occupancy truncation depth.
        seed (int): Master seed.
        gamma (float): Discount for the occupancy check.

    Returns:
        (dict): Pass counts, maxima and an overall `passed` flag.
    """
    rng = np.random.default_rng(seed)
    duality = {"passed": 0, "max_discrepancy": 0.0}
    jensen = {"passed": 0, "max_violation": 0.0, "deterministic_trials": 0, "deterministic_max_gap": 0.0}
    occupancy = {"passed": 0, "max_discrepancy": 0.0}

    for trial in range(trials):
        deterministic = trial % 4 == 3
        mdp = _random_mdp(rng, states, horizon, deterministic)
        likelihood = np.exp(-mdp.state_cost)

        z = desirability_recursion(mdp, gamma=1.0)
        m = filtering_recursion(likelihood, mdp.P, likelihood, mdp.horizon)
        gap = float(np.max(np.abs(z / z.sum(axis=1, keepdims=True) - m / m.sum(axis=1, keepdims=True))))
        duality["max_discrepancy"] = max(duality["max_discrepancy"], gap)
        duality["passed"] += int(gap <= BOUND_TOL and np.array_equal(z, m))

        records = jensen_bound_check(mdp)
        violation = max(r.rhs - r.lhs for r in records)
        jensen["max_violation"] = max(jensen["max_violation"], float(violation))
        holds = all(r.holds for r in records)
        if deterministic:
            tightness = max(abs(r.lhs - r.rhs) for r in records)
            jensen["deterministic_trials"] += 1
            jensen["deterministic_max_gap"] = max(jensen["deterministic_max_gap"], float(tightness))
            holds = holds and tightness <= BOUND_TOL
        jensen["passed"] += int(holds)

        b_tilde = random_stochastic(rng, mdp.num_states, axis=0)
        discrepancy = occupancy_interpretation_check(b_tilde, gamma, horizon)
        occupancy["max_discrepancy"] = max(occupancy["max_discrepancy"], discrepancy)
        occupancy["passed"] += int(discrepancy <= OCCUPANCY_TOL)

    passed = all(check["passed"] == trials for check in (duality, jensen, occupancy))
    logger.info(f"Duality suite: {trials} trials, passed={passed}")
    return {"trials": trials, "states": states, "horizon": horizon, "seed": seed, "gamma": gamma,
            "duality": duality, "jensen": jensen, "occupancy": occupancy, "passed": passed}
