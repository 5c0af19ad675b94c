"""
gridworld.py

This module generates N x N gridworld POMDPs, optionally with 'unknowable' squares whose
observation is uniform over their row, and runs agent episodes on them.

Cells are indexed row-major: cell = row * N + col, so the default goal N^2 - 1 is the
bottom-right corner.
"""

# General Imports
import logging
import time
import numpy as np
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

# Custom Imports
from src.errors import InvalidSpec, IndexOutOfRange
from src.model import (GenerativeModel, Belief, Controller, validate_model, infer_state,
                       condition_on_observation)

# Set up logging
logger = logging.getLogger('app')


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4


# row, col offsets
MOVES = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
    Action.STAY: (0, 0),
}


@dataclass(frozen=True)
class GridSpec:
    """
    Gridworld task description.

    Args:
        n (int): Side length N >= 2.
        goal (int): Goal cell, bottom-right corner when omitted.
        unknowable (FrozenSet[int]): Cells whose observation is uniform over their row.
        step_reward (float): Reward of every non-terminal step.
        goal_reward (float): Reward for entering the goal.
        max_steps (int): Step budget per episode, 4 N^2 when omitted.
        c_goal (float): Log-preference of the goal observation (nats).
    """
    n: int
    goal: Optional[int] = None
    unknowable: FrozenSet[int] = field(default_factory=frozenset)
    step_reward: float = -1.0
    goal_reward: float = 10.0
    max_steps: Optional[int] = None
    c_goal: float = 2.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidSpec(f"grid side must be an integer >= 2, got {self.n}")
        cells = self.n * self.n
        goal = cells - 1 if self.goal is None else int(self.goal)
        unknowable = frozenset(int(c) for c in self.unknowable)
        max_steps = 4 * cells if self.max_steps is None else int(self.max_steps)
        if not 0 <= goal < cells:
            raise InvalidSpec(f"goal {goal} outside the {self.n}x{self.n} grid")
        if any(not 0 <= c < cells for c in unknowable):
            raise InvalidSpec(f"unknowable cells {sorted(unknowable)} outside the grid")
        if goal in unknowable:
            raise InvalidSpec("the goal cell cannot be unknowable")
        if max_steps < 1:
            raise InvalidSpec(f"max_steps must be positive, got {max_steps}")
        if not np.isfinite(self.c_goal):
            raise InvalidSpec("c_goal must be finite")
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "unknowable", unknowable)
        object.__setattr__(self, "max_steps", max_steps)

    @property
    def num_cells(self) -> int:
        return self.n * self.n

    def to_dict(self) -> dict:
        return {"grid_size": self.n, "goal": self.goal, "unknowable": sorted(self.unknowable),
                "step_reward": self.step_reward, "goal_reward": self.goal_reward,
                "max_steps": self.max_steps, "c_goal": self.c_goal}


class StepOutcome(NamedTuple):
    next_state: int
    observation: int
    reward: float
    done: bool


@dataclass
class EpisodeResult:
    """
    Outcome of one episode.

    Args:
        steps (int): Number of actions taken.
        total_reward (float): Sum of rewards.
        reached_goal (bool): Whether the goal was entered.
        trajectory (List[Tuple[int, int, int]]): (state after the action, action, observation) per step.
        wall_time (float): Milliseconds spent in the episode loop.
    """
    steps: int
    total_reward: float
    reached_goal: bool
    trajectory: List[Tuple[int, int, int]]
    wall_time: float


def next_cell(spec: GridSpec, cell: int, action: int) -> int:
    """Deterministic move; moves off the grid leave the agent in place."""
    if not 0 <= cell < spec.num_cells:
        raise IndexOutOfRange(f"cell {cell} outside the grid")
    if not 0 <= action < len(Action):
        raise IndexOutOfRange(f"action {action} outside [0, {len(Action)})")
    row, col = divmod(cell, spec.n)
    d_row, d_col = MOVES[Action(action)]
    row, col = row + d_row, col + d_col
    if not (0 <= row < spec.n and 0 <= col < spec.n):
        return cell
    return row * spec.n + col


@lru_cache(maxsize=32)
def build_model(spec: GridSpec) -> GenerativeModel:
    """
    Generative model of the grid: S = O = N^2, U = 5.

    A is the identity except that every unknowable column is uniform (1/N) over the
    observations of its own row. C holds c_goal at the goal observation.

    Args:
        spec (GridSpec): The task.

    Returns:
        (GenerativeModel): A validated model (cached per spec).
    """
    n, cells = spec.n, spec.num_cells
    A = np.eye(cells)
    for cell in spec.unknowable:
        row = cell // n
        A[:, cell] = 0.0
        A[row * n:(row + 1) * n, cell] = 1.0 / n

    B = np.zeros((cells, cells, len(Action)))
    for action in Action:
        for cell in range(cells):
            B[next_cell(spec, cell, action), cell, action] = 1.0

    C = np.zeros(cells)
    C[spec.goal] = spec.c_goal

    model = GenerativeModel(A, B, C)
    validate_model(model)
    logger.info(f"Built {n}x{n} gridworld model (goal={spec.goal}, unknowable={sorted(spec.unknowable)})")
    return model


def task_reward_vector(spec: GridSpec) -> np.ndarray:
    """Environment reward for entering each cell."""
    rewards = np.full(spec.num_cells, float(spec.step_reward))
    rewards[spec.goal] = spec.goal_reward
    return rewards


def shortest_distances(spec: GridSpec) -> np.ndarray:
    """Breadth-first number of moves from every cell to the goal."""
    distances = np.full(spec.num_cells, -1, dtype=int)
    distances[spec.goal] = 0
    queue = deque([spec.goal])
    while queue:
        cell = queue.popleft()
        # moves are symmetric, so neighbours of the goal side are predecessors
        for action in Action:
            neighbour = next_cell(spec, cell, action)
            if distances[neighbour] < 0:
                distances[neighbour] = distances[cell] + 1
                queue.append(neighbour)
    return distances


def start_cells(spec: GridSpec) -> List[int]:
    return [cell for cell in range(spec.num_cells) if cell != spec.goal]


def reset(spec: GridSpec, rng: np.random.Generator) -> int:
    """Uniform start cell, never the goal."""
    cells = start_cells(spec)
    return int(cells[rng.integers(len(cells))])


def _observe(model: GenerativeModel, state: int, rng: np.random.Generator) -> int:
    return int(rng.choice(model.num_obs, p=model.A[:, state]))


def step(spec: GridSpec, state: int, action: int, rng: np.random.Generator) -> StepOutcome:
    """
    Applies one action.

    Args:
        spec (GridSpec): The task.
        state (int): Current cell.
        action (int): Action index.
        rng (np.random.Generator): Random stream for the observation.

    Returns:
        (StepOutcome): Next cell, sampled observation, reward and terminal flag.
    """
    following = next_cell(spec, state, action)
    observation = _observe(build_model(spec), following, rng)
    if following == spec.goal:
        return StepOutcome(following, observation, float(spec.goal_reward), True)
    return StepOutcome(following, observation, float(spec.step_reward), False)


def run_episode(controller: Controller, spec: GridSpec, rng: np.random.Generator,
                start: Optional[int] = None) -> EpisodeResult:
    """
    Runs one episode: infer_state -> act -> step until the goal or the step budget.

    The initial belief is uniform over the non-goal cells, conditioned on the first observation.
    The timer covers the loop only; successor-matrix construction happens before this call.

    Args:
        controller (Controller): Agent exposing act(belief, rng).
        spec (GridSpec): The task.
        rng (np.random.Generator): Random stream for the start, observations and the agent.
        start (int): Explicit start cell, drawn with `reset` when omitted.

    Returns:
        (EpisodeResult): The episode record.
    """
    model = build_model(spec)
    state = reset(spec, rng) if start is None else int(start)
    if not 0 <= state < spec.num_cells:
        raise IndexOutOfRange(f"start cell {state} outside the grid")

    tic = time.perf_counter()
    belief = condition_on_observation(model, Belief.over(model.num_states, start_cells(spec)),
                                      _observe(model, state, rng))
    trajectory, total_reward, reached_goal = [], 0.0, False
    for _ in range(spec.max_steps):
        action = int(controller.act(belief, rng))
        outcome = step(spec, state, action, rng)
        trajectory.append((outcome.next_state, action, outcome.observation))
        total_reward += outcome.reward
        state = outcome.next_state
        if outcome.done:
            reached_goal = True
            break
        belief = infer_state(model, belief, action, outcome.observation)
    wall_time = (time.perf_counter() - tic) * 1000.0

    logger.debug(f"Episode finished: steps={len(trajectory)}, reward={total_reward:g}, reached_goal={reached_goal}")
    return EpisodeResult(len(trajectory), total_reward, reached_goal, trajectory, wall_time)
