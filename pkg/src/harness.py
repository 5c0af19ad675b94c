"""
harness.py

This module implements the command behind each subcommand: running episodes of one agent,
sweeping grid sizes for the benchmark table, dumping matrices and value fields, and the
duality checks. Every command returns its document and writes it when an output path is set.
"""

# General Imports
import logging
import time
import warnings
import numpy as np
from typing import Iterable, List, Optional, Tuple
from tqdm import tqdm

# Custom Imports
from src import __version__
from src.config import MAX_SEED, RunConfig
from src.data import BenchRecord, BenchTable, save_report, summarise_episodes
from src.duality import run_duality_suite
from src.efe import EfeRewardVector, EfeWeights, efe_reward_vector, epistemic_vector
from src.errors import ActiveInferenceError, ConfigError, NumericalWarning, UnknownField
from src.gridworld import GridSpec, build_model, run_episode, task_reward_vector
from src.model import Controller
from src.planner import PlannerAgent, complexity_estimate
from src.setup import SEED_MIXER, child_seed, episode_rng
from src.successor import SrAgent, default_transition, state_value, successor_matrix

# Set up logging
logger = logging.getLogger('app')

# Constants
TOOL_NAME = "sr-active-inference"
DUMP_FIELDS = ("default_b", "successor", "state_value", "efe_value", "utility_value", "entropy")
PROTOCOL_NOTE = "bench defaults (episodes=20, sizes 3-10) are this tool's protocol"


def _header() -> dict:
    return {"tool": TOOL_NAME, "version": __version__}


def _messages(caught: Iterable[warnings.WarningMessage]) -> List[str]:
    """Distinct numerical warning texts in the order they were raised."""
    seen = []
    for w in caught:
        text = str(w.message)
        if issubclass(w.category, NumericalWarning) and text not in seen:
            seen.append(text)
    return seen


def _with(config: RunConfig, **overrides) -> RunConfig:
    """A validated copy of `config` with the non-None overrides applied."""
    return RunConfig(**config.to_dict()).update(**overrides)


def build_controller(config: RunConfig, spec: GridSpec, agent: Optional[str] = None) -> Tuple[Controller, float]:
    """
    Constructs the agent for a grid and times its one-time setup.

    Args:
        config (RunConfig): Run settings.
        spec (GridSpec): The task.
        agent (str): "sr" or "planner", config.agent when omitted.

    Returns:
        (Tuple[Controller, float]): The agent and its setup time in ms (0 for the planner).
    """
    agent = agent or config.agent
    model = build_model(spec)
    if agent == "planner":
        reward = efe_reward_vector(model, config.efe_weights())
        return PlannerAgent(model, config.planner_config(), reward), 0.0

    tic = time.perf_counter()
    controller = SrAgent(model, gamma=config.sr_discount, beta=config.beta, weights=config.efe_weights())
    setup_ms = (time.perf_counter() - tic) * 1000.0
    logger.debug(f"SR setup for N={spec.n} took {setup_ms:.3f} ms")
    return controller, setup_ms


def cmd_run(config: RunConfig) -> dict:
    """
    Runs `config.episodes` episodes of one agent and builds the run report.

    Args:
        config (RunConfig): Run settings.

    Returns:
        (dict): Config echo, per-episode records, aggregates and recorded numerical warnings.

    Raises:
        NumericallySingular: The successor solve failed at the configured gamma.
    """
    spec = config.grid_spec()
    logger.info(f"Running {config.episodes} episodes of '{config.agent}' on a {spec.n}x{spec.n} grid")

    episodes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericalWarning)
        controller, setup_ms = build_controller(config, spec)
        for index in tqdm(range(config.episodes), desc="Episodes", disable=None):
            result = run_episode(controller, spec, episode_rng(config.seed, index))
            episodes.append({
                "episode": index,
                "seed": child_seed(config.seed, index),
                "steps": result.steps,
                "total_reward": result.total_reward,
                "reached_goal": result.reached_goal,
                "wall_time_ms": result.wall_time,
                "trajectory": [list(t) for t in result.trajectory],
            })

    model = build_model(spec)
    report = {
        **_header(),
        "config": config.to_dict(),
        "grid": spec.to_dict(),
        "seed_mixer": SEED_MIXER,
        "protocol": PROTOCOL_NOTE,
        "setup_time_ms": setup_ms,
        "episodes": episodes,
        "aggregate": summarise_episodes([e["total_reward"] for e in episodes],
                                        [e["reached_goal"] for e in episodes],
                                        [e["wall_time_ms"] for e in episodes]),
        "complexity": complexity_estimate(model.num_states, model.num_actions, config.horizon),
        "warnings": _messages(caught),
    }
    if isinstance(controller, SrAgent):
        report["value_field_finite"] = bool(np.all(np.isfinite(controller.value_field())))

    logger.info(f"Run finished: success rate {report['aggregate']['success_rate']:.3f}")
    save_report(report, config.out)
    return report


def _failed(size: int, agent: str, episode: int, seed: int, setup_ms: float, error: Exception) -> BenchRecord:
    logger.error(f"Bench cell N={size} {agent} episode {episode} failed: {error}")
    return BenchRecord(size, agent, episode, seed, 0, 0.0, False, 0.0, setup_ms, f"{type(error).__name__}: {error}")


def cmd_bench(config: RunConfig, sizes: Optional[List[int]] = None, agents: Optional[List[str]] = None,
              episodes: Optional[int] = None, seed: Optional[int] = None, out: Optional[str] = None) -> BenchTable:
    """
    Sweeps grid size x agent x episode and collects one record per cell.

    Episode i uses the same child seed for every agent, so agents face the same starts.
    A failing cell is recorded with an error note and the sweep goes on.

    Args:
        config (RunConfig): Base settings; the keyword arguments override it.
        sizes (List[int]): Grid sides.
        agents (List[str]): Agents to compare.
        episodes (int): Episodes per (size, agent).
        seed (int): Master seed.
        out (str): CSV path, not written when None.

    Returns:
        (BenchTable): The records.
    """
    config = _with(config, sizes=sizes, agents=agents, episodes=episodes, seed=seed, out=out)
    table = BenchTable()
    cells = len(config.sizes) * len(config.agents) * config.episodes
    logger.info(f"Benchmark sweep: sizes={config.sizes}, agents={config.agents}, episodes={config.episodes}")

    with tqdm(total=cells, desc="Benchmark", disable=None) as pbar:
        for size in config.sizes:
            spec = config.grid_spec(size)
            for agent in config.agents:
                try:
                    controller, setup_ms = build_controller(config, spec, agent)
                except ActiveInferenceError as e:
                    for index in range(config.episodes):
                        table.add(_failed(size, agent, index, child_seed(config.seed, index), 0.0, e))
                    pbar.update(config.episodes)
                    continue

                for index in range(config.episodes):
                    seed_i = child_seed(config.seed, index)
                    try:
                        result = run_episode(controller, spec, episode_rng(config.seed, index))
                        table.add(BenchRecord.from_episode(size, agent, index, seed_i, result, setup_ms))
                    except ActiveInferenceError as e:
                        table.add(_failed(size, agent, index, seed_i, setup_ms, e))
                    pbar.update(1)

    for row in table.summary():
        logger.info(f"N={row['grid_size']} {row['agent']}: mean reward {row['mean_reward']:.3f}, "
                    f"success rate {row['success_rate']:.3f}, mean time {row['mean_wall_time_ms']:.3f} ms")
    if config.out is not None:
        table.save_csv(config.out)
    return table


def _matrix(array: np.ndarray) -> dict:
    return {"rows": int(array.shape[0]), "cols": int(array.shape[1]), "data": array.tolist()}


def _field(values: np.ndarray, n: int) -> dict:
    return {"values": values.tolist(), "grid": values.reshape(n, n).tolist()}


def cmd_dump(config: RunConfig, what: Optional[List[str]] = None, out: Optional[str] = None) -> dict:
    """
    Dumps model matrices and value fields of one grid for external plotting.

    Matrices carry "rows"/"cols" and row-major "data"; fields carry flat "values" and an
    N x N row-major "grid". state_value is M applied to the environment reward, efe_value
    to g(w_utility, w_epistemic) and utility_value to g(w_utility, 0).

    Args:
        config (RunConfig): Grid and agent settings.
        what (List[str]): Requested fields, all of DUMP_FIELDS when omitted.
        out (str): JSON path, config.out when omitted.

    Returns:
        (dict): The dump document.

    Raises:
        UnknownField: A requested field does not exist.
    """
    what = list(DUMP_FIELDS) if not what else list(dict.fromkeys(what))
    unknown = [name for name in what if name not in DUMP_FIELDS]
    if unknown:
        raise UnknownField(f"unknown dump field(s) {', '.join(unknown)}; choose from {', '.join(DUMP_FIELDS)}")

    spec = config.grid_spec()
    model = build_model(spec)
    b_tilde = default_transition(model)
    fields = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericalWarning)
        M = None
        if any(name not in ("default_b", "entropy") for name in what):
            M = successor_matrix(b_tilde, config.sr_discount)

        for name in what:
            if name == "default_b":
                fields[name] = _matrix(b_tilde)
            elif name == "successor":
                fields[name] = _matrix(M.M)
            elif name == "state_value":
                fields[name] = _field(state_value(M, EfeRewardVector(task_reward_vector(spec))), spec.n)
            elif name == "efe_value":
                fields[name] = _field(state_value(M, efe_reward_vector(model, config.efe_weights())), spec.n)
            elif name == "utility_value":
                utility = efe_reward_vector(model, EfeWeights(config.w_utility, 0.0))
                fields[name] = _field(state_value(M, utility), spec.n)
            else:
                fields[name] = _field(epistemic_vector(model), spec.n)

    document = {**_header(), "grid": spec.to_dict(), "gamma": config.sr_discount,
                "fields": fields, "warnings": _messages(caught)}
    logger.info(f"Dumped {', '.join(what)} for the {spec.n}x{spec.n} grid")
    save_report(document, out if out is not None else config.out)
    return document


def cmd_duality(states: int, trials: int, horizon: int, seed: int, out: Optional[str] = None,
                gamma: float = 0.9) -> dict:
    """
    Runs the control/inference duality checks on random linear MDPs.

    Args:
        states (int): Largest number of states per instance (>= 1).
        trials (int): Number of instances (>= 1).
        horizon (int): Largest horizon (>= 1).
        seed (int): Master seed.
        out (str): JSON path, optional.
        gamma (float): Discount of the occupancy check.

    Returns:
        (dict): Pass counts, maxima and the overall `passed` flag.
    """
    for key, value in (("states", states), ("trials", trials), ("horizon", horizon)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise ConfigError(key, f"must be an integer >= 1, got {value!r}")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= MAX_SEED:
        raise ConfigError("seed", f"must be an integer in [0, 2^64 - 1], got {seed!r}")
    if not 0.0 < gamma < 1.0:
        raise ConfigError("gamma", f"the occupancy check needs 0 < gamma < 1, got {gamma}")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericalWarning)
        suite = run_duality_suite(int(states), int(trials), int(horizon), int(seed), gamma)

    document = {**_header(), **suite, "warnings": _messages(caught)}
    if not suite["passed"]:
        logger.error("Duality checks failed")
    save_report(document, out)
    return document
