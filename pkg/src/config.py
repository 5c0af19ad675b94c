"""
config.py

This module manages the run configuration: defaults, per-key validation, loading from a
flat JSON (or YAML) file and applying command-line overrides on top.
"""

# General Imports
import json
import math
import logging
import yaml
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

# Custom Imports
from src.errors import ConfigError, InvalidSpec
from src.gridworld import GridSpec
from src.efe import EfeWeights
from src.planner import PlannerConfig, EVALUATIONS
from src.successor import GREEDY

# Set up logging
logger = logging.getLogger('app')

AGENTS = ("sr", "planner")
MAX_SEED = (1 << 64) - 1


# PARSERS

def _integer(key: str, value: Any, minimum: Optional[int] = None, maximum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    try:
        number = int(value)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if minimum is not None and number < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {number}")
    if maximum is not None and number > maximum:
        raise ConfigError(key, f"must be <= {maximum}, got {number}")
    return number


def _real(key: str, value: Any, positive: bool = False, nonnegative: bool = False) -> float:
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ConfigError(key, "must be finite")
    if positive and number <= 0:
        raise ConfigError(key, f"must be > 0, got {number}")
    if nonnegative and number < 0:
        raise ConfigError(key, f"must be >= 0, got {number}")
    return number


def _int_list(key: str, value: Any, minimum: int = 0) -> List[int]:
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple, set, frozenset)):
        raise ConfigError(key, f"expected a list of integers, got {value!r}")
    return sorted({_integer(key, item.strip() if isinstance(item, str) else item, minimum) for item in value})


def _optional(parser: Callable) -> Callable:
    def parse(key, value):
        return None if value is None else parser(key, value)
    return parse


def _agent(key, value):
    if value not in AGENTS:
        raise ConfigError(key, f"must be one of {', '.join(AGENTS)}, got {value!r}")
    return value


def _agents(key, value):
    if isinstance(value, str):
        value = [part.strip() for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(key, f"expected a non-empty list of agents, got {value!r}")
    return [_agent(key, item) for item in value]


def _beta(key, value):
    if isinstance(value, str) and value.strip().lower() == "greedy":
        return GREEDY
    if isinstance(value, float) and value == GREEDY:
        return GREEDY
    return _real(key, value, positive=True)


def _evaluation(key, value):
    if value not in EVALUATIONS:
        raise ConfigError(key, f"must be one of {', '.join(EVALUATIONS)}, got {value!r}")
    return value


def _sizes(key, value):
    sizes = _int_list(key, value, minimum=2)
    if not sizes:
        raise ConfigError(key, "needs at least one grid size")
    return sizes


def _out(key, value):
    if not isinstance(value, str) or not value:
        raise ConfigError(key, f"expected a path, got {value!r}")
    return value


# key -> (default, parser); keys mirror the command-line flag names
OPTIONS: Dict[str, tuple] = {
    "grid_size": (3, lambda k, v: _integer(k, v, 2)),
    "goal": (None, _optional(lambda k, v: _integer(k, v, 0))),
    "unknowable": ([], _int_list),
    "step_reward": (-1.0, _real),
    "goal_reward": (10.0, _real),
    "max_steps": (None, _optional(lambda k, v: _integer(k, v, 1))),
    "c_goal": (2.0, _real),
    "agent": ("sr", _agent),
    "agents": (list(AGENTS), _agents),
    "episodes": (20, lambda k, v: _integer(k, v, 1)),
    "seed": (0, lambda k, v: _integer(k, v, 0, MAX_SEED)),
    "gamma": (0.99, lambda k, v: _real(k, v, positive=True)),
    "sr_gamma": (None, _optional(lambda k, v: _real(k, v, positive=True))),
    "beta": (8.0, _beta),
    "horizon": (7, lambda k, v: _integer(k, v, 1)),
    "w_utility": (1.0, lambda k, v: _real(k, v, nonnegative=True)),
    "w_epistemic": (1.0, lambda k, v: _real(k, v, nonnegative=True)),
    "policy_cap": (10 ** 7, lambda k, v: _integer(k, v, 1)),
    "planner_eval": ("rollout", _evaluation),
    "sizes": (list(range(3, 11)), _sizes),
    "out": (None, _optional(_out)),
}


def _option(key: str) -> property:
    """Validated attribute backed by `self._values[key]`."""
    def getter(self):
        return self._values[key]

    def setter(self, value):
        parsed = OPTIONS[key][1](key, value)
        logger.debug(f"Setting {key}: {parsed!r}")
        self._values[key] = parsed

    return property(getter, setter, doc=f"The '{key}' option.")


class RunConfig:
    """
    The RunConfig class holds every setting of a run, benchmark, or dump.

    Args:
        **values: Option values keyed like the command-line flags; missing keys take defaults.
    """
    def __init__(self, **values):
        self._values = {}
        unknown = sorted(set(values) - set(OPTIONS))
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        for key, (default, _) in OPTIONS.items():
            setattr(self, key, values.get(key, default))
        self.validate()
        logger.info(f"Config initialized: agent={self.agent}, grid_size={self.grid_size}, episodes={self.episodes}")

    grid_size = _option("grid_size")
    goal = _option("goal")
    unknowable = _option("unknowable")
    step_reward = _option("step_reward")
    goal_reward = _option("goal_reward")
    max_steps = _option("max_steps")
    c_goal = _option("c_goal")
    agent = _option("agent")
    agents = _option("agents")
    episodes = _option("episodes")
    seed = _option("seed")
    gamma = _option("gamma")
    sr_gamma = _option("sr_gamma")
    beta = _option("beta")
    horizon = _option("horizon")
    w_utility = _option("w_utility")
    w_epistemic = _option("w_epistemic")
    policy_cap = _option("policy_cap")
    planner_eval = _option("planner_eval")
    sizes = _option("sizes")
    out = _option("out")

    # METHODS TO GET DATA

    def __str__(self):
        """Returns a string representation of the RunConfig object."""
        return f"RunConfig({', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())})"

    def __repr__(self):
        """Returns a string representation of the RunConfig object for debugging."""
        return self.__str__()

    def __eq__(self, other):
        """Checks if two RunConfig objects are equal."""
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self._values == other._values

    def to_dict(self) -> dict:
        """Serialisable copy, with the greedy sentinel written as "greedy"."""
        values = dict(self._values)
        if values["beta"] == GREEDY:
            values["beta"] = "greedy"
        return values

    @property
    def sr_discount(self) -> float:
        """Discount used for the successor matrix (sr_gamma overrides gamma)."""
        return self.sr_gamma if self.sr_gamma is not None else self.gamma

    def grid_spec(self, n: Optional[int] = None) -> GridSpec:
        """
        Builds the GridSpec for side `n` (grid_size when omitted).

        Raises:
            ConfigError: The grid options are inconsistent.
        """
        try:
            return GridSpec(n=n or self.grid_size, goal=self.goal, unknowable=frozenset(self.unknowable),
                            step_reward=self.step_reward, goal_reward=self.goal_reward,
                            max_steps=self.max_steps, c_goal=self.c_goal)
        except InvalidSpec as e:
            key = "goal" if "goal" in str(e) else "unknowable" if "unknowable" in str(e) else "grid_size"
            raise ConfigError(key, str(e)) from None

    def efe_weights(self) -> EfeWeights:
        return EfeWeights(self.w_utility, self.w_epistemic)

    def planner_config(self) -> PlannerConfig:
        """
        Planner settings from this config.

        Raises:
            ConfigError: gamma is above 1, which the planner's path integral does not allow, or the
                horizon gives more policies than policy_cap.
        """
        if self.gamma > 1.0:
            raise ConfigError("gamma", "the planner needs gamma <= 1 (use sr_gamma for the successor heuristic)")
        if 5 ** self.horizon > self.policy_cap:
            raise ConfigError("horizon", f"5^{self.horizon} policies exceed policy_cap={self.policy_cap}")
        return PlannerConfig(horizon=self.horizon, beta=self.beta, gamma=self.gamma, cap=self.policy_cap,
                             evaluation=self.planner_eval)

    # METHODS TO UPDATE

    def update(self, **values) -> "RunConfig":
        """
        Applies overrides in place; None values are ignored.

        Args:
            **values: Option values to override.

        Returns:
            (RunConfig): self, for chaining.
        """
        for key, value in values.items():
            if key not in OPTIONS:
                raise ConfigError(key, "unknown configuration key")
            if value is not None:
                setattr(self, key, value)
        self.validate()
        return self

    def validate(self) -> None:
        """Cross-field checks that single setters cannot make."""
        self.grid_spec()


def _read(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f"line {mark.line + 1} column {mark.column + 1}: " if mark else ""
            raise ConfigError(str(path), f"{where}{getattr(e, 'problem', e)}") from None
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(str(path), f"line {e.lineno} column {e.colno}: {e.msg}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(str(path), "top level must be a flat object")
    return data


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """
    Loads a run configuration; command-line overrides win over file values.

    Args:
        path (str): JSON (or .yaml/.yml) file with a flat object, optional.
        overrides (dict): Values from command-line flags; None entries are ignored.

    Returns:
        (RunConfig): The validated configuration.

    Raises:
        ConfigError: Unreadable file, unknown key or invalid value.
    """
    values = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(str(path), "config file not found")
        values = _read(path)
        for key, value in values.items():
            if isinstance(value, dict):
                raise ConfigError(key, "nested objects are not allowed")
        logger.info(f"Loaded configuration from {path}")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig(**values)
