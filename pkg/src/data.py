"""
data.py

This module defines the benchmark record and the BenchTable class used for storing sweep
results, summarising them, and saving them as CSV; it also writes JSON reports.
"""

# General Imports
import csv
import json
import logging
import numpy as np
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional

# Custom Imports
from src.gridworld import EpisodeResult

# Set up logging
logger = logging.getLogger('app')

# Constants
COLUMNS = ["grid_size", "agent", "episode", "seed", "steps", "total_reward",
           "reached_goal", "wall_time_ms", "setup_time_ms"]
TIMING_COLUMNS = ("wall_time_ms", "setup_time_ms")


@dataclass(frozen=True)
class BenchRecord:
    """
    One (grid size, agent, episode) cell of a benchmark sweep.

    Args:
        grid_size (int): Grid side N.
        agent (str): "sr" or "planner".
        episode (int): Episode index.
        seed (int): Child seed of the episode.
        steps (int): Actions taken.
        total_reward (float): Sum of rewards.
        reached_goal (bool): Whether the goal was entered.
        wall_time_ms (float): Episode loop time.
        setup_time_ms (float): One-time successor construction (0 for the planner).
        error (str): Failure note, empty on success.
    """
    grid_size: int
    agent: str
    episode: int
    seed: int
    steps: int
    total_reward: float
    reached_goal: bool
    wall_time_ms: float
    setup_time_ms: float
    error: str = ""

    @classmethod
    def from_episode(cls, grid_size: int, agent: str, episode: int, seed: int,
                     result: EpisodeResult, setup_time_ms: float) -> "BenchRecord":
        return cls(grid_size, agent, episode, seed, result.steps, float(result.total_reward),
                   result.reached_goal, float(result.wall_time), float(setup_time_ms))

    @property
    def key(self):
        return (self.grid_size, self.agent, self.episode)


def format_float(value: float) -> str:
    """Six significant digits."""
    return f"{value:.6g}"


def _emit(record: BenchRecord, with_error: bool) -> List[str]:
    row = [str(record.grid_size), record.agent, str(record.episode), str(record.seed), str(record.steps),
           format_float(record.total_reward), "true" if record.reached_goal else "false",
           format_float(record.wall_time_ms), format_float(record.setup_time_ms)]
    if with_error:
        row.append(record.error)
    return row


def _parse(row: Dict[str, str]) -> BenchRecord:
    return BenchRecord(int(row["grid_size"]), row["agent"], int(row["episode"]), int(row["seed"]),
                       int(row["steps"]), float(row["total_reward"]), row["reached_goal"] == "true",
                       float(row["wall_time_ms"]), float(row["setup_time_ms"]), row.get("error", "") or "")


class BenchTable:
    """
    Class to store benchmark records and save them.

    Args:
        records (Iterable[BenchRecord]): Initial records.
    """
    def __init__(self, records: Iterable[BenchRecord] = ()):
        self.records: List[BenchRecord] = list(records)

    # METHODS TO ADD DATA

    def add(self, record: BenchRecord) -> None:
        self.records.append(record)

    # METHODS TO GET DATA

    def __len__(self):
        return len(self.records)

    def sorted(self) -> List[BenchRecord]:
        """Records ordered by (grid size, agent, episode)."""
        return sorted(self.records, key=lambda r: r.key)

    @property
    def has_errors(self) -> bool:
        return any(r.error for r in self.records)

    def summary(self) -> List[dict]:
        """Mean reward, success rate and mean times per (grid size, agent)."""
        groups: Dict[tuple, List[BenchRecord]] = {}
        for record in self.sorted():
            if not record.error:
                groups.setdefault((record.grid_size, record.agent), []).append(record)
        return [dict(grid_size=size, agent=agent, **summarise_episodes(
                    [r.total_reward for r in rows], [r.reached_goal for r in rows], [r.wall_time_ms for r in rows]))
                for (size, agent), rows in groups.items()]

    # METHODS TO SAVE DATA

    def save_csv(self, path) -> None:
        """
        Writes the records as CSV in (grid size, agent, episode) order.

        An `error` column is appended only when some record failed.

        Args:
            path (str): Output file.
        """
        with_error = self.has_errors
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(COLUMNS + (["error"] if with_error else []))
            for record in self.sorted():
                writer.writerow(_emit(record, with_error))
        logger.info(f"Saved {len(self.records)} benchmark rows to {path}")

    @classmethod
    def load_csv(cls, path) -> "BenchTable":
        """Reads a CSV written by `save_csv`."""
        with open(path, newline="") as f:
            return cls(_parse(row) for row in csv.DictReader(f))


def summarise_episodes(rewards: List[float], successes: List[bool], wall_times: List[float]) -> dict:
    """
    Aggregates over episodes.

    Args:
        rewards (List[float]): Total reward per episode.
        successes (List[bool]): Goal reached per episode.
        wall_times (List[float]): Milliseconds per episode.

    Returns:
        (dict): mean/stddev reward, success rate, mean wall time.
    """
    rewards = np.asarray(rewards, dtype=float)
    return {
        "episodes": int(rewards.size),
        "mean_reward": float(rewards.mean()) if rewards.size else None,
        "stddev_reward": float(rewards.std()) if rewards.size else None,
        "success_rate": float(np.mean(successes)) if rewards.size else None,
        "mean_wall_time_ms": float(np.mean(wall_times)) if rewards.size else None,
    }


def save_report(document: dict, path: Optional[str]) -> None:
    """
    Writes a JSON document with sorted keys, or does nothing when `path` is None.

    Args:
        document (dict): The report.
        path (str): Output file.
    """
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(document, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    logger.info(f"Report saved to {path}")
