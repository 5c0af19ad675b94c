"""
setup.py

This module contains the helpers that prepare a run: resolving bundled resource paths,
setting up logging, and deriving per-episode random streams from a master seed.
"""

# General Imports
import logging
import logging.config
import os
import sys
import yaml
import numpy as np
from pathlib import Path

# Set up logging
logger = logging.getLogger('app')

# Constants
MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SEED_MIXER = "splitmix64((master_seed + (index + 1) * 0x9E3779B97F4A7C15) mod 2^64)"
DEFAULT_LOG_CONFIG = "logging_config.yaml"


def resource_path(relative_path):
    """ Get absolute path to a resource shipped next to the package """
    base_path = getattr(sys, '_MEIPASS', os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    return os.path.join(base_path, relative_path)


def setup_logging(config_path=None):
    """
    Sets up logging configuration from the provided YAML file.

    Args:
        config_path (str): Path to the logging configuration YAML file.

    Returns:
        (logging.Logger): Configured logger object.
    """
    config_path = config_path or resource_path(DEFAULT_LOG_CONFIG)
    with open(config_path, "r") as f:
        config = yaml.safe_load(f.read())

    # file handlers fail on a missing directory
    for handler in config.get("handlers", {}).values():
        if "filename" in handler:
            Path(handler["filename"]).parent.mkdir(parents=True, exist_ok=True)

    logging.config.dictConfig(config=config)
    return logging.getLogger('app')


def splitmix64(value: int) -> int:
    """One round of the SplitMix64 finaliser on a 64-bit integer."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def child_seed(master_seed: int, index: int) -> int:
    """
    Derives the seed of stream `index` from `master_seed`.

    Args:
        master_seed (int): 64-bit unsigned master seed.
        index (int): Episode index.

    Returns:
        (int): 64-bit child seed.
    """
    return splitmix64((master_seed + (index + 1) * GOLDEN_GAMMA) & MASK64)


def episode_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent numpy Generator for episode `index`."""
    seed = child_seed(master_seed, index)
    logger.debug(f"Episode {index}: child seed {seed}")
    return np.random.default_rng(seed)
