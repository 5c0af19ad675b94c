"""
efe.py

This module builds per-state Expected Free Energy reward vectors from a generative model:
expected utility plus epistemic value, each with its own weight.
"""

# General Imports
import logging
import numpy as np
from dataclasses import dataclass

# Custom Imports
from src.errors import NonFinite, ShapeMismatch
from src.model import GenerativeModel, safe_log

# Set up logging
logger = logging.getLogger('app')


@dataclass(frozen=True)
class EfeWeights:
    """
    Runtime trade-off between reward seeking and information seeking.

    Args:
        w_utility (float): Weight of the expected utility term.
        w_epistemic (float): Weight of the epistemic term.
    """
    w_utility: float = 1.0
    w_epistemic: float = 1.0

    def __post_init__(self):
        for name in ("w_utility", "w_epistemic"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class EfeRewardVector:
    """
    Per-state EFE gain g (higher is better). The cost-convention EFE is G = -g.

    Args:
        g (np.ndarray): Length-S gain vector in nats.
    """
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 1:
            raise ShapeMismatch(f"reward vector must be 1-D, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFinite("reward vector has non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def cost(self) -> np.ndarray:
        """The same vector in the cost convention (G = -g)."""
        return -self.g

    def __len__(self):
        return self.g.shape[0]


def utility_vector(model: GenerativeModel) -> np.ndarray:
    """
    Expected log-preference at each state: u[s] = sum_o A[o, s] * C[o].

    Args:
        model (GenerativeModel): The generative model.

    Returns:
        (np.ndarray): Length-S utility vector.
    """
    return model.A.T @ model.C


def epistemic_vector(model: GenerativeModel) -> np.ndarray:
    """
    Entropy of each likelihood column, H(A[:, s]).

    Zero for deterministic columns, ln(O) for uniform ones.

    Args:
        model (GenerativeModel): The generative model.

    Returns:
        (np.ndarray): Length-S non-negative vector.
    """
    A = model.A
    return -(A * safe_log(A)).sum(axis=0)


def efe_reward_vector(model: GenerativeModel, weights: EfeWeights = EfeWeights(),
                      ambiguity_averse: bool = False) -> EfeRewardVector:
    """
    Combines utility and epistemic value into a single gain vector.

    Cheap to recompute at any time; the successor matrix does not depend on it.

    Args:
        model (GenerativeModel): The generative model.
        weights (EfeWeights): Term weights.
        ambiguity_averse (bool): Penalise likelihood entropy instead of rewarding it.

    Returns:
        (EfeRewardVector): g = w_utility * utility + sign * w_epistemic * entropy.
    """
    sign = -1.0 if ambiguity_averse else 1.0
    g = weights.w_utility * utility_vector(model)
    if weights.w_epistemic:
        g = g + sign * weights.w_epistemic * epistemic_vector(model)
    logger.debug(f"EFE reward vector built with {weights} (ambiguity_averse={ambiguity_averse})")
    return EfeRewardVector(g)
