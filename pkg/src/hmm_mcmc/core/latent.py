"""
Latent state matrices for complete-data sampling
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchException, LatentStateException

logger = logging.getLogger(__name__)

BEFORE_FIRST = -1


@dataclass
class LatentStateMatrix:
    """
    One latent state per individual and occasion.

    ``states`` holds -1 before each individual's first occasion. ``sampled``
    marks the entries a Gibbs sweep updates: those whose observation does not
    pin the state.
    """

    states: np.ndarray
    sampled: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int64)
        self.sampled = np.asarray(self.sampled, dtype=bool)
        if self.states.shape != self.sampled.shape:
            raise DimensionMismatchException(
                f"states {self.states.shape} and mask {self.sampled.shape} must align"
            )

    @property
    def num_sampled(self) -> int:
        return int(self.sampled.sum())

    @property
    def shape(self):
        return self.states.shape

    def copy(self) -> "LatentStateMatrix":
        return LatentStateMatrix(self.states.copy(), self.sampled.copy())

    @classmethod
    def initialise(cls, first: np.ndarray, rows: np.ndarray, pinned: np.ndarray,
                   initial_dists: np.ndarray, transitions: np.ndarray,
                   emissions: np.ndarray) -> "LatentStateMatrix":
        """
        Greedy forward pass producing a positive-probability configuration.

        Args:
            first: (n,) first occasion of each individual
            rows: (n, k) emission row of each observation
            pinned: (k, num_obs) state pinned by each observation, or -1
            initial_dists: (n, num_states) distribution at the first occasion
            transitions: (k-1, num_states, num_states)
            emissions: (k, num_obs, num_states)

        The previous state is kept when it can still produce the observation;
        otherwise the lowest-index feasible state is taken.
        """
        n, k = rows.shape
        occasions = np.arange(k)[None, :]
        unpinned = pinned[occasions, rows] == BEFORE_FIRST
        sampled = (occasions >= first[:, None]) & unpinned

        states = np.full((n, k), BEFORE_FIRST, dtype=np.int64)
        individuals = np.arange(n)

        start = initial_dists * emissions[first, rows[individuals, first]]
        feasible = start > 0.0
        _raise_if_stuck(feasible, individuals, first)
        states[individuals, first] = feasible.argmax(axis=1)

        for t in range(1, k):
            idx = individuals[first < t]
            if idx.size == 0:
                continue
            previous = states[idx, t - 1]
            reachable = transitions[t - 1][:, previous].T
            feasible = (reachable * emissions[t][rows[idx, t]]) > 0.0
            _raise_if_stuck(feasible, idx, np.full(idx.size, t))
            keep = feasible[np.arange(idx.size), previous]
            states[idx, t] = np.where(keep, previous, feasible.argmax(axis=1))

        latents = cls(states, sampled)
        logger.debug(f"Initialised {n}x{k} latent states, {latents.num_sampled} sampled")
        return latents


def _raise_if_stuck(feasible: np.ndarray, individuals: np.ndarray, occasions: np.ndarray):
    stuck = ~feasible.any(axis=1)
    if stuck.any():
        where = int(np.argmax(stuck))
        position = (int(individuals[where]), int(occasions[where]))
        raise LatentStateException(
            f"no feasible latent state for individual {position[0]} at occasion {position[1]}",
            position=position,
        )


def sample_categorical(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """
    One categorical draw per row of ``probs`` (rows need not be normalised).

    Rows must have a positive sum.
    """
    cumulative = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0]) * cumulative[:, -1]
    draws = (u[:, None] >= cumulative).sum(axis=1)
    return np.minimum(draws, probs.shape[1] - 1)
