"""
Simulate capture-history datasets from a model's generative process
"""

import logging
from typing import Optional

import numpy as np

from ..core.base_model import HierarchicalModel
from ..core.exceptions import InvalidParameterException, SimulationException
from ..core.hmm import NOT_SEEN, ObservationHistory
from ..core.latent import sample_categorical
from ..data import CaptureDataset

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 1_000_000
MIN_BATCH = 4096
REDRAW_POLICY = "never-seen individuals are discarded and redrawn"


def _draw_batch(model: HierarchicalModel, theta: np.ndarray, size: int,
                num_occasions: int, rng: np.random.Generator) -> np.ndarray:
    """(size, k) observation codes for individuals entering at occasion 0"""
    matrices = model.model_matrices(theta, num_occasions)
    initial = model.simulation_initial_distribution(theta)
    num_obs = matrices.emissions.shape[1]

    codes = np.empty((size, num_occasions), dtype=np.int64)
    states = sample_categorical(rng, np.broadcast_to(initial, (size, initial.shape[0])))
    for t in range(num_occasions):
        if t > 0:
            states = sample_categorical(rng, matrices.transitions[t - 1][:, states].T)
        rows = sample_categorical(rng, matrices.emissions[t][:, states].T)
        codes[:, t] = np.where(rows == num_obs - 1, NOT_SEEN, rows + 1)
    return codes


def simulate_dataset(model: HierarchicalModel, theta: np.ndarray, n: int,
                     num_occasions: Optional[int] = None, seed: Optional[int] = None,
                     max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> CaptureDataset:
    """
    Draw n histories with at least one sighting each.

    Individuals are drawn in vectorised batches; those never seen are
    rejected and redrawn until n are accepted or ``max_attempts``
    individuals have been drawn. The policy and counts are recorded in the
    dataset metadata.
    """
    num_occasions = num_occasions or model.num_occasions
    if num_occasions is None:
        raise SimulationException(f"{model.name} needs an explicit number of occasions")
    if n < 1:
        raise SimulationException("n must be positive")
    theta = np.asarray(theta, dtype=float)
    if not np.isfinite(model.log_prior(theta)):
        raise InvalidParameterException(f"theta lies outside the support of {model.name}")

    rng = np.random.default_rng(seed)
    accepted = []
    num_accepted = 0
    attempts = 0

    while num_accepted < n:
        remaining_budget = max_attempts - attempts
        if remaining_budget <= 0:
            raise SimulationException(
                f"only {num_accepted} of {n} individuals were seen after {attempts} attempts; "
                f"detection may be zero"
            )
        size = min(remaining_budget, max(MIN_BATCH, 2 * (n - num_accepted)))
        codes = _draw_batch(model, theta, size, num_occasions, rng)

        seen = np.flatnonzero((codes != NOT_SEEN).any(axis=1))
        take = seen[:n - num_accepted]
        accepted.append(codes[take])
        num_accepted += take.size
        attempts += int(take[-1]) + 1 if num_accepted == n else size

    codes = np.concatenate(accepted, axis=0)
    histories = tuple(ObservationHistory(tuple(row)) for row in codes.tolist())
    metadata = {
        "model": model.name,
        "theta": [float(v) for v in theta],
        "seed": seed,
        "attempts": attempts,
        "rejected": attempts - n,
        "redraw_policy": REDRAW_POLICY,
        "max_attempts": max_attempts,
    }
    logger.info(f"Simulated {n} histories from {model.name} ({attempts - n} rejected)")
    return CaptureDataset(histories, num_occasions, model.num_obs, metadata)
