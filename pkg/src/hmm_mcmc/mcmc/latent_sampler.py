"""
Categorical Gibbs updates for latent states
"""

import logging
from typing import Optional

import numpy as np

from ..core.base_model import HierarchicalModel, ModelMatrices
from ..core.exceptions import LatentStateException
from ..core.hmm import emission_rows
from ..core.latent import LatentStateMatrix, sample_categorical

logger = logging.getLogger(__name__)


def full_conditional_weights(matrices: ModelMatrices, initial_dists: np.ndarray,
                             rows: np.ndarray, states: np.ndarray, first: np.ndarray,
                             individuals: np.ndarray, t: int) -> np.ndarray:
    """
    Unnormalised full conditional of x[i, t] for each listed individual.

    The weight of state x is f(x | x[i, t-1]) g(y[i, t] | x) f(x[i, t+1] | x);
    at an individual's first occasion the initial distribution replaces the
    incoming transition, and at the last occasion the outgoing factor is absent.
    """
    emissions = matrices.emissions[t][rows[individuals, t]]
    incoming = initial_dists[individuals]
    at_first = first[individuals] == t
    if not np.all(at_first):
        previous = np.maximum(states[individuals, t - 1], 0)
        moved = matrices.transitions[t - 1][:, previous].T
        incoming = np.where(at_first[:, None], incoming, moved)

    weights = incoming * emissions
    if t < matrices.num_occasions - 1:
        following = states[individuals, t + 1]
        weights = weights * matrices.transitions[t][following, :]
    return weights


def _normalise(weights: np.ndarray, individuals: np.ndarray, t: int) -> np.ndarray:
    totals = weights.sum(axis=1)
    if np.any(totals <= 0.0) or not np.all(np.isfinite(totals)):
        bad = int(individuals[np.argmax(~(totals > 0.0))])
        raise LatentStateException(
            f"full conditional of latent state ({bad}, {t}) has no support",
            position=(bad, t),
        )
    return weights / totals[:, None]


def latent_gibbs_step(model: HierarchicalModel, theta: np.ndarray, latents: LatentStateMatrix,
                      data, i: int, t: int, rng: np.random.Generator) -> int:
    """Draw x[i, t] from its exact categorical full conditional, in place"""
    if not latents.sampled[i, t]:
        raise LatentStateException(f"latent state ({i}, {t}) is not sampled", position=(i, t))
    batch = model.prepare(data)
    matrices = model.model_matrices(theta, batch.num_occasions)
    initial = model.initial_distributions(theta, batch.first_codes)
    individuals = np.array([i])
    weights = full_conditional_weights(matrices, initial, emission_rows(batch.codes, model.num_obs),
                                       latents.states, batch.first, individuals, t)
    probs = _normalise(weights, individuals, t)
    value = int(sample_categorical(rng, probs)[0])
    latents.states[i, t] = value
    return value


def latent_gibbs_sweep(model: HierarchicalModel, theta: np.ndarray, latents: LatentStateMatrix,
                       data, rng: np.random.Generator,
                       rows: Optional[np.ndarray] = None) -> LatentStateMatrix:
    """
    Update every sampled latent state once, occasion by occasion.

    Individuals are conditionally independent given theta, so all sampled
    entries of one occasion are drawn together.
    """
    batch = model.prepare(data)
    matrices = model.model_matrices(theta, batch.num_occasions)
    initial = model.initial_distributions(theta, batch.first_codes)
    if rows is None:
        rows = emission_rows(batch.codes, model.num_obs)

    for t in range(batch.num_occasions):
        individuals = np.flatnonzero(latents.sampled[:, t])
        if individuals.size == 0:
            continue
        weights = full_conditional_weights(matrices, initial, rows, latents.states,
                                           batch.first, individuals, t)
        probs = _normalise(weights, individuals, t)
        latents.states[individuals, t] = sample_categorical(rng, probs)
    return latents


def enumerate_full_conditional(model: HierarchicalModel, theta: np.ndarray,
                               latents: LatentStateMatrix, data, i: int, t: int) -> np.ndarray:
    """Normalised full conditional of x[i, t] computed from the joint density"""
    log_joint = np.empty(model.num_states)
    trial = latents.copy()
    for state in range(model.num_states):
        trial.states[i, t] = state
        log_joint[state] = model.complete_data_log_lik(theta, trial, data)
    with np.errstate(invalid="ignore"):
        weights = np.exp(log_joint - np.max(log_joint))
    return weights / weights.sum()
