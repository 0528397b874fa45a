"""
Closed-form Cormack-Jolly-Seber likelihood for single-state capture-recapture

Occasions are 0-based. ``survival[t]`` is the probability of surviving from
occasion t to t+1 and ``detection[t]`` the probability of being seen at
occasion t when alive. A history is conditioned on its first capture.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchException, InvalidHistoryException, InvalidParameterException
from .hmm import NOT_SEEN, DiscreteHmmSpec, ObservationHistory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CjsParams:
    """Per-occasion survival and detection probabilities"""

    survival: np.ndarray
    detection: np.ndarray

    def __post_init__(self):
        survival = np.atleast_1d(np.asarray(self.survival, dtype=float))
        detection = np.atleast_1d(np.asarray(self.detection, dtype=float))
        if survival.shape != detection.shape:
            raise DimensionMismatchException(
                f"survival {survival.shape} and detection {detection.shape} must align"
            )
        for name, values in (("survival", survival), ("detection", detection)):
            if not np.all((values >= 0.0) & (values <= 1.0)):
                raise InvalidParameterException(f"{name} probabilities must lie in [0, 1]")
        object.__setattr__(self, "survival", survival)
        object.__setattr__(self, "detection", detection)

    @classmethod
    def constant(cls, phi: float, p: float, num_occasions: int) -> "CjsParams":
        return cls(np.full(num_occasions, phi), np.full(num_occasions, p))

    @property
    def num_occasions(self) -> int:
        return int(self.survival.shape[0])


def never_seen_again(params: CjsParams) -> np.ndarray:
    """chi[t]: probability of no sighting after occasion t given alive at t"""
    k = params.num_occasions
    chi = np.ones(k)
    for t in range(k - 2, -1, -1):
        phi = params.survival[t]
        chi[t] = 1.0 - phi + phi * (1.0 - params.detection[t + 1]) * chi[t + 1]
    return chi


def cjs_log_lik_batch(params: CjsParams, seen: np.ndarray, first: np.ndarray,
                      last: np.ndarray) -> np.ndarray:
    """
    Vectorised closed-form log-likelihood.

    Args:
        params: survival/detection per occasion
        seen: (n, k) boolean sighting matrix
        first: (n,) first-capture occasion
        last: (n,) final-sighting occasion

    Returns:
        (n,) log-likelihoods
    """
    seen = np.asarray(seen, dtype=bool)
    occasions = np.arange(seen.shape[1])[None, :]
    first = np.asarray(first)[:, None]
    last = np.asarray(last)[:, None]

    with np.errstate(divide="ignore"):
        log_phi = np.log(params.survival)
        log_p = np.log(params.detection)
        log_q = np.log1p(-params.detection)
        log_chi = np.log(never_seen_again(params))

    survived = (occasions >= first) & (occasions < last)
    observed = (occasions > first) & (occasions <= last)
    detection_terms = np.where(seen, log_p[None, :], log_q[None, :])

    log_lik = (np.where(survived, log_phi[None, :], 0.0).sum(axis=1)
               + np.where(observed, detection_terms, 0.0).sum(axis=1)
               + log_chi[last[:, 0]])
    return log_lik


def cjs_log_lik(params: CjsParams, history: ObservationHistory) -> float:
    """Closed-form log-likelihood of one binary capture history"""
    codes = np.asarray(history.codes)
    if codes.shape[0] != params.num_occasions:
        raise DimensionMismatchException(
            f"history has {codes.shape[0]} occasions, parameters cover {params.num_occasions}"
        )
    if np.any(codes > 1):
        raise InvalidHistoryException(f"CJS histories are binary, got {history}")
    if not history.has_sighting:
        raise InvalidHistoryException(f"history {history} contains no sighting")
    if codes[history.first_occasion] == NOT_SEEN:
        raise InvalidHistoryException(
            f"history {history} is not seen at its first occasion {history.first_occasion}"
        )

    result = cjs_log_lik_batch(
        params,
        seen=(codes == 1)[None, :],
        first=np.array([history.first_occasion]),
        last=np.array([history.last_sighting]),
    )
    return float(result[0])


def cjs_as_hmm(params: CjsParams, first_occasion: int = 0) -> DiscreteHmmSpec:
    """
    The equivalent two-state absorbing HMM for occasions from ``first_occasion``.

    States are (alive, dead); observation rows are (seen, not seen).
    The first occasion is a certain sighting, matching the conditioning on
    first capture of the closed form.
    """
    phi = params.survival[first_occasion:-1]
    p = params.detection[first_occasion:]
    transitions = np.zeros((phi.shape[0], 2, 2))
    transitions[:, 0, 0] = phi
    transitions[:, 1, 0] = 1.0 - phi
    transitions[:, 1, 1] = 1.0
    emissions = np.zeros((p.shape[0], 2, 2))
    emissions[:, 0, 0] = p
    emissions[:, 1, 0] = 1.0 - p
    emissions[:, 1, 1] = 1.0
    emissions[0, 0, 0] = 1.0
    emissions[0, 1, 0] = 0.0
    return DiscreteHmmSpec(np.array([1.0, 0.0]), transitions, emissions)
