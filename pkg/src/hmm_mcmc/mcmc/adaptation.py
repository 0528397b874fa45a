"""
Diminishing adaptation of random-walk proposals

Every ``interval`` iterations a sampler compares its acceptance rate over
the window with the target and rescales its proposal. The step size
gamma = 1 / (times_adapted + 3)^0.8 shrinks with every adaptation, so the
chain is asymptotically a fixed-kernel Metropolis chain.
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)

OPTIMAL_SCALING = 2.38 ** 2
ADAPTATION_DECAY = 0.8
SCALE_RATE = 10.0


def adaptation_gamma(times_adapted: int) -> float:
    return 1.0 / (times_adapted + 3.0) ** ADAPTATION_DECAY


def adapt_scale(scale: float, acceptance_rate: float, target: float, times_adapted: int) -> float:
    """Raise the scale when acceptance is above target, lower it when below"""
    gamma = adaptation_gamma(times_adapted)
    return float(scale * np.exp(SCALE_RATE * gamma * (acceptance_rate - target)))


def adapt_covariance(covariance: np.ndarray, window: np.ndarray, times_adapted: int,
                     jitter: float = 1e-10) -> np.ndarray:
    """
    Move the proposal covariance toward (2.38^2 / d) (C + jitter I).

    Args:
        covariance: current (d, d) proposal covariance
        window: (w, d) block values recorded over the last window
        times_adapted: adaptations performed so far
        jitter: ridge added to the empirical covariance C
    """
    d = covariance.shape[0]
    empirical = np.atleast_2d(np.cov(window, rowvar=False))
    optimal = OPTIMAL_SCALING / d * (empirical + jitter * np.eye(d))
    gamma = adaptation_gamma(times_adapted)
    return covariance + gamma * (optimal - covariance)


def proposal_cholesky(covariance: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """
    Lower Cholesky factor of scale^2 * covariance.

    Falls back to the diagonal when the matrix is not positive definite.
    """
    try:
        return scale * np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError:
        diagonal = np.clip(np.diag(covariance), np.finfo(float).tiny, None)
        logger.warning("Proposal covariance is not positive definite; using its diagonal")
        return scale * np.diag(np.sqrt(diagonal))
