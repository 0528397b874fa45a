"""
Dirichlet transition probabilities realised as normalised Gamma(1, 1) weights
"""

from typing import List, Sequence

import numpy as np

from ..core.base_model import GammaPrior, ParameterSpec, ParameterSupport


def weight_specs(labels: Sequence[str]) -> List[ParameterSpec]:
    """
    One positive weight per (destination, source) pair.

    Ordered by source, then destination, so that each source's simplex is a
    contiguous run of parameters.
    """
    return [
        ParameterSpec(
            name=f"psi_w_{dest}_{source}",
            support=ParameterSupport.POSITIVE_REAL,
            prior=GammaPrior(1.0, 1.0),
            role="transition-weight",
        )
        for source in labels
        for dest in labels
    ]


def transition_probabilities(weights: np.ndarray, num_living: int) -> np.ndarray:
    """
    Column-normalised (destination, source) matrix from a flat weight vector.

    Each column sums to 1.
    """
    matrix = np.asarray(weights, dtype=float).reshape(num_living, num_living).T
    return matrix / matrix.sum(axis=0, keepdims=True)


def survival_transitions(psi: np.ndarray, survival: np.ndarray) -> np.ndarray:
    """
    Transition matrices over living states plus a final absorbing dead state.

    Args:
        psi: (R, R) or (m, R, R) movement probabilities between living states
        survival: (m, R) survival probability of each source state

    Returns:
        (m, R+1, R+1) column-stochastic matrices
    """
    survival = np.asarray(survival, dtype=float)
    m, num_living = survival.shape
    transitions = np.zeros((m, num_living + 1, num_living + 1))
    transitions[:, :num_living, :num_living] = psi * survival[:, None, :]
    transitions[:, num_living, :num_living] = 1.0 - survival
    transitions[:, num_living, num_living] = 1.0
    return transitions
