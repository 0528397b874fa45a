"""
Core HMM kernels, model base class and exceptions
"""

from .exceptions import *  # noqa: F401,F403
from .hmm import (
    NOT_SEEN,
    DiscreteHmmSpec,
    FilterStep,
    ObservationHistory,
    emission_rows,
    forward_filter_distributions,
    forward_filter_log_lik,
    forward_filter_log_lik_batch,
    latent_enumeration_log_lik,
)
from .cjs import CjsParams, cjs_as_hmm, cjs_log_lik, cjs_log_lik_batch, never_seen_again
from .latent import LatentStateMatrix, sample_categorical
from .base_model import (
    GammaPrior,
    HierarchicalModel,
    LikelihoodMode,
    ModelMatrices,
    ParameterSpec,
    ParameterSupport,
    UniformPrior,
)

__all__ = [
    "NOT_SEEN",
    "DiscreteHmmSpec",
    "FilterStep",
    "ObservationHistory",
    "emission_rows",
    "forward_filter_distributions",
    "forward_filter_log_lik",
    "forward_filter_log_lik_batch",
    "latent_enumeration_log_lik",
    "CjsParams",
    "cjs_as_hmm",
    "cjs_log_lik",
    "cjs_log_lik_batch",
    "never_seen_again",
    "LatentStateMatrix",
    "sample_categorical",
    "GammaPrior",
    "HierarchicalModel",
    "LikelihoodMode",
    "ModelMatrices",
    "ParameterSpec",
    "ParameterSupport",
    "UniformPrior",
]
