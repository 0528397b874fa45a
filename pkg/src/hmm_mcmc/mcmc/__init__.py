"""
MCMC engine: schemes, samplers, latent-state Gibbs updates and chain I/O
"""

from .scheme import AdaptationSettings, SamplerScheme
from .adaptation import adapt_covariance, adapt_scale, adaptation_gamma, proposal_cholesky
from .samplers import (
    BlockRwSampler,
    Sampler,
    StepResult,
    UnivariateRwSampler,
    block_rw_step,
    build_samplers,
    metropolis_log_ratio,
    univariate_rw_step,
)
from .latent_sampler import enumerate_full_conditional, latent_gibbs_step, latent_gibbs_sweep
from .target import (
    FilteredPosterior,
    FunctionTarget,
    LatentStatePosterior,
    PosteriorTarget,
    REDUCED_DATA_MESSAGE,
)
from .engine import ChainOutput, run_chain, run_chains, run_mcmc
from .persistence import load_chain, save_chain

__all__ = [
    "AdaptationSettings",
    "SamplerScheme",
    "adapt_covariance",
    "adapt_scale",
    "adaptation_gamma",
    "proposal_cholesky",
    "BlockRwSampler",
    "Sampler",
    "StepResult",
    "UnivariateRwSampler",
    "block_rw_step",
    "build_samplers",
    "metropolis_log_ratio",
    "univariate_rw_step",
    "enumerate_full_conditional",
    "latent_gibbs_step",
    "latent_gibbs_sweep",
    "FilteredPosterior",
    "FunctionTarget",
    "LatentStatePosterior",
    "PosteriorTarget",
    "REDUCED_DATA_MESSAGE",
    "ChainOutput",
    "run_chain",
    "run_chains",
    "run_mcmc",
    "load_chain",
    "save_chain",
]
