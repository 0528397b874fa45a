"""
hmm-mcmc

Bayesian capture-recapture models as hidden Markov models, with MCMC
sampling by latent states, forward filtering, reduced representations
and automated parameter blocking.
"""

__version__ = "1.0.0"
__author__ = "hmm-mcmc developers"
__license__ = "MIT"
__description__ = "MCMC for hierarchical HMMs: latent-state, filtering and blocked sampling strategies"

from .core.exceptions import *  # noqa: E402,F401,F403
from .core import (  # noqa: E402
    DiscreteHmmSpec,
    HierarchicalModel,
    ObservationHistory,
    cjs_log_lik,
    forward_filter_log_lik,
    latent_enumeration_log_lik,
)
from .config.settings import load_config, create_default_config_file  # noqa: E402
from .data import (  # noqa: E402
    CaptureDataset,
    ReducedDataset,
    load_data,
    reduce_dataset,
    write_dataset,
)
from .models import get_model, simulate_dataset  # noqa: E402
from .mcmc import ChainOutput, SamplerScheme, run_mcmc  # noqa: E402
from .diagnostics import (  # noqa: E402
    EfficiencyReport,
    compare_strategies,
    effective_sample_size,
    efficiency_report,
)
from .autoblock import auto_block, run_autoblock  # noqa: E402

__all__ = [
    "DiscreteHmmSpec",
    "HierarchicalModel",
    "ObservationHistory",
    "cjs_log_lik",
    "forward_filter_log_lik",
    "latent_enumeration_log_lik",
    "load_config",
    "create_default_config_file",
    "CaptureDataset",
    "ReducedDataset",
    "load_data",
    "reduce_dataset",
    "write_dataset",
    "get_model",
    "simulate_dataset",
    "ChainOutput",
    "SamplerScheme",
    "run_mcmc",
    "EfficiencyReport",
    "compare_strategies",
    "effective_sample_size",
    "efficiency_report",
    "auto_block",
    "run_autoblock",
    # Exceptions
    "HmmMcmcException",
    "DimensionMismatchException",
    "InvalidMatrixException",
    "InvalidParameterException",
    "InvalidHistoryException",
    "EnumerationLimitException",
    "DatasetParseException",
    "ModelSpecificationException",
    "SamplerSchemeException",
    "InitializationException",
    "LatentStateException",
    "SimulationException",
    "DiagnosticsException",
    "ConfigurationException",
]
