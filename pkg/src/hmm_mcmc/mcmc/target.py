"""
Posterior targets the MCMC engine samples from
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..core.base_model import HierarchicalModel
from ..core.exceptions import SamplerSchemeException
from ..core.hmm import emission_rows
from ..core.latent import LatentStateMatrix
from ..data import CaptureDataset, HistoryMatrix, ReducedDataset
from .latent_sampler import latent_gibbs_sweep

logger = logging.getLogger(__name__)

REDUCED_DATA_MESSAGE = (
    "latent-state sampling needs one latent sequence per individual; "
    "use the full dataset instead of its reduced representation"
)


class PosteriorTarget(ABC):
    """A log density over top-level parameters, possibly augmented with latent states"""

    has_latents: bool = False

    @property
    @abstractmethod
    def param_names(self) -> List[str]:
        pass

    @property
    def dimension(self) -> int:
        return len(self.param_names)

    @property
    @abstractmethod
    def initial_scales(self) -> np.ndarray:
        pass

    @abstractmethod
    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        pass

    @abstractmethod
    def log_posterior(self, theta: np.ndarray) -> float:
        pass

    def describe_failure(self, theta: np.ndarray) -> str:
        """Diagnostic for a non-finite log posterior at theta"""
        return f"log posterior is {self.log_posterior(theta)} at theta={np.round(theta, 6).tolist()}"

    def initialise_latents(self, theta: np.ndarray):
        pass

    def update_latents(self, theta: np.ndarray, rng: np.random.Generator):
        pass

    @property
    def num_latents(self) -> int:
        return 0


class FunctionTarget(PosteriorTarget):
    """Wraps a plain log-density function"""

    def __init__(self, log_density: Callable[[np.ndarray], float], dimension: int,
                 param_names: Optional[Sequence[str]] = None, initial_scale: float = 1.0,
                 initial_value: Optional[Sequence[float]] = None):
        self._log_density = log_density
        self._names = list(param_names) if param_names else [f"x{i}" for i in range(dimension)]
        self._scales = np.full(dimension, float(initial_scale))
        self._initial = (np.zeros(dimension) if initial_value is None
                         else np.asarray(initial_value, dtype=float))

    @property
    def param_names(self) -> List[str]:
        return self._names

    @property
    def initial_scales(self) -> np.ndarray:
        return self._scales

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        return self._initial.copy()

    def log_posterior(self, theta: np.ndarray) -> float:
        return float(self._log_density(theta))


class ModelTarget(PosteriorTarget):
    """Shared parameter handling for hierarchical-model posteriors"""

    def __init__(self, model: HierarchicalModel, batch: HistoryMatrix):
        self.model = model
        self.batch = batch

    @property
    def param_names(self) -> List[str]:
        return self.model.param_names

    @property
    def initial_scales(self) -> np.ndarray:
        return self.model.initial_scales

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        return self.model.initial_theta(rng)

    def describe_failure(self, theta: np.ndarray) -> str:
        prior = self.model.log_prior(theta)
        if not np.isfinite(prior):
            return f"theta lies outside the prior support of {self.model.name}"
        return f"log prior {prior:.4g} is finite but the likelihood is zero at the initial values"


class FilteredPosterior(ModelTarget):
    """Latent states summed out by forward filtering; works on raw or reduced data"""

    def __init__(self, model: HierarchicalModel, data):
        super().__init__(model, model.prepare(data))
        logger.debug(f"Filtered posterior over {self.batch.num_histories} histories "
                     f"(total weight {self.batch.weights.sum():.0f})")

    def log_posterior(self, theta: np.ndarray) -> float:
        return self.model.log_posterior_filtered(theta, self.batch)


class LatentStatePosterior(ModelTarget):
    """
    Joint posterior of theta and every individual's latent states.

    Needs one latent sequence per individual, so reduced data is rejected.
    """

    has_latents = True

    def __init__(self, model: HierarchicalModel, data):
        if isinstance(data, ReducedDataset) or (
            isinstance(data, HistoryMatrix) and np.any(data.weights != 1.0)
        ):
            raise SamplerSchemeException(REDUCED_DATA_MESSAGE)
        if not isinstance(data, (CaptureDataset, HistoryMatrix)):
            raise SamplerSchemeException(f"unsupported dataset type {type(data).__name__}")
        super().__init__(model, model.prepare(data))
        self.rows = emission_rows(self.batch.codes, model.num_obs)
        self.latents: Optional[LatentStateMatrix] = None

    def initialise_latents(self, theta: np.ndarray):
        self.latents = self.model.initialise_latents(theta, self.batch)
        logger.info(f"Sampling {self.latents.num_sampled} latent states")

    def log_posterior(self, theta: np.ndarray) -> float:
        return self.model.log_joint(theta, self.latents, self.batch)

    def update_latents(self, theta: np.ndarray, rng: np.random.Generator):
        latent_gibbs_sweep(self.model, theta, self.latents, self.batch, rng, rows=self.rows)

    @property
    def num_latents(self) -> int:
        return self.latents.num_sampled if self.latents is not None else 0
