"""
Random-walk Metropolis samplers for top-level parameters
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from ..core.exceptions import SamplerSchemeException
from .adaptation import adapt_covariance, adapt_scale, proposal_cholesky
from .scheme import AdaptationSettings, SamplerScheme

logger = logging.getLogger(__name__)

LogPosterior = Callable[[np.ndarray], float]


class StepResult(NamedTuple):
    theta: np.ndarray
    log_posterior: float
    accepted: bool


def metropolis_log_ratio(proposed: float, current: float) -> float:
    """Log acceptance ratio for a symmetric proposal"""
    if proposed == -np.inf:
        return -np.inf
    return proposed - current


def metropolis_accept(log_ratio: float, rng: np.random.Generator) -> bool:
    return bool(np.log(rng.random()) < log_ratio)


def univariate_rw_step(theta: np.ndarray, log_post: float, index: int, scale: float,
                       log_posterior: LogPosterior, rng: np.random.Generator) -> StepResult:
    """Normal random-walk proposal on one coordinate"""
    proposal = theta.copy()
    proposal[index] += scale * rng.standard_normal()
    proposed = log_posterior(proposal)
    if metropolis_accept(metropolis_log_ratio(proposed, log_post), rng):
        return StepResult(proposal, proposed, True)
    return StepResult(theta, log_post, False)


def block_rw_step(theta: np.ndarray, log_post: float, indices: Sequence[int],
                  cholesky: np.ndarray, log_posterior: LogPosterior,
                  rng: np.random.Generator) -> StepResult:
    """Multivariate normal random-walk proposal on a block of coordinates"""
    indices = np.asarray(indices)
    proposal = theta.copy()
    proposal[indices] += cholesky @ rng.standard_normal(indices.size)
    proposed = log_posterior(proposal)
    if metropolis_accept(metropolis_log_ratio(proposed, log_post), rng):
        return StepResult(proposal, proposed, True)
    return StepResult(theta, log_post, False)


class Sampler(ABC):
    """An adaptive Metropolis sampler owning a set of parameter indices"""

    def __init__(self, indices: Sequence[int], label: str, adaptation: AdaptationSettings):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.label = label
        self.adaptation = adaptation
        self.times_adapted = 0
        self.proposals = 0
        self.acceptances = 0
        self._window_accepted = 0
        self._window_steps = 0

    @abstractmethod
    def step(self, theta: np.ndarray, log_post: float, log_posterior: LogPosterior,
             rng: np.random.Generator) -> StepResult:
        pass

    @abstractmethod
    def _adapt(self, acceptance_rate: float):
        pass

    def _record(self, result: StepResult):
        self.proposals += 1
        self.acceptances += int(result.accepted)
        self._window_steps += 1
        self._window_accepted += int(result.accepted)
        if self.adaptation.enabled and self._window_steps == self.adaptation.interval:
            self._adapt(self._window_accepted / self._window_steps)
            self.times_adapted += 1
            self._window_steps = 0
            self._window_accepted = 0

    @property
    def acceptance_rate(self) -> float:
        return self.acceptances / self.proposals if self.proposals else 0.0


class UnivariateRwSampler(Sampler):
    """Scalar random walk, scale adapted toward the scalar acceptance target"""

    def __init__(self, index: int, scale: float, label: str,
                 adaptation: Optional[AdaptationSettings] = None):
        super().__init__([index], label, adaptation or AdaptationSettings())
        self.index = int(index)
        self.scale = float(scale)

    def step(self, theta, log_post, log_posterior, rng) -> StepResult:
        result = univariate_rw_step(theta, log_post, self.index, self.scale, log_posterior, rng)
        self._record(result)
        return result

    def _adapt(self, acceptance_rate: float):
        self.scale = adapt_scale(self.scale, acceptance_rate, self.adaptation.scalar_target,
                                 self.times_adapted)
        logger.debug(f"{self.label}: acceptance {acceptance_rate:.3f}, scale -> {self.scale:.4g}")


class BlockRwSampler(Sampler):
    """
    Multivariate random walk over a block.

    The proposal covariance is scale^2 * covariance. Both adapt: the
    covariance toward the scaled empirical covariance of the block, the
    scale toward the block acceptance target.
    """

    def __init__(self, indices: Sequence[int], scales: Sequence[float], label: str,
                 adaptation: Optional[AdaptationSettings] = None, jitter: float = 1e-10):
        super().__init__(indices, label, adaptation or AdaptationSettings())
        self.covariance = np.diag(np.asarray(scales, dtype=float) ** 2)
        self.scale = 1.0
        self.jitter = jitter
        self.cholesky = proposal_cholesky(self.covariance, self.scale)
        self._window = np.empty((self.adaptation.interval, self.indices.size))

    def step(self, theta, log_post, log_posterior, rng) -> StepResult:
        result = block_rw_step(theta, log_post, self.indices, self.cholesky, log_posterior, rng)
        self._window[self._window_steps] = result.theta[self.indices]
        self._record(result)
        return result

    def _adapt(self, acceptance_rate: float):
        # an all-rejected window carries no covariance information
        if self._window_accepted > 0:
            self.covariance = adapt_covariance(self.covariance, self._window, self.times_adapted,
                                               self.jitter)
        self.scale = adapt_scale(self.scale, acceptance_rate, self.adaptation.block_target,
                                 self.times_adapted)
        self.cholesky = proposal_cholesky(self.covariance, self.scale)
        logger.debug(f"{self.label}: acceptance {acceptance_rate:.3f}, scale -> {self.scale:.4g}")


def build_samplers(scheme: SamplerScheme, param_names: Sequence[str],
                   initial_scales: Sequence[float], jitter: float = 1e-10) -> List[Sampler]:
    """One sampler per block, in block order"""
    scheme.validate_for(len(param_names))
    if scheme.initial_scale is not None:
        initial_scales = [scheme.initial_scale] * len(param_names)

    samplers: List[Sampler] = []
    for block in scheme.blocks:
        if len(block) == 1:
            index = block[0]
            samplers.append(UnivariateRwSampler(index, initial_scales[index], param_names[index],
                                                scheme.adaptation))
        else:
            label = "block[" + ",".join(param_names[i] for i in block) + "]"
            samplers.append(BlockRwSampler(block, [initial_scales[i] for i in block], label,
                                           scheme.adaptation, jitter))
    if not samplers:
        raise SamplerSchemeException("scheme contains no samplers")
    return samplers
