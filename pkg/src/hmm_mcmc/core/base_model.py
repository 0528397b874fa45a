"""
Base class for hierarchical models with embedded discrete HMMs
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from .cjs import CjsParams, cjs_log_lik_batch
from .exceptions import (
    DimensionMismatchException,
    InvalidHistoryException,
    LatentStateException,
    ModelSpecificationException,
)
from .hmm import DiscreteHmmSpec, ObservationHistory, emission_rows, forward_filter_log_lik_batch
from .latent import LatentStateMatrix

if TYPE_CHECKING:
    from ..data import HistoryMatrix

logger = logging.getLogger(__name__)


class ParameterSupport(str, Enum):
    UNIT_INTERVAL = "unit_interval"
    POSITIVE_REAL = "positive_real"


class LikelihoodMode(str, Enum):
    MATRIX_FILTER = "matrix_filter"
    CJS_CLOSED_FORM = "cjs_closed_form"


@dataclass(frozen=True)
class UniformPrior:
    """Uniform(0, 1) prior"""

    support = ParameterSupport.UNIT_INTERVAL

    def log_density(self, value: float) -> float:
        return 0.0 if 0.0 <= value <= 1.0 else -np.inf

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform())


@dataclass(frozen=True)
class GammaPrior:
    """Gamma(shape, rate) prior"""

    shape: float = 1.0
    rate: float = 1.0

    support = ParameterSupport.POSITIVE_REAL

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ModelSpecificationException("Gamma shape and rate must be positive")

    def log_density(self, value: float) -> float:
        if value <= 0.0:
            return -np.inf
        return float(self.shape * np.log(self.rate) - gammaln(self.shape)
                     + (self.shape - 1.0) * np.log(value) - self.rate * value)

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.gamma(self.shape, 1.0 / self.rate))


Prior = Union[UniformPrior, GammaPrior]


@dataclass(frozen=True)
class ParameterSpec:
    """A named top-level parameter and its prior"""

    name: str
    support: ParameterSupport
    prior: Prior
    role: str = ""

    def __post_init__(self):
        if self.prior.support != self.support:
            raise ModelSpecificationException(
                f"prior {type(self.prior).__name__} does not match support {self.support.value} "
                f"of parameter {self.name}"
            )

    @property
    def initial_scale(self) -> float:
        """Starting random-walk proposal scale"""
        return 0.1 if self.support == ParameterSupport.UNIT_INTERVAL else 0.5


@dataclass(frozen=True)
class ModelMatrices:
    """
    Matrices of a model at one parameter value, indexed by absolute occasion.

    ``transitions[t]`` moves occasion t to t+1; ``emissions[t]`` is used at occasion t.
    """

    transitions: np.ndarray
    emissions: np.ndarray

    @property
    def num_occasions(self) -> int:
        return int(self.emissions.shape[0])


class HierarchicalModel(ABC):
    """
    A parameter vector with priors and a map from parameters to per-history HMMs.

    Subclasses provide the matrices and initial distributions; likelihood,
    prior and joint evaluation live here.
    """

    name: str = "model"
    likelihood_mode: LikelihoodMode = LikelihoodMode.MATRIX_FILTER
    condition_on_first: bool = True
    requires_sighting: bool = True
    num_occasions: Optional[int] = None

    def __init__(self, params: Sequence[ParameterSpec], num_states: int, num_obs: int):
        self.params: Tuple[ParameterSpec, ...] = tuple(params)
        self.num_states = num_states
        self.num_obs = num_obs

        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ModelSpecificationException(f"duplicate parameter names in {self.name}")

        self._unit = np.array([p.support == ParameterSupport.UNIT_INTERVAL for p in self.params])
        self._gamma_shape = np.array([getattr(p.prior, "shape", 1.0) for p in self.params])
        self._gamma_rate = np.array([getattr(p.prior, "rate", 1.0) for p in self.params])
        self._gamma_const = np.where(
            self._unit, 0.0,
            self._gamma_shape * np.log(self._gamma_rate) - gammaln(self._gamma_shape)
        )

    # ------------------------------------------------------------------
    # structure supplied by subclasses

    @abstractmethod
    def model_matrices(self, theta: np.ndarray, num_occasions: int) -> ModelMatrices:
        """Transition and emission matrices for every occasion"""
        pass

    @abstractmethod
    def initial_distribution(self, theta: np.ndarray, first_code: int) -> np.ndarray:
        """State distribution at a history's first occasion"""
        pass

    @abstractmethod
    def simulation_initial_distribution(self, theta: np.ndarray) -> np.ndarray:
        """State distribution at occasion 0 when simulating data"""
        pass

    def initial_distributions(self, theta: np.ndarray, first_codes: np.ndarray) -> np.ndarray:
        """(n, num_states) initial distributions, one per first observation code"""
        codes, inverse = np.unique(np.asarray(first_codes, dtype=np.int64), return_inverse=True)
        table = np.stack([self.initial_distribution(theta, int(c)) for c in codes])
        return table[inverse.reshape(-1)]

    def cjs_params(self, theta: np.ndarray, num_occasions: int) -> CjsParams:
        """Survival/detection vectors for the closed-form likelihood"""
        raise ModelSpecificationException(f"{self.name} has no closed-form CJS likelihood")

    def default_theta(self) -> np.ndarray:
        """A plausible parameter value for simulation"""
        return np.array([0.5 if unit else 1.0 for unit in self._unit])

    # ------------------------------------------------------------------
    # parameters and prior

    @property
    def dimension(self) -> int:
        return len(self.params)

    @property
    def param_names(self) -> List[str]:
        return [p.name for p in self.params]

    @property
    def initial_scales(self) -> np.ndarray:
        return np.array([p.initial_scale for p in self.params])

    def _check_theta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,):
            raise DimensionMismatchException(
                f"{self.name} expects {self.dimension} parameters, got shape {theta.shape}"
            )
        return theta

    def log_prior(self, theta: np.ndarray) -> float:
        """Sum of log prior densities, -inf outside the support"""
        theta = self._check_theta(theta)
        unit = self._unit
        if np.any((theta[unit] < 0.0) | (theta[unit] > 1.0)) or np.any(theta[~unit] <= 0.0):
            return -np.inf
        positive = theta[~unit]
        shape = self._gamma_shape[~unit]
        rate = self._gamma_rate[~unit]
        log_gamma = (self._gamma_const[~unit] + (shape - 1.0) * np.log(positive) - rate * positive)
        return float(log_gamma.sum())

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        """Prior draws for unit-interval parameters, 1.0 for positive weights"""
        return np.array([
            p.prior.sample(rng) if p.support == ParameterSupport.UNIT_INTERVAL else 1.0
            for p in self.params
        ])

    # ------------------------------------------------------------------
    # per-history HMMs

    def build_hmm(self, theta: np.ndarray, history: ObservationHistory) -> DiscreteHmmSpec:
        """The HMM for one history, covering occasions from its first occasion"""
        theta = self._check_theta(theta)
        matrices = self.model_matrices(theta, history.num_occasions)
        first = history.first_occasion
        return DiscreteHmmSpec(
            initial_dist=self.initial_distribution(theta, history.codes[first]),
            transitions=matrices.transitions[first:],
            emissions=matrices.emissions[first:],
        )

    def history_log_liks(self, theta: np.ndarray, batch: "HistoryMatrix",
                         mode: Optional[LikelihoodMode] = None) -> np.ndarray:
        """Per-history log-likelihoods for every row of ``batch``"""
        theta = self._check_theta(theta)
        mode = mode or self.likelihood_mode
        k = batch.num_occasions

        if mode == LikelihoodMode.CJS_CLOSED_FORM:
            return cjs_log_lik_batch(self.cjs_params(theta, k), batch.seen, batch.first, batch.last)

        matrices = self.model_matrices(theta, k)
        rows = emission_rows(batch.codes, self.num_obs)
        log_liks = np.empty(batch.num_histories)
        for (first, code), index in batch.groups().items():
            log_liks[index] = forward_filter_log_lik_batch(
                self.initial_distribution(theta, code),
                matrices.transitions[first:],
                matrices.emissions[first:],
                rows[index, first:],
                condition_on_first=self.condition_on_first,
            )
        return log_liks

    def prepare(self, data) -> "HistoryMatrix":
        """
        Array view of a dataset, checked against the model.

        Every history must use codes of the model alphabet and, for
        capture-recapture models, contain at least one sighting. A
        HistoryMatrix is taken as already prepared.
        """
        from ..data import HistoryMatrix

        if isinstance(data, HistoryMatrix):
            return data
        batch = HistoryMatrix.from_data(data)
        if batch.codes.size and int(batch.codes.max()) >= self.num_obs:
            raise DimensionMismatchException(
                f"{self.name} has {self.num_obs} observation codes, data uses {int(batch.codes.max())}"
            )
        if self.requires_sighting:
            never_seen = ~batch.seen.any(axis=1)
            if never_seen.any():
                raise InvalidHistoryException(
                    f"{int(never_seen.sum())} histories contain no sighting "
                    f"(first at row {int(np.argmax(never_seen))})"
                )
        if self.num_occasions is not None and batch.num_occasions != self.num_occasions:
            raise DimensionMismatchException(
                f"{self.name} covers {self.num_occasions} occasions, data has {batch.num_occasions}"
            )
        return batch

    def log_likelihood_filtered(self, theta: np.ndarray, data,
                                mode: Optional[LikelihoodMode] = None) -> float:
        """
        Filtered log-likelihood of a raw or reduced dataset.

        Each history's term is weighted by its multiplicity.
        """
        batch = self.prepare(data)
        log_liks = self.history_log_liks(theta, batch, mode)
        return _weighted_sum(log_liks, batch.weights)

    def log_posterior_filtered(self, theta: np.ndarray, data) -> float:
        prior = self.log_prior(theta)
        if not np.isfinite(prior):
            return -np.inf
        return prior + self.log_likelihood_filtered(theta, data)

    # ------------------------------------------------------------------
    # latent states

    def pinned_states(self, theta: np.ndarray, num_occasions: int) -> np.ndarray:
        """
        (k, num_obs) table of the state an observation pins, or -1.

        An observation pins the state when its emission row has a single
        positive entry.
        """
        emissions = self.model_matrices(self._check_theta(theta), num_occasions).emissions
        positive = emissions > 0.0
        pinned = np.where(positive.sum(axis=2) == 1, positive.argmax(axis=2), -1)
        return pinned

    def initialise_latents(self, theta: np.ndarray, data) -> LatentStateMatrix:
        """A positive-probability latent configuration for the dataset"""
        batch = self.prepare(data)
        theta = self._check_theta(theta)
        k = batch.num_occasions
        matrices = self.model_matrices(theta, k)
        latents = LatentStateMatrix.initialise(
            first=batch.first,
            rows=emission_rows(batch.codes, self.num_obs),
            pinned=self.pinned_states(theta, k),
            initial_dists=self.initial_distributions(theta, batch.first_codes),
            transitions=matrices.transitions,
            emissions=matrices.emissions,
        )
        if not np.isfinite(self.complete_data_log_lik(theta, latents, batch)):
            raise LatentStateException(
                f"initial latent states of {self.name} have zero probability"
            )
        return latents

    def log_joint(self, theta: np.ndarray, latents: LatentStateMatrix, data) -> float:
        """Log prior plus the complete-data log-likelihood at the given latent states"""
        prior = self.log_prior(theta)
        if not np.isfinite(prior):
            return -np.inf
        return prior + self.complete_data_log_lik(theta, latents, data)

    def complete_data_log_lik(self, theta: np.ndarray, latents: LatentStateMatrix, data) -> float:
        batch = self.prepare(data)
        if latents.states.shape != batch.codes.shape:
            raise DimensionMismatchException(
                f"latent matrix {latents.states.shape} does not match data {batch.codes.shape}"
            )
        theta = self._check_theta(theta)
        k = batch.num_occasions
        n = batch.num_histories
        matrices = self.model_matrices(theta, k)
        rows = emission_rows(batch.codes, self.num_obs)
        states = latents.states
        individuals = np.arange(n)
        first = batch.first

        with np.errstate(divide="ignore", invalid="ignore"):
            # first occasion: initial distribution, conditioned on the first observation
            first_states = states[individuals, first]
            first_rows = rows[individuals, first]
            initial = self.initial_distributions(theta, batch.first_codes)
            first_emission = matrices.emissions[first, first_rows]
            if self.condition_on_first:
                joint = initial * first_emission
                norm = joint.sum(axis=1)
                total = np.log(joint[individuals, first_states]) - np.log(norm)
            else:
                total = (np.log(initial[individuals, first_states])
                         + np.log(first_emission[individuals, first_states]))

            for t in range(1, k):
                active = t > first
                if not active.any():
                    continue
                idx = individuals[active]
                previous = states[idx, t - 1]
                current = states[idx, t]
                step = (np.log(matrices.transitions[t - 1][current, previous])
                        + np.log(matrices.emissions[t][rows[idx, t], current]))
                total[idx] += step

        total = np.where(np.isnan(total), -np.inf, total)
        return _weighted_sum(total, batch.weights)


def _weighted_sum(log_liks: np.ndarray, weights: np.ndarray) -> float:
    """Multiplicity-weighted sum that keeps -inf instead of producing nan"""
    if np.any(np.isneginf(log_liks) & (weights > 0)):
        return -np.inf
    return float(np.dot(weights, log_liks))
