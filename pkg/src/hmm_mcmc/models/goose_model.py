"""
Multistate model with site-dependent survival and detection (Goose)
"""

import logging

import numpy as np

from ..core.base_model import (
    HierarchicalModel,
    ModelMatrices,
    ParameterSpec,
    ParameterSupport,
    UniformPrior,
)
from ..core.exceptions import ModelSpecificationException
from .transition_weights import survival_transitions, transition_probabilities, weight_specs

logger = logging.getLogger(__name__)


class GooseModel(HierarchicalModel):
    """
    Living states are sites 1..R, followed by an absorbing dead state.

    Parameters, in order:
        phi_r      survival at site r
        psi_w_r_s  movement weight from site s to site r, shared by all intervals
        p_r_t      detection at site r on occasion t = 2..k

    Movement is the same on every interval rather than varying with t, which
    keeps the model at R + R^2 + R(k - 1) parameters: 21 for three sites and
    four occasions.

    Observation codes 1..R are sightings at a site, 0 is "not seen". The
    first-occasion sighting is certain: histories are conditioned on it.
    """

    name = "goose"
    condition_on_first = True

    def __init__(self, num_occasions: int = 4, num_sites: int = 3):
        if num_occasions < 2:
            raise ModelSpecificationException("the model needs at least two occasions")
        if num_sites < 1:
            raise ModelSpecificationException("the model needs at least one site")
        self.num_occasions = num_occasions
        self.num_sites = num_sites
        labels = [str(r) for r in range(1, num_sites + 1)]

        params = [
            ParameterSpec(f"phi_{r}", ParameterSupport.UNIT_INTERVAL, UniformPrior(), "survival")
            for r in labels
        ]
        params += weight_specs(labels)
        params += [
            ParameterSpec(f"p_{r}_{t}", ParameterSupport.UNIT_INTERVAL, UniformPrior(), "detection")
            for t in range(2, num_occasions + 1)
            for r in labels
        ]
        super().__init__(params, num_states=num_sites + 1, num_obs=num_sites + 1)

        self._weights = slice(num_sites, num_sites + num_sites ** 2)
        self._detection = slice(num_sites + num_sites ** 2, None)

    def psi(self, theta: np.ndarray) -> np.ndarray:
        """Movement probabilities between sites, columns are sources"""
        theta = self._check_theta(theta)
        return transition_probabilities(theta[self._weights], self.num_sites)

    def detection(self, theta: np.ndarray) -> np.ndarray:
        """(k, R) detection probabilities; the first occasion is certain"""
        theta = self._check_theta(theta)
        p = np.ones((self.num_occasions, self.num_sites))
        p[1:] = theta[self._detection].reshape(self.num_occasions - 1, self.num_sites)
        return p

    def model_matrices(self, theta: np.ndarray, num_occasions: int) -> ModelMatrices:
        if num_occasions != self.num_occasions:
            raise ModelSpecificationException(
                f"{self.name} covers {self.num_occasions} occasions, not {num_occasions}"
            )
        theta = self._check_theta(theta)
        R = self.num_sites
        survival = np.repeat(theta[None, :R], num_occasions - 1, axis=0)
        transitions = survival_transitions(self.psi(theta), survival)

        p = self.detection(theta)
        emissions = np.zeros((num_occasions, R + 1, R + 1))
        sites = np.arange(R)
        emissions[:, sites, sites] = p
        emissions[:, R, :R] = 1.0 - p
        emissions[:, R, R] = 1.0
        return ModelMatrices(transitions, emissions)

    def initial_distribution(self, theta: np.ndarray, first_code: int) -> np.ndarray:
        if not 1 <= first_code <= self.num_sites:
            raise ModelSpecificationException(
                f"first observation code {first_code} does not identify a site"
            )
        initial = np.zeros(self.num_states)
        initial[first_code - 1] = 1.0
        return initial

    def simulation_initial_distribution(self, theta: np.ndarray) -> np.ndarray:
        """Uniform over sites"""
        initial = np.zeros(self.num_states)
        initial[:self.num_sites] = 1.0 / self.num_sites
        return initial


def build_goose_model() -> GooseModel:
    """4 occasions, 3 sites: 21 parameters"""
    return GooseModel(num_occasions=4, num_sites=3)
