"""
Multistate model with time-dependent survival and an unobservable state (Orchid)
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


class OrchidModel(HierarchicalModel):
    """
    Observable living states, one dormant state and an absorbing dead state.

    State order: observable states 1..L, dormant, dead. Observation codes
    1..L identify the observable states exactly; code 0 ("not seen") covers
    dormant and dead. Parameters are one survival probability per interval
    (``phi_2`` .. ``phi_k``) followed by the (L+1)^2 movement weights among
    living states.
    """

    name = "orchid"
    condition_on_first = True

    def __init__(self, num_occasions: int = 11, num_observable_states: int = 2):
        if num_occasions < 2:
            raise ModelSpecificationException("the model needs at least two occasions")
        if num_observable_states < 1:
            raise ModelSpecificationException("the model needs an observable state")
        self.num_occasions = num_occasions
        self.num_living = num_observable_states + 1
        labels = [str(s) for s in range(1, self.num_living + 1)]

        params = [
            ParameterSpec(f"phi_{t}", ParameterSupport.UNIT_INTERVAL, UniformPrior(), "survival")
            for t in range(2, num_occasions + 1)
        ]
        params += weight_specs(labels)
        super().__init__(params, num_states=self.num_living + 1,
                         num_obs=num_observable_states + 1)

        # deterministic observation matrix
        emission = np.zeros((self.num_obs, self.num_states))
        for state in range(num_observable_states):
            emission[state, state] = 1.0
        emission[-1, num_observable_states:] = 1.0
        self._emission = emission

    def psi(self, theta: np.ndarray) -> np.ndarray:
        """Movement probabilities between living states, columns are sources"""
        theta = self._check_theta(theta)
        return transition_probabilities(theta[self.num_occasions - 1:], self.num_living)

    def model_matrices(self, theta: np.ndarray, num_occasions: int) -> ModelMatrices:
        if num_occasions != self.num_occasions:
            raise ModelSpecificationException(
                f"{self.name} covers {self.num_occasions} occasions, not {num_occasions}"
            )
        theta = self._check_theta(theta)
        phi = theta[:num_occasions - 1]
        survival = np.repeat(phi[:, None], self.num_living, axis=1)
        transitions = survival_transitions(self.psi(theta), survival)
        emissions = np.repeat(self._emission[None], num_occasions, axis=0)
        return ModelMatrices(transitions, emissions)

    def initial_distribution(self, theta: np.ndarray, first_code: int) -> np.ndarray:
        if not 1 <= first_code < self.num_obs:
            raise ModelSpecificationException(
                f"first observation code {first_code} does not identify a state"
            )
        initial = np.zeros(self.num_states)
        initial[first_code - 1] = 1.0
        return initial

    def simulation_initial_distribution(self, theta: np.ndarray) -> np.ndarray:
        """Uniform over the observable living states"""
        initial = np.zeros(self.num_states)
        initial[:self.num_obs - 1] = 1.0 / (self.num_obs - 1)
        return initial


def build_orchid_model() -> OrchidModel:
    """11 occasions, vegetative/flowering/dormant/dead: 19 parameters"""
    return OrchidModel(num_occasions=11, num_observable_states=2)
