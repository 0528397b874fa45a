"""
Single-state Cormack-Jolly-Seber model (Dipper)
"""

import logging
from typing import List, Optional

import numpy as np

from ..core.base_model import (
    HierarchicalModel,
    LikelihoodMode,
    ModelMatrices,
    ParameterSpec,
    ParameterSupport,
    UniformPrior,
)
from ..core.cjs import CjsParams
from ..core.exceptions import ModelSpecificationException

logger = logging.getLogger(__name__)

ALIVE, DEAD = 0, 1


def _unit(name: str, role: str) -> ParameterSpec:
    return ParameterSpec(name, ParameterSupport.UNIT_INTERVAL, UniformPrior(), role)


class CjsModel(HierarchicalModel):
    """
    Alive/dead model with Uniform(0, 1) survival and detection.

    States are (alive, dead); observation rows are (seen, not seen).
    Histories are conditioned on first capture. With ``time_dependent_*``
    the corresponding probability gets one parameter per interval or
    occasion; otherwise it is constant and any number of occasions works.
    """

    likelihood_mode = LikelihoodMode.CJS_CLOSED_FORM
    condition_on_first = True

    def __init__(self, name: str = "dipper", num_occasions: Optional[int] = None,
                 time_dependent_survival: bool = False,
                 time_dependent_detection: bool = False):
        timed = time_dependent_survival or time_dependent_detection
        if timed and (num_occasions is None or num_occasions < 2):
            raise ModelSpecificationException(
                "time-dependent CJS models need num_occasions >= 2"
            )
        self.name = name
        self.num_occasions = num_occasions
        self.time_dependent_survival = time_dependent_survival
        self.time_dependent_detection = time_dependent_detection

        params: List[ParameterSpec] = []
        if time_dependent_survival:
            params += [_unit(f"phi_{t}", "survival") for t in range(1, num_occasions)]
        else:
            params.append(_unit("phi", "survival"))
        if time_dependent_detection:
            params += [_unit(f"p_{t}", "detection") for t in range(2, num_occasions + 1)]
        else:
            params.append(_unit("p", "detection"))

        self._num_survival = num_occasions - 1 if time_dependent_survival else 1
        super().__init__(params, num_states=2, num_obs=2)

    def cjs_params(self, theta: np.ndarray, num_occasions: int) -> CjsParams:
        theta = self._check_theta(theta)
        if self.num_occasions is not None and num_occasions != self.num_occasions:
            raise ModelSpecificationException(
                f"{self.name} covers {self.num_occasions} occasions, not {num_occasions}"
            )
        phi, p = theta[:self._num_survival], theta[self._num_survival:]

        survival = np.ones(num_occasions)
        survival[:num_occasions - 1] = phi if self.time_dependent_survival else phi[0]
        detection = np.ones(num_occasions)
        if self.time_dependent_detection:
            detection[1:] = p
        else:
            detection[:] = p[0]
        return CjsParams(survival, detection)

    def model_matrices(self, theta: np.ndarray, num_occasions: int) -> ModelMatrices:
        params = self.cjs_params(theta, num_occasions)
        phi = params.survival[:-1]
        p = params.detection

        transitions = np.zeros((num_occasions - 1, 2, 2))
        transitions[:, ALIVE, ALIVE] = phi
        transitions[:, DEAD, ALIVE] = 1.0 - phi
        transitions[:, DEAD, DEAD] = 1.0

        emissions = np.zeros((num_occasions, 2, 2))
        emissions[:, 0, ALIVE] = p
        emissions[:, 1, ALIVE] = 1.0 - p
        emissions[:, 1, DEAD] = 1.0
        return ModelMatrices(transitions, emissions)

    def initial_distribution(self, theta: np.ndarray, first_code: int) -> np.ndarray:
        return np.array([1.0, 0.0])

    def simulation_initial_distribution(self, theta: np.ndarray) -> np.ndarray:
        return np.array([1.0, 0.0])


def build_dipper_model() -> CjsModel:
    """phi(.) p(.): constant survival and detection"""
    return CjsModel()
