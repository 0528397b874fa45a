"""
Forward filtering for discrete hidden Markov models

Matrices follow the column convention: ``transitions[t][i, j]`` is
Pr(X_{t+1} = i | X_t = j) and ``emissions[t][i, j]`` is Pr(Y_t = i | X_t = j).
Observation codes use the capture-history convention: code 0 is "not seen"
and selects the last emission row, code c >= 1 selects row c - 1.
"""

import itertools
import logging
from dataclasses import dataclass, field, InitVar
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .exceptions import (
    DimensionMismatchException,
    EnumerationLimitException,
    InvalidHistoryException,
    InvalidMatrixException,
)

logger = logging.getLogger(__name__)

STOCHASTIC_TOLERANCE = 1e-12
DEFAULT_ENUMERATION_CAP = 10_000_000
NOT_SEEN = 0

_ENUMERATION_CHUNK = 65_536


def emission_rows(codes: np.ndarray, num_obs: int) -> np.ndarray:
    """Map observation codes to emission-matrix row indices"""
    codes = np.asarray(codes, dtype=np.int64)
    return np.where(codes == NOT_SEEN, num_obs - 1, codes - 1)


def _check_stochastic(name: str, matrix: np.ndarray, tolerance: float):
    """Validate entries in [0, 1] and unit column sums along axis -2"""
    if not np.all(np.isfinite(matrix)):
        raise InvalidMatrixException(f"{name} contains non-finite entries")
    if np.any(matrix < -tolerance) or np.any(matrix > 1.0 + tolerance):
        raise InvalidMatrixException(f"{name} has entries outside [0, 1]")
    sums = matrix.sum(axis=-2)
    worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    if worst > tolerance:
        raise InvalidMatrixException(
            f"{name} columns must sum to 1 (largest deviation {worst:.3e})"
        )


@dataclass(frozen=True)
class DiscreteHmmSpec:
    """Time-indexed transition and emission matrices plus an initial distribution"""

    initial_dist: np.ndarray
    transitions: np.ndarray
    emissions: np.ndarray
    validate: InitVar[bool] = True
    tolerance: InitVar[float] = STOCHASTIC_TOLERANCE

    def __post_init__(self, validate: bool, tolerance: float):
        initial = np.asarray(self.initial_dist, dtype=float)
        transitions = np.asarray(self.transitions, dtype=float)
        emissions = np.asarray(self.emissions, dtype=float)

        if initial.ndim != 1:
            raise DimensionMismatchException("initial_dist must be a vector")
        if emissions.ndim != 3:
            raise DimensionMismatchException("emissions must have shape (k, num_obs, num_states)")
        num_states = initial.shape[0]
        num_occasions = emissions.shape[0]
        if transitions.size == 0:
            transitions = transitions.reshape(0, num_states, num_states)
        if transitions.ndim != 3 or transitions.shape[1:] != (num_states, num_states):
            raise DimensionMismatchException(
                f"transitions must have shape (k-1, {num_states}, {num_states}), "
                f"got {transitions.shape}"
            )
        if emissions.shape[2] != num_states:
            raise DimensionMismatchException(
                f"emissions have {emissions.shape[2]} state columns, expected {num_states}"
            )
        if num_occasions < 1:
            raise DimensionMismatchException("an HMM needs at least one occasion")
        if transitions.shape[0] != num_occasions - 1:
            raise DimensionMismatchException(
                f"{num_occasions} emission matrices need {num_occasions - 1} "
                f"transition matrices, got {transitions.shape[0]}"
            )

        if validate:
            _check_stochastic("initial_dist", initial[:, None], tolerance)
            _check_stochastic("transitions", transitions, tolerance)
            _check_stochastic("emissions", emissions, tolerance)

        object.__setattr__(self, "initial_dist", initial)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "emissions", emissions)

    @classmethod
    def homogeneous(cls, initial_dist: Sequence[float], transition: np.ndarray,
                    emission: np.ndarray, num_occasions: int) -> "DiscreteHmmSpec":
        """Build an HMM that reuses one transition and one emission matrix"""
        transition = np.asarray(transition, dtype=float)
        emission = np.asarray(emission, dtype=float)
        return cls(
            initial_dist=np.asarray(initial_dist, dtype=float),
            transitions=np.repeat(transition[None], max(num_occasions - 1, 0), axis=0),
            emissions=np.repeat(emission[None], num_occasions, axis=0),
        )

    @property
    def num_states(self) -> int:
        return int(self.initial_dist.shape[0])

    @property
    def num_obs(self) -> int:
        return int(self.emissions.shape[1])

    @property
    def num_occasions(self) -> int:
        return int(self.emissions.shape[0])


@dataclass(frozen=True)
class ObservationHistory:
    """One individual's observation codes over all occasions"""

    codes: Tuple[int, ...]
    first_occasion: Optional[int] = None
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        object.__setattr__(self, "codes", codes)
        if not codes:
            raise InvalidHistoryException("an observation history needs at least one occasion")
        if any(c < 0 for c in codes):
            raise InvalidHistoryException(f"negative observation code in {codes}")

        first = self.first_occasion
        if first is None:
            sightings = [t for t, c in enumerate(codes) if c != NOT_SEEN]
            first = sightings[0] if sightings else 0
        if not 0 <= first < len(codes):
            raise InvalidHistoryException(
                f"first_occasion {first} outside 0..{len(codes) - 1}"
            )
        object.__setattr__(self, "first_occasion", int(first))

    @property
    def num_occasions(self) -> int:
        return len(self.codes)

    @property
    def active_codes(self) -> Tuple[int, ...]:
        """Codes from the first occasion onward"""
        return self.codes[self.first_occasion:]

    @property
    def has_sighting(self) -> bool:
        return any(c != NOT_SEEN for c in self.codes)

    @property
    def last_sighting(self) -> Optional[int]:
        sightings = [t for t, c in enumerate(self.codes) if c != NOT_SEEN]
        return sightings[-1] if sightings else None

    def __str__(self) -> str:
        return "".join(str(c) for c in self.codes)


class FilterStep(NamedTuple):
    """Predicted state distribution, filtered distribution and step likelihood"""
    predicted: np.ndarray
    filtered: np.ndarray
    likelihood: float


def _active_rows(hmm: DiscreteHmmSpec, history: ObservationHistory) -> np.ndarray:
    """Emission rows for the active part of a history, checking dimensions"""
    active = np.asarray(history.active_codes, dtype=np.int64)
    if active.shape[0] != hmm.num_occasions:
        raise DimensionMismatchException(
            f"history covers {active.shape[0]} occasions from first_occasion "
            f"{history.first_occasion}, HMM covers {hmm.num_occasions}"
        )
    if np.any(active >= hmm.num_obs):
        raise DimensionMismatchException(
            f"history codes {history.codes} exceed the {hmm.num_obs}-symbol alphabet"
        )
    return emission_rows(active, hmm.num_obs)


def forward_filter_distributions(hmm: DiscreteHmmSpec, history: ObservationHistory,
                                 condition_on_first: bool = False) -> List[FilterStep]:
    """
    Run the matrix forward filter and return every (P_t, Q_t, L_t).

    With ``condition_on_first`` the first step's likelihood is reported as 1:
    its emission still updates the state distribution. For a history with
    probability zero the sequence ends at the impossible occasion, whose
    filtered vector is all zeros and whose likelihood is 0.
    """
    rows = _active_rows(hmm, history)
    steps: List[FilterStep] = []
    filtered = None

    for t in range(hmm.num_occasions):
        predicted = hmm.initial_dist.copy() if t == 0 else hmm.transitions[t - 1] @ filtered
        joint = hmm.emissions[t][rows[t]] * predicted
        likelihood = float(joint.sum())
        if likelihood <= 0.0:
            steps.append(FilterStep(predicted, np.zeros_like(predicted), 0.0))
            return steps
        filtered = joint / likelihood
        reported = 1.0 if (condition_on_first and t == 0) else likelihood
        steps.append(FilterStep(predicted, filtered, reported))

    return steps


def forward_filter_log_lik(hmm: DiscreteHmmSpec, history: ObservationHistory,
                           condition_on_first: bool = False) -> float:
    """Log-likelihood of one history by forward filtering, -inf if impossible"""
    rows = _active_rows(hmm, history)
    log_lik = 0.0
    filtered = None

    for t in range(hmm.num_occasions):
        predicted = hmm.initial_dist if t == 0 else hmm.transitions[t - 1] @ filtered
        joint = hmm.emissions[t][rows[t]] * predicted
        likelihood = joint.sum()
        if likelihood <= 0.0:
            return -np.inf
        filtered = joint / likelihood
        if not (condition_on_first and t == 0):
            log_lik += np.log(likelihood)

    return float(log_lik)


def forward_filter_log_lik_batch(initial_dist: np.ndarray, transitions: np.ndarray,
                                 emissions: np.ndarray, rows: np.ndarray,
                                 condition_on_first: bool = False) -> np.ndarray:
    """
    Vectorised forward filter over histories sharing occasions.

    Args:
        initial_dist: (num_states,) or (n, num_states) initial distributions
        transitions: (m-1, num_states, num_states)
        emissions: (m, num_obs, num_states)
        rows: (n, m) emission row indices
        condition_on_first: drop the first step's likelihood

    Returns:
        (n,) log-likelihoods, -inf for impossible histories
    """
    rows = np.asarray(rows, dtype=np.int64)
    n, m = rows.shape
    filtered = np.broadcast_to(np.asarray(initial_dist, dtype=float),
                               (n, emissions.shape[2])).copy()
    log_lik = np.zeros(n)
    alive = np.ones(n, dtype=bool)

    with np.errstate(divide="ignore", invalid="ignore"):
        for t in range(m):
            predicted = filtered if t == 0 else filtered @ transitions[t - 1].T
            joint = predicted * emissions[t][rows[:, t]]
            likelihood = joint.sum(axis=1)
            alive &= likelihood > 0.0
            safe = np.where(alive, likelihood, 1.0)
            filtered = np.where(alive[:, None], joint / safe[:, None], 0.0)
            if not (condition_on_first and t == 0):
                log_lik += np.log(safe)

    log_lik[~alive] = -np.inf
    return log_lik


def latent_enumeration_log_lik(hmm: DiscreteHmmSpec, history: ObservationHistory,
                               cap: int = DEFAULT_ENUMERATION_CAP,
                               condition_on_first: bool = False) -> float:
    """
    Log-likelihood by summing the joint over every latent state sequence.

    Exponential in the number of occasions; intended as an oracle for
    checking the forward filter on small models.
    """
    rows = _active_rows(hmm, history)
    num_states = hmm.num_states
    m = hmm.num_occasions
    terms = num_states ** m
    if terms > cap:
        raise EnumerationLimitException(
            f"enumerating {num_states}^{m} = {terms} latent sequences exceeds the cap "
            f"of {cap}; use forward_filter_log_lik instead"
        )

    with np.errstate(divide="ignore"):
        log_initial = np.log(hmm.initial_dist)
        log_transitions = np.log(hmm.transitions)
        log_emit = np.stack([np.log(hmm.emissions[t][rows[t]]) for t in range(m)])

    sequences = itertools.product(range(num_states), repeat=m)
    partial_sums = []
    while True:
        chunk = np.array(list(itertools.islice(sequences, _ENUMERATION_CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            break
        chunk = chunk.reshape(-1, m)
        log_joint = log_initial[chunk[:, 0]] + log_emit[0, chunk[:, 0]]
        for t in range(1, m):
            log_joint = (log_joint
                         + log_transitions[t - 1][chunk[:, t], chunk[:, t - 1]]
                         + log_emit[t, chunk[:, t]])
        partial_sums.append(logsumexp(log_joint))

    total = float(logsumexp(partial_sums))
    if condition_on_first:
        first = float(logsumexp(log_initial + log_emit[0]))
        if not np.isfinite(first):
            return -np.inf
        total -= first
    logger.debug(f"Enumerated {terms} latent sequences for history {history}")
    return total
