"""
Shared fixtures for hmm-mcmc tests
"""

import numpy as np
import pytest

from hmm_mcmc.core import DiscreteHmmSpec, ObservationHistory
from hmm_mcmc.data import CaptureDataset
from hmm_mcmc.models import build_dipper_model, build_goose_model, build_orchid_model, simulate_dataset

ENV_VARS = (
    "HMM_MCMC_CONFIG",
    "HMM_MCMC_OUTPUT_ROOT",
    "HMM_MCMC_ITERATIONS",
    "HMM_MCMC_DISCARD_FRACTION",
    "HMM_MCMC_MAX_WORKERS",
    "LOG_LEVEL",
    "LOG_FILE",
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    """No configuration leaks in from the environment or working directory"""
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stochastic(rng: np.random.Generator, rows: int, cols: int, size=None) -> np.ndarray:
    """Column-stochastic matrices with strictly positive entries"""
    shape = (cols,) if size is None else (size, cols)
    draws = rng.dirichlet(np.ones(rows), size=shape)
    return np.moveaxis(draws, -1, -2)


def random_hmm(rng: np.random.Generator, num_states: int, num_obs: int,
               num_occasions: int) -> DiscreteHmmSpec:
    return DiscreteHmmSpec(
        initial_dist=rng.dirichlet(np.ones(num_states)),
        transitions=random_stochastic(rng, num_states, num_states, num_occasions - 1),
        emissions=random_stochastic(rng, num_obs, num_states, num_occasions),
    )


def random_history(rng: np.random.Generator, num_obs: int, num_occasions: int) -> ObservationHistory:
    codes = rng.integers(0, num_obs, size=num_occasions)
    return ObservationHistory(tuple(int(c) for c in codes), first_occasion=0)


@pytest.fixture
def dipper():
    return build_dipper_model()


@pytest.fixture
def orchid():
    return build_orchid_model()


@pytest.fixture
def goose():
    return build_goose_model()


@pytest.fixture
def dipper_data(dipper) -> CaptureDataset:
    """n=300, k=7, phi=0.6, p=0.9"""
    return simulate_dataset(dipper, np.array([0.6, 0.9]), n=300, num_occasions=7, seed=1)


@pytest.fixture
def small_dipper_data(dipper) -> CaptureDataset:
    return simulate_dataset(dipper, np.array([0.7, 0.5]), n=40, num_occasions=5, seed=3)


@pytest.fixture
def orchid_data(orchid) -> CaptureDataset:
    return simulate_dataset(orchid, orchid.default_theta(), n=60, seed=5)


@pytest.fixture
def goose_data(goose) -> CaptureDataset:
    return simulate_dataset(goose, goose.default_theta(), n=80, seed=7)


def write_text(path, text: str):
    path.write_text(text, encoding="utf-8")
    return path
