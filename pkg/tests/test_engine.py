"""
Tests for the MCMC engine, latent-state Gibbs updates and chain persistence
"""

import numpy as np
import pytest

from conftest import random_stochastic
from hmm_mcmc.config import SamplerSettings
from hmm_mcmc.core import (
    HierarchicalModel,
    LatentStateMatrix,
    ModelMatrices,
    ObservationHistory,
    ParameterSpec,
    ParameterSupport,
    UniformPrior,
)
from hmm_mcmc.core.exceptions import (
    HmmMcmcException,
    InitializationException,
    LatentStateException,
    SamplerSchemeException,
)
from hmm_mcmc.data import CaptureDataset, reduce_dataset
from hmm_mcmc.diagnostics import efficiency_report, estimate_ess
from hmm_mcmc.mcmc import (
    REDUCED_DATA_MESSAGE,
    AdaptationSettings,
    ChainOutput,
    FunctionTarget,
    SamplerScheme,
    enumerate_full_conditional,
    latent_gibbs_step,
    latent_gibbs_sweep,
    load_chain,
    run_chain,
    run_chains,
    run_mcmc,
    save_chain,
)
from hmm_mcmc.mcmc.latent_sampler import full_conditional_weights


def _standard_normal(theta: np.ndarray) -> float:
    return float(-0.5 * theta @ theta)


def _correlated_normal(rho: float):
    precision = np.linalg.inv(np.array([[1.0, rho], [rho, 1.0]]))
    return lambda theta: float(-0.5 * theta @ precision @ theta)


def _binomial_posterior(theta: np.ndarray) -> float:
    # 7 successes in 20 trials under a uniform prior: Beta(8, 14)
    x = theta[0]
    if not 0.0 < x < 1.0:
        return -np.inf
    return float(7 * np.log(x) + 13 * np.log1p(-x))


def _min_ess(chain: ChainOutput) -> float:
    samples = chain.samples[chain.iterations // 10:]
    return min(estimate_ess(samples[:, j]).ess for j in range(samples.shape[1]))


class TinyModel(HierarchicalModel):
    """Fixed matrices behind a single dummy parameter"""

    name = "tiny"
    requires_sighting = False

    def __init__(self, initial: np.ndarray, transitions: np.ndarray, emissions: np.ndarray):
        super().__init__([ParameterSpec("a", ParameterSupport.UNIT_INTERVAL, UniformPrior())],
                         num_states=initial.shape[0], num_obs=emissions.shape[1])
        self._initial = initial
        self._matrices = ModelMatrices(transitions, emissions)
        self.num_occasions = emissions.shape[0]

    def model_matrices(self, theta, num_occasions):
        return self._matrices

    def initial_distribution(self, theta, first_code):
        return self._initial

    def simulation_initial_distribution(self, theta):
        return self._initial


class TestRunChain:
    def test_normal_target_moments(self):
        chain = run_chain(FunctionTarget(_standard_normal, 1), SamplerScheme.univariate(1),
                          50_000, seed=11)
        draws = chain.samples[5_000:, 0]
        assert draws.mean() == pytest.approx(0.0, abs=0.05)
        assert draws.var() == pytest.approx(1.0, abs=0.1)

    def test_beta_posterior(self):
        target = FunctionTarget(_binomial_posterior, 1, initial_value=[0.5], initial_scale=0.1)
        chain = run_chain(target, SamplerScheme.univariate(1), 30_000, seed=12)
        draws = chain.samples[3_000:, 0]
        assert draws.mean() == pytest.approx(8 / 22, abs=0.01)
        assert draws.std() == pytest.approx(np.sqrt(8 * 14 / (22 ** 2 * 23)), abs=0.01)

    @pytest.mark.slow
    def test_beta_moments_within_monte_carlo_error(self):
        target = FunctionTarget(_binomial_posterior, 1, initial_value=[0.5], initial_scale=0.1)
        chain = run_chain(target, SamplerScheme.univariate(1), 100_000, seed=14)
        draws = chain.samples[10_000:, 0]
        mean, variance = 8 / 22, 8 * 14 / (22 ** 2 * 23)

        mcse_mean = draws.std() / np.sqrt(estimate_ess(draws).ess)
        assert abs(draws.mean() - mean) < 3.0 * mcse_mean

        squares = (draws - mean) ** 2
        mcse_variance = squares.std() / np.sqrt(estimate_ess(squares).ess)
        assert abs(squares.mean() - variance) < 3.0 * mcse_variance

    @pytest.mark.slow
    def test_block_beats_univariate_on_correlated_target(self):
        target = FunctionTarget(_correlated_normal(0.98), 2)
        univariate = run_chain(target, SamplerScheme.univariate(2), 20_000, seed=13)
        block = run_chain(target, SamplerScheme.single_block(2), 20_000, seed=13)
        assert _min_ess(block) > 2.0 * _min_ess(univariate)

    def test_same_seed_same_samples(self, dipper, small_dipper_data):
        scheme = SamplerScheme.univariate(2)
        first = run_mcmc(dipper, small_dipper_data, scheme, 500, seed=21)
        second = run_mcmc(dipper, small_dipper_data, scheme, 500, seed=21)
        other = run_mcmc(dipper, small_dipper_data, scheme, 500, seed=22)
        np.testing.assert_array_equal(first.samples, second.samples)
        assert not np.array_equal(first.samples, other.samples)

    def test_zero_iterations(self):
        with pytest.raises(InitializationException):
            run_chain(FunctionTarget(_standard_normal, 1), SamplerScheme.univariate(1), 0)

    def test_initial_theta_outside_support(self, dipper, small_dipper_data):
        with pytest.raises(InitializationException, match="prior support"):
            run_mcmc(dipper, small_dipper_data, SamplerScheme.univariate(2), 10,
                     initial_theta=np.array([1.5, 0.5]))

    def test_no_finite_starting_point(self):
        target = FunctionTarget(lambda theta: -np.inf, 1)
        with pytest.raises(InitializationException, match="100 draws"):
            run_chain(target, SamplerScheme.univariate(1), 10)

    def test_scheme_must_fit_the_model(self, dipper, small_dipper_data):
        with pytest.raises(SamplerSchemeException):
            run_mcmc(dipper, small_dipper_data, SamplerScheme.univariate(3), 10)

    def test_runtime_comes_from_the_sampling_loop(self, mocker):
        clock = mocker.patch("hmm_mcmc.mcmc.engine.time")
        clock.perf_counter.side_effect = [10.0, 12.5]
        chain = run_chain(FunctionTarget(_standard_normal, 1), SamplerScheme.univariate(1), 10)
        assert chain.runtime_seconds == 2.5

    def test_runtime_uses_the_given_clock(self):
        ticks = iter([3.0, 3.75])
        chain = run_chain(FunctionTarget(_standard_normal, 1), SamplerScheme.univariate(1), 10,
                          clock=lambda: next(ticks))
        assert chain.runtime_seconds == 0.75

    def test_runtime_is_floored(self, mocker):
        clock = mocker.patch("hmm_mcmc.mcmc.engine.time")
        clock.perf_counter.side_effect = [5.0, 5.0]
        chain = run_chain(FunctionTarget(_standard_normal, 1), SamplerScheme.univariate(1), 10)
        assert chain.runtime_seconds == 0.001

    def test_settings_supply_default_adaptation(self, dipper, small_dipper_data):
        settings = SamplerSettings(adaptation_interval=50)
        chain = run_mcmc(dipper, small_dipper_data, SamplerScheme.univariate(2), 100, seed=1,
                         settings=settings)
        assert chain.scheme.adaptation.interval == 50
        explicit = SamplerScheme.univariate(2, adaptation=AdaptationSettings(interval=30))
        chain = run_mcmc(dipper, small_dipper_data, explicit, 100, seed=1, settings=settings)
        assert chain.scheme.adaptation.interval == 30

    def test_chain_output_fields(self, dipper, small_dipper_data):
        chain = run_mcmc(dipper, small_dipper_data, SamplerScheme.univariate(2), 200, seed=3,
                         strategy="filter")
        assert chain.samples.shape == (200, 2)
        assert chain.param_names == ["phi", "p"]
        assert set(chain.acceptance_rates) == {"phi", "p"}
        assert chain.metadata == {"num_latents": 0, "model": "dipper"}
        assert chain.to_frame().columns.tolist() == ["phi", "p"]


class TestModelPosteriors:
    def test_dipper_posterior_covers_truth(self, dipper, dipper_data):
        chain = run_mcmc(dipper, dipper_data, SamplerScheme.univariate(2), 10_000, seed=31)
        draws = chain.samples[1_000:]
        for j, truth in enumerate((0.6, 0.9)):
            assert abs(draws[:, j].mean() - truth) < 3 * draws[:, j].std()

    def test_reduced_data_gives_the_same_chain(self, dipper, dipper_data):
        scheme = SamplerScheme.univariate(2)
        full = run_mcmc(dipper, dipper_data, scheme, 300, seed=5)
        reduced = run_mcmc(dipper, reduce_dataset(dipper_data), scheme, 300, seed=5)
        np.testing.assert_allclose(full.samples, reduced.samples, rtol=1e-8)

    def test_latent_sampling_rejects_reduced_data(self, dipper, small_dipper_data):
        scheme = SamplerScheme.univariate(2, latent_sampling=True)
        with pytest.raises(SamplerSchemeException) as info:
            run_mcmc(dipper, reduce_dataset(small_dipper_data), scheme, 10)
        assert str(info.value) == REDUCED_DATA_MESSAGE

    def test_latent_run_records_latent_count(self, dipper, small_dipper_data):
        scheme = SamplerScheme.univariate(2, latent_sampling=True)
        chain = run_mcmc(dipper, small_dipper_data, scheme, 50, seed=6)
        expected = sum(h.codes[h.first_occasion + 1:].count(0) for h in small_dipper_data.histories)
        assert chain.metadata["num_latents"] == expected

    @pytest.mark.slow
    def test_latent_and_filtered_posteriors_agree(self, dipper, small_dipper_data):
        filtered = run_mcmc(dipper, small_dipper_data, SamplerScheme.univariate(2), 20_000, seed=41)
        latent = run_mcmc(dipper, small_dipper_data,
                          SamplerScheme.univariate(2, latent_sampling=True), 20_000, seed=41)
        np.testing.assert_allclose(latent.samples[2_000:].mean(axis=0),
                                   filtered.samples[2_000:].mean(axis=0), atol=0.03)

    @pytest.mark.slow
    def test_filtering_is_more_efficient_than_latent_sampling(self, dipper, dipper_data):
        ratios = []
        for seed in (51, 52, 53):
            filtered = run_mcmc(dipper, dipper_data, SamplerScheme.univariate(2), 5_000, seed=seed)
            latent = run_mcmc(dipper, dipper_data,
                              SamplerScheme.univariate(2, latent_sampling=True), 5_000, seed=seed)
            ratios.append(efficiency_report(filtered).min_esps / efficiency_report(latent).min_esps)
        assert min(ratios) >= 5.0

    def test_goose_and_orchid_run(self, goose, goose_data, orchid, orchid_data):
        for model, data in ((goose, goose_data), (orchid, orchid_data)):
            chain = run_mcmc(model, data, SamplerScheme.univariate(model.dimension), 50, seed=7)
            assert chain.samples.shape == (50, model.dimension)
            assert np.all(np.isfinite(chain.samples))


class TestRunChains:
    def test_failures_are_returned_in_place(self):
        target = FunctionTarget(_standard_normal, 1)

        def good():
            return run_chain(target, SamplerScheme.univariate(1), 20, seed=1)

        def bad():
            raise InitializationException("boom")

        results = run_chains([good, bad, good], max_workers=2)
        assert isinstance(results[0], ChainOutput)
        assert isinstance(results[1], InitializationException)
        np.testing.assert_array_equal(results[0].samples, results[2].samples)

    def test_sequential(self):
        target = FunctionTarget(_standard_normal, 1)
        results = run_chains([lambda: run_chain(target, SamplerScheme.univariate(1), 5, seed=2)])
        assert results[0].iterations == 5


class TestPersistence:
    def test_round_trip(self, tmp_path, dipper, small_dipper_data):
        chain = run_mcmc(dipper, small_dipper_data, SamplerScheme(blocks=[[0, 1]]), 100, seed=8,
                         strategy="filter-block")
        loaded = load_chain(save_chain(chain, tmp_path / "run"))
        np.testing.assert_array_equal(loaded.samples, chain.samples)
        assert loaded.param_names == chain.param_names
        assert loaded.scheme == chain.scheme
        assert loaded.strategy == "filter-block"
        assert loaded.runtime_seconds == chain.runtime_seconds
        assert loaded.metadata == chain.metadata

    def test_missing_files(self, tmp_path):
        with pytest.raises(HmmMcmcException):
            load_chain(tmp_path)


class TestLatentGibbs:
    def test_state_between_sightings_is_forced(self, dipper, rng):
        data = CaptureDataset((ObservationHistory((1, 0, 1)),), 3, 2)
        theta = np.array([0.6, 0.5])
        latents = dipper.initialise_latents(theta, data)
        draws = {latent_gibbs_step(dipper, theta, latents, data, 0, 1, rng) for _ in range(200)}
        assert draws == {0}

    def test_uninformative_model_gives_uniform_draws(self, rng):
        k = 3
        model = TinyModel(np.full(3, 1 / 3), np.full((k - 1, 3, 3), 1 / 3), np.full((k, 2, 3), 0.5))
        data = CaptureDataset((ObservationHistory((1, 0, 1)),), k, 2)
        theta = np.array([0.5])
        latents = model.initialise_latents(theta, data)
        counts = np.bincount(
            [latent_gibbs_step(model, theta, latents, data, 0, 1, rng) for _ in range(6_000)],
            minlength=3,
        )
        np.testing.assert_allclose(counts / 6_000, 1 / 3, atol=0.03)

    def test_full_conditional_matches_joint_density(self, rng):
        k = 4
        model = TinyModel(rng.dirichlet(np.ones(3)), random_stochastic(rng, 3, 3, k - 1),
                          random_stochastic(rng, 3, 3, k))
        data = CaptureDataset(tuple(ObservationHistory(tuple(rng.integers(0, 3, k)))
                                    for _ in range(5)), k, 3)
        theta = np.array([0.5])
        latents = model.initialise_latents(theta, data)
        latent_gibbs_sweep(model, theta, latents, data, rng)
        batch = model.prepare(data)
        matrices = model.model_matrices(theta, k)
        rows = np.where(batch.codes == 0, 2, batch.codes - 1)
        initial = model.initial_distributions(theta, batch.first_codes)
        for i, t in np.argwhere(latents.sampled):
            weights = full_conditional_weights(matrices, initial, rows, latents.states,
                                               batch.first, np.array([i]), t)[0]
            np.testing.assert_allclose(weights / weights.sum(),
                                       enumerate_full_conditional(model, theta, latents, data, i, t),
                                       rtol=1e-10)

    def test_draw_frequencies_match_full_conditional(self, rng):
        k = 3
        model = TinyModel(rng.dirichlet(np.ones(3)), random_stochastic(rng, 3, 3, k - 1),
                          random_stochastic(rng, 3, 3, k))
        data = CaptureDataset((ObservationHistory((2, 0, 1)),), k, 3)
        theta = np.array([0.5])
        latents = model.initialise_latents(theta, data)
        expected = enumerate_full_conditional(model, theta, latents, data, 0, 1)
        counts = np.bincount(
            [latent_gibbs_step(model, theta, latents, data, 0, 1, rng) for _ in range(10_000)],
            minlength=3,
        )
        np.testing.assert_allclose(counts / 10_000, expected, atol=0.02)

    def test_sweep_keeps_pinned_states(self, dipper, dipper_data, rng):
        theta = np.array([0.6, 0.9])
        latents = dipper.initialise_latents(theta, dipper_data)
        before = latents.states.copy()
        for _ in range(5):
            latent_gibbs_sweep(dipper, theta, latents, dipper_data, rng)
        np.testing.assert_array_equal(latents.states[~latents.sampled], before[~latents.sampled])
        assert np.isfinite(dipper.log_joint(theta, latents, dipper_data))

    def test_zero_support_names_the_position(self, dipper, rng):
        data = CaptureDataset((ObservationHistory((1, 0, 0, 1)),), 4, 2)
        latents = LatentStateMatrix(np.array([[0, 1, 1, 0]]), np.array([[False, True, True, False]]))
        with pytest.raises(LatentStateException) as info:
            latent_gibbs_step(dipper, np.array([0.6, 0.5]), latents, data, 0, 2, rng)
        assert info.value.position == (0, 2)

    def test_unsampled_entry(self, dipper, rng):
        data = CaptureDataset((ObservationHistory((1, 0, 1)),), 3, 2)
        theta = np.array([0.6, 0.5])
        latents = dipper.initialise_latents(theta, data)
        with pytest.raises(LatentStateException):
            latent_gibbs_step(dipper, theta, latents, data, 0, 2, rng)
