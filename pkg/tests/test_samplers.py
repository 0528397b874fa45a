"""
Tests for random-walk samplers, proposal adaptation and sampler schemes
"""

import logging

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from hmm_mcmc.core.exceptions import SamplerSchemeException
from hmm_mcmc.mcmc import (
    AdaptationSettings,
    BlockRwSampler,
    FunctionTarget,
    SamplerScheme,
    UnivariateRwSampler,
    adapt_covariance,
    adapt_scale,
    adaptation_gamma,
    block_rw_step,
    build_samplers,
    metropolis_log_ratio,
    proposal_cholesky,
    run_chain,
    univariate_rw_step,
)

FIXED = AdaptationSettings(enabled=False)


def _unit_interval(theta: np.ndarray) -> float:
    return 0.0 if 0.0 <= theta[0] <= 1.0 else -np.inf


def _standard_normal(theta: np.ndarray) -> float:
    return float(-0.5 * theta @ theta)


def _move_fraction(samples: np.ndarray) -> float:
    return float(np.mean(np.any(np.diff(samples, axis=0) != 0.0, axis=1)))


class TestSteps:
    def test_metropolis_ratio(self):
        assert metropolis_log_ratio(-1.0, -3.0) == 2.0
        assert metropolis_log_ratio(-np.inf, -np.inf) == -np.inf

    def test_zero_scale_always_accepts(self):
        target = FunctionTarget(_unit_interval, 1, initial_value=[0.3])
        scheme = SamplerScheme.univariate(1, adaptation=FIXED, initial_scale=0.0)
        chain = run_chain(target, scheme, 2000, seed=1)
        assert chain.acceptance_rates["x0"] == 1.0
        np.testing.assert_array_equal(chain.samples, 0.3)

    def test_uniform_target_acceptance(self):
        # E[(1 - |e|)+] for e ~ N(0, 0.5^2)
        target = FunctionTarget(_unit_interval, 1, initial_value=[0.5])
        scheme = SamplerScheme.univariate(1, adaptation=FIXED, initial_scale=0.5)
        chain = run_chain(target, scheme, 20_000, seed=2)
        assert chain.acceptance_rates["x0"] == pytest.approx(0.60955, abs=0.02)

    def test_rejected_proposals_leave_theta_unchanged(self, rng):
        theta = np.array([0.5, 0.5])
        result = univariate_rw_step(theta, 0.0, 1, 10.0, lambda x: -np.inf, rng)
        assert not result.accepted
        assert result.theta is theta
        assert result.log_posterior == 0.0

    def test_block_step_with_one_coordinate_matches_univariate(self):
        a, b = np.random.default_rng(5), np.random.default_rng(5)
        theta_a = theta_b = np.zeros(1)
        lp_a = lp_b = 0.0
        log_density = _standard_normal
        for _ in range(200):
            theta_a, lp_a, _ = univariate_rw_step(theta_a, lp_a, 0, 0.7, log_density, a)
            theta_b, lp_b, _ = block_rw_step(theta_b, lp_b, [0], np.array([[0.7]]), log_density, b)
            np.testing.assert_allclose(theta_a, theta_b, rtol=1e-15)

    @pytest.mark.slow
    def test_normal_target_distribution(self):
        target = FunctionTarget(_standard_normal, 1)
        chain = run_chain(target, SamplerScheme.univariate(1), 50_000, seed=3)
        thinned = chain.samples[5_000::20, 0]
        assert stats.kstest(thinned, "norm").pvalue > 0.001

    @pytest.mark.slow
    def test_uniform_target_distribution(self):
        target = FunctionTarget(_unit_interval, 1, initial_value=[0.5])
        chain = run_chain(target, SamplerScheme.univariate(1), 100_000, seed=5)
        thinned = chain.samples[::20, 0]
        assert stats.kstest(thinned, "uniform").pvalue > 0.01

    @pytest.mark.slow
    def test_isotropic_block_acceptance_settles_near_target(self):
        target = FunctionTarget(_standard_normal, 10)
        chain = run_chain(target, SamplerScheme.single_block(10), 20_000, seed=4)
        assert _move_fraction(chain.samples[10_000:]) == pytest.approx(0.234, abs=0.05)


class TestAdaptation:
    def test_gamma_decays(self):
        assert adaptation_gamma(0) == pytest.approx(3.0 ** -0.8)
        assert adaptation_gamma(10) < adaptation_gamma(1)

    def test_scale_moves_toward_target(self):
        assert adapt_scale(1.0, 0.44, 0.44, 0) == 1.0
        assert adapt_scale(1.0, 0.9, 0.44, 0) > 1.0
        assert adapt_scale(1.0, 0.1, 0.44, 0) < 1.0

    def test_scale_steps_shrink(self):
        early = adapt_scale(1.0, 0.1, 0.44, 0)
        late = adapt_scale(1.0, 0.1, 0.44, 50)
        assert early < late < 1.0

    def test_tiny_initial_scale_recovers_target_acceptance(self):
        target = FunctionTarget(_standard_normal, 1)
        scheme = SamplerScheme.univariate(1, initial_scale=1e-3)
        chain = run_chain(target, scheme, 10_000, seed=6)
        assert _move_fraction(chain.samples[:200]) > 0.9
        assert _move_fraction(chain.samples[8_000:]) == pytest.approx(0.44, abs=0.1)

    def test_covariance_update(self, rng):
        window = rng.multivariate_normal([0, 0], [[1.0, 0.9], [0.9, 1.0]], size=200)
        current = np.eye(2)
        updated = adapt_covariance(current, window, 0, jitter=0.0)
        optimal = 2.38 ** 2 / 2 * np.cov(window, rowvar=False)
        gamma = adaptation_gamma(0)
        np.testing.assert_allclose(updated, current + gamma * (optimal - current))
        assert updated[0, 1] > 0.0

    def test_cholesky_reproduces_covariance(self):
        covariance = np.array([[2.0, 0.5], [0.5, 1.0]])
        factor = proposal_cholesky(covariance, scale=0.5)
        np.testing.assert_allclose(factor @ factor.T, 0.25 * covariance)

    def test_cholesky_falls_back_to_diagonal(self, caplog):
        with caplog.at_level(logging.WARNING, logger="hmm_mcmc.mcmc.adaptation"):
            factor = proposal_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
        np.testing.assert_allclose(factor, np.eye(2))
        assert "not positive definite" in caplog.text


class TestSamplers:
    def test_univariate_adapts_every_interval(self, rng):
        sampler = UnivariateRwSampler(0, 1.0, "x", AdaptationSettings(interval=10))
        theta, log_post = np.zeros(1), 0.0
        for _ in range(25):
            theta, log_post, _ = sampler.step(theta, log_post, _standard_normal, rng)
        assert sampler.times_adapted == 2
        assert sampler.proposals == 25
        assert sampler.scale != 1.0

    def test_disabled_adaptation_keeps_scale(self, rng):
        sampler = UnivariateRwSampler(0, 1.0, "x", FIXED)
        theta, log_post = np.zeros(1), 0.0
        for _ in range(100):
            theta, log_post, _ = sampler.step(theta, log_post, _standard_normal, rng)
        assert sampler.scale == 1.0
        assert sampler.times_adapted == 0

    def test_rejected_window_keeps_block_covariance(self, rng):
        sampler = BlockRwSampler([0, 1], [0.5, 0.5], "block", AdaptationSettings(interval=20))

        def log_posterior(theta):
            return 0.0 if np.all(theta == 0.0) else -np.inf

        theta, log_post = np.zeros(2), 0.0
        for _ in range(20):
            theta, log_post, _ = sampler.step(theta, log_post, log_posterior, rng)
        assert sampler.times_adapted == 1
        np.testing.assert_array_equal(sampler.covariance, np.diag([0.25, 0.25]))
        assert sampler.scale < 1.0

    def test_block_covariance_learns_correlation(self, rng):
        cov = np.array([[1.0, 0.95], [0.95, 1.0]])
        precision = np.linalg.inv(cov)
        sampler = BlockRwSampler([0, 1], [1.0, 1.0], "block", AdaptationSettings(interval=100))
        theta, log_post = np.zeros(2), 0.0
        for _ in range(5_000):
            theta, log_post, _ = sampler.step(theta, log_post,
                                              lambda x: float(-0.5 * x @ precision @ x), rng)
        correlation = sampler.covariance[0, 1] / np.sqrt(np.prod(np.diag(sampler.covariance)))
        assert correlation > 0.7

    def test_build_samplers(self):
        scheme = SamplerScheme(blocks=[[0, 2], [1]])
        samplers = build_samplers(scheme, ["a", "b", "c"], [0.1, 0.2, 0.3])
        assert isinstance(samplers[0], BlockRwSampler)
        assert samplers[0].label == "block[a,c]"
        np.testing.assert_allclose(samplers[0].covariance, np.diag([0.01, 0.09]))
        assert isinstance(samplers[1], UnivariateRwSampler)
        assert samplers[1].scale == 0.2

    def test_scheme_scale_overrides_model_scales(self):
        scheme = SamplerScheme.univariate(2, initial_scale=0.05)
        samplers = build_samplers(scheme, ["a", "b"], [1.0, 1.0])
        assert [s.scale for s in samplers] == [0.05, 0.05]


class TestSamplerScheme:
    def test_overlapping_blocks(self):
        with pytest.raises(ValidationError):
            SamplerScheme(blocks=[[0, 1], [1, 2]])

    def test_empty_block(self):
        with pytest.raises(ValidationError):
            SamplerScheme(blocks=[[0], []])

    def test_must_partition_all_parameters(self):
        with pytest.raises(SamplerSchemeException, match="missing \\[2\\]"):
            SamplerScheme(blocks=[[0, 1]]).validate_for(3)
        with pytest.raises(SamplerSchemeException):
            SamplerScheme(blocks=[[0, 1], [2, 3]]).validate_for(3)

    def test_parameter_names_must_match(self):
        scheme = SamplerScheme(blocks=[[0], [1]], param_names=["phi", "p"])
        scheme.validate_for(2, ["phi", "p"])
        with pytest.raises(SamplerSchemeException):
            scheme.validate_for(2, ["p", "phi"])

    def test_describe_and_counts(self):
        scheme = SamplerScheme(blocks=[[1, 0], [2]], param_names=["phi", "p", "q"])
        assert scheme.describe() == "{p, phi} {q}"
        assert scheme.num_multi_blocks == 1
        assert scheme.canonical().blocks == [[0, 1], [2]]

    def test_save_and_load(self, tmp_path):
        scheme = SamplerScheme(blocks=[[0, 1], [2]], latent_sampling=True,
                               adaptation=AdaptationSettings(interval=50))
        loaded = SamplerScheme.load(scheme.save(tmp_path / "schemes" / "s.json"))
        assert loaded == scheme

    def test_load_invalid_file(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text('{"blocks": [[0], [0]]}', encoding="utf-8")
        with pytest.raises(SamplerSchemeException):
            SamplerScheme.load(path)
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(SamplerSchemeException):
            SamplerScheme.load(path)
