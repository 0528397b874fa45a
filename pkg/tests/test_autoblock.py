"""
Tests for correlation-driven automated blocking
"""

import logging
import time

import numpy as np
import pytest

from hmm_mcmc.autoblock import (
    BlockingCandidate,
    auto_block,
    autoblock_target,
    candidate_partitions,
    estimate_correlation,
    run_autoblock,
    select_candidate,
)
from hmm_mcmc.config import AutoblockSettings, SamplerSettings
from hmm_mcmc.core.exceptions import DiagnosticsException, HmmMcmcException
from hmm_mcmc.mcmc import ChainOutput, FunctionTarget, LatentStatePosterior, SamplerScheme


def _gaussian_target(rho: float = 0.98) -> FunctionTarget:
    cov = np.eye(4)
    cov[0, 1] = cov[1, 0] = rho
    precision = np.linalg.inv(cov)
    return FunctionTarget(lambda x: float(-0.5 * x @ precision @ x), 4)


def _pilot(samples: np.ndarray, names=None) -> ChainOutput:
    names = names or [f"x{j}" for j in range(samples.shape[1])]
    return ChainOutput(samples, names, 1.0, {}, 0, SamplerScheme.univariate(samples.shape[1]))


def _candidate(blocks, height, min_esps=None) -> BlockingCandidate:
    return BlockingCandidate(SamplerScheme(blocks=blocks), height, min_esps)


FAST = dict(pilot_iterations=2_000, eval_iterations=1_500, min_pilot_rows=1_000)


class TestCandidatePartitions:
    def test_two_correlated_pairs(self):
        corr = np.full((4, 4), 0.1)
        np.fill_diagonal(corr, 1.0)
        corr[0, 1] = corr[1, 0] = 0.95
        corr[2, 3] = corr[3, 2] = -0.92
        candidates = candidate_partitions(corr, [0.0, 0.1, 0.5, 1.0])
        assert [c.scheme.blocks for c in candidates] == [
            [[0], [1], [2], [3]],
            [[0, 1], [2, 3]],
            [[0, 1, 2, 3]],
        ]
        assert [c.cut_height for c in candidates] == [0.0, 0.1, 1.0]

    def test_univariate_partition_is_always_included(self):
        corr = np.array([[1.0, 0.99], [0.99, 1.0]])
        candidates = candidate_partitions(corr, [0.5])
        assert candidates[0].scheme.blocks == [[0], [1]]
        assert candidates[1].scheme.blocks == [[0, 1]]

    def test_single_parameter(self):
        candidates = candidate_partitions(np.eye(1), [0.0, 0.5, 1.0])
        assert [c.scheme.blocks for c in candidates] == [[[0]]]

    def test_names_are_carried(self):
        candidates = candidate_partitions(np.eye(2), [0.0], param_names=["phi", "p"])
        assert candidates[0].scheme.param_names == ["phi", "p"]

    @pytest.mark.parametrize("seed", range(5))
    def test_higher_cuts_coarsen_lower_ones(self, seed):
        rng = np.random.default_rng(seed)
        mixing = rng.standard_normal((8, 8))
        samples = rng.standard_normal((3_000, 8)) @ mixing
        corr = estimate_correlation(_pilot(samples))
        candidates = candidate_partitions(corr, np.linspace(0.0, 1.0, 41))
        assert candidates[-1].scheme.blocks == [list(range(8))]
        for finer, coarser in zip(candidates, candidates[1:]):
            merged = [set(block) for block in coarser.scheme.blocks]
            for block in finer.scheme.blocks:
                assert any(set(block) <= group for group in merged)


class TestEstimateCorrelation:
    def test_recovers_correlation(self, rng):
        samples = rng.multivariate_normal([0, 0], [[1.0, 0.8], [0.8, 1.0]], size=5_000)
        corr = estimate_correlation(_pilot(samples))
        assert corr[0, 1] == pytest.approx(0.8, abs=0.03)
        np.testing.assert_array_equal(np.diag(corr), 1.0)

    def test_duplicated_column_is_perfectly_correlated(self, rng):
        x = rng.standard_normal(2_000) * 0.37 + 0.2
        samples = np.column_stack([x, x, rng.standard_normal(2_000), -x])
        corr = estimate_correlation(_pilot(samples))
        assert corr[0, 1] == 1.0
        assert corr[1, 0] == 1.0
        assert corr[0, 3] == -1.0
        assert abs(corr[0, 2]) < 0.1

    def test_constant_parameter(self, rng, caplog):
        samples = np.column_stack([rng.standard_normal(2_000), np.full(2_000, 0.4),
                                   rng.standard_normal(2_000)])
        with caplog.at_level(logging.WARNING, logger="hmm_mcmc.autoblock"):
            corr = estimate_correlation(_pilot(samples, ["a", "b", "c"]))
        assert "b is constant" in caplog.text
        np.testing.assert_array_equal(corr[1], [0.0, 1.0, 0.0])
        assert np.all(np.isfinite(corr))

    def test_too_few_rows(self, rng):
        with pytest.raises(DiagnosticsException, match="at least 1000"):
            estimate_correlation(_pilot(rng.standard_normal((1_000, 2))), discard_fraction=0.1)


class TestSelectCandidate:
    def test_highest_min_esps(self):
        best = _candidate([[0, 1]], 1.0, 40.0)
        assert select_candidate([_candidate([[0], [1]], 0.0, 10.0), best]) is best

    def test_ties_prefer_fewer_blocks_then_lower_height(self):
        univariate = _candidate([[0], [1], [2], [3]], 0.0, 50.0)
        paired = _candidate([[0, 1], [2, 3]], 0.2, 50.0)
        assert select_candidate([paired, univariate]) is univariate
        low = _candidate([[0, 1], [2], [3]], 0.3, 50.0)
        high = _candidate([[0], [1], [2, 3]], 0.6, 50.0)
        assert select_candidate([high, low, paired]) is low

    def test_unevaluated_candidates_are_ignored(self):
        evaluated = _candidate([[0], [1]], 0.0, 1.0)
        assert select_candidate([_candidate([[0, 1]], 1.0), evaluated]) is evaluated
        with pytest.raises(HmmMcmcException):
            select_candidate([_candidate([[0, 1]], 1.0)])


class TestAutoblock:
    @pytest.mark.slow
    def test_finds_the_correlated_pair(self):
        settings = AutoblockSettings(pilot_iterations=5_000, eval_iterations=5_000,
                                     min_pilot_rows=1_000, cut_heights=[0.0, 0.5])
        chosen = [
            autoblock_target(_gaussian_target(), settings, seed=seed).scheme.blocks
            for seed in range(10)
        ]
        assert sum(blocks == [[0, 1], [2], [3]] for blocks in chosen) >= 8

    def test_failed_candidate_is_skipped(self, mocker, caplog):
        from hmm_mcmc.mcmc import engine

        def first_fails(tasks, max_workers=1):
            return [RuntimeError("diverged")] + engine.run_chains(tasks[1:])

        mocker.patch("hmm_mcmc.autoblock.run_chains", side_effect=first_fails)
        settings = AutoblockSettings(cut_heights=[0.0, 1.0], **FAST)
        with caplog.at_level(logging.WARNING, logger="hmm_mcmc.autoblock"):
            result = autoblock_target(_gaussian_target(), settings, seed=3)
        assert not result.candidates[0].evaluated
        assert result.scheme.blocks == [[0, 1, 2, 3]]
        assert "diverged" in caplog.text

    def test_dipper(self, dipper, dipper_data):
        settings = AutoblockSettings(cut_heights=[0.0, 1.0], **FAST)
        result = run_autoblock(dipper, dipper_data, settings, seed=1)
        assert len(result.candidates) == 2
        assert all(c.evaluated for c in result.candidates)
        assert result.correlation.shape == (2, 2)
        assert result.scheme.param_names == ["phi", "p"]
        assert result.scheme.canonical().blocks in ([[0], [1]], [[0, 1]])
        assert result.history == [result.selected.min_esps]

    def test_auto_block_returns_a_scheme(self, dipper, small_dipper_data):
        scheme = auto_block(dipper, small_dipper_data, pilot_iterations=1_500,
                            eval_iterations=500, heights=[0.0], seed=2)
        assert isinstance(scheme, SamplerScheme)
        assert scheme.blocks == [[0], [1]]

    def test_latent_targets_are_rejected(self, dipper, small_dipper_data):
        target = LatentStatePosterior(dipper, small_dipper_data)
        with pytest.raises(HmmMcmcException, match="filtered"):
            autoblock_target(target, AutoblockSettings(**FAST))

    def test_iterated_rounds(self):
        settings = AutoblockSettings(cut_heights=[0.0, 0.5], iterate=True, max_rounds=3, **FAST)
        result = autoblock_target(_gaussian_target(), settings, seed=5)
        assert 2 <= result.rounds <= 3
        assert len(result.history) == result.rounds
        assert result.selected.min_esps == max(result.history)

    def test_iterated_result_reports_the_winning_round(self, mocker):
        rounds = []

        def scored(target, candidates, *args):
            rounds.append(candidates)
            base = 10.0 if len(rounds) == 1 else 5.0
            for offset, candidate in enumerate(candidates):
                candidate.min_esps = base + offset

        mocker.patch("hmm_mcmc.autoblock._evaluate", side_effect=scored)
        settings = AutoblockSettings(cut_heights=[0.0, 0.5], iterate=True, max_rounds=3, **FAST)
        result = autoblock_target(_gaussian_target(), settings, seed=5)
        assert result.rounds == 2
        assert result.candidates is rounds[0]
        assert any(c is result.selected for c in result.candidates)
        assert result.selected.min_esps == max(result.history)
        assert all(len(block) == 1 for block in result.pilot.scheme.blocks)
        np.testing.assert_array_equal(
            result.correlation, estimate_correlation(result.pilot, min_rows=FAST["min_pilot_rows"]))

    @pytest.mark.parametrize("workers, clock", [(1, time.perf_counter), (2, time.thread_time)])
    def test_concurrent_candidates_use_thread_time(self, mocker, workers, clock):
        from hmm_mcmc.mcmc import engine

        spy = mocker.patch("hmm_mcmc.autoblock.run_chain", wraps=engine.run_chain)
        settings = AutoblockSettings(cut_heights=[0.0, 1.0], **FAST)
        autoblock_target(_gaussian_target(), settings, seed=4,
                         sampler_settings=SamplerSettings(max_workers=workers))
        clocks = [c.kwargs.get("clock") for c in spy.call_args_list]
        assert clocks[0] is None
        assert clocks[1:] == [clock, clock]
