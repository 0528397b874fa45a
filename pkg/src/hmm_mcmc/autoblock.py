"""
Automated block selection from pilot-chain posterior correlations

A pilot chain with univariate samplers estimates the posterior correlation
matrix. Complete-linkage clustering on the distance 1 - |rho| gives one
partition per cut height; every distinct partition is benchmarked with a
short chain and the one with the highest minimum ESPS wins.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .config.settings import AutoblockSettings, SamplerSettings
from .core.base_model import HierarchicalModel
from .core.exceptions import DiagnosticsException, HmmMcmcException
from .diagnostics import EfficiencyReport, StrategyLabel, efficiency_report
from .mcmc.engine import ChainOutput, run_chain, run_chains
from .mcmc.scheme import AdaptationSettings, SamplerScheme
from .mcmc.target import FilteredPosterior, PosteriorTarget

logger = logging.getLogger(__name__)

DEFAULT_CUT_HEIGHTS = tuple(round(0.1 * i, 1) for i in range(11))
UNIT_CORRELATION_TOL = 1e-12


@dataclass
class BlockingCandidate:
    """A partition from one cut height and its measured efficiency"""

    scheme: SamplerScheme
    cut_height: float
    min_esps: Optional[float] = None
    report: Optional[EfficiencyReport] = None

    @property
    def evaluated(self) -> bool:
        return self.min_esps is not None


@dataclass
class AutoblockResult:
    scheme: SamplerScheme
    selected: BlockingCandidate
    candidates: List[BlockingCandidate]
    correlation: np.ndarray
    pilot: ChainOutput
    rounds: int = 1
    history: List[float] = field(default_factory=list)


def estimate_correlation(pilot: ChainOutput, discard_fraction: float = 0.1,
                         min_rows: int = 1000) -> np.ndarray:
    """
    Posterior correlation matrix from post-discard pilot draws.

    Parameters that never moved get zero correlation with every other one.
    """
    discard = int(np.floor(pilot.iterations * discard_fraction))
    samples = pilot.samples[discard:]
    if samples.shape[0] < min_rows:
        raise DiagnosticsException(
            f"pilot has {samples.shape[0]} rows after discarding, at least {min_rows} are needed"
        )

    d = samples.shape[1]
    constant = np.ptp(samples, axis=0) == 0.0
    for index in np.flatnonzero(constant):
        logger.warning(f"Parameter {pilot.param_names[index]} is constant in the pilot chain")

    corr = np.eye(d)
    moving = np.flatnonzero(~constant)
    if moving.size > 1:
        sub = np.atleast_2d(np.corrcoef(samples[:, moving], rowvar=False))
        corr[np.ix_(moving, moving)] = sub
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    # exact linear dependence can land a few ulps short of |r| = 1
    dependent = np.abs(np.abs(corr) - 1.0) < UNIT_CORRELATION_TOL
    corr[dependent] = np.sign(corr[dependent])
    np.fill_diagonal(corr, 1.0)
    return corr


def candidate_partitions(corr: np.ndarray, heights: Sequence[float] = DEFAULT_CUT_HEIGHTS,
                         param_names: Optional[Sequence[str]] = None,
                         adaptation: Optional[AdaptationSettings] = None) -> List[BlockingCandidate]:
    """
    One candidate per distinct partition, in increasing cut height.

    Height 0 gives all singletons and height 1 a single block. The
    all-univariate partition is always included.
    """
    corr = np.asarray(corr, dtype=float)
    d = corr.shape[0]
    adaptation = adaptation or AdaptationSettings()
    names = list(param_names) if param_names is not None else None

    tree = None
    if d > 1:
        distance = 1.0 - np.abs(corr)
        np.fill_diagonal(distance, 0.0)
        distance = np.clip((distance + distance.T) / 2.0, 0.0, 1.0)
        tree = linkage(squareform(distance, checks=False), method="complete")

    candidates: List[BlockingCandidate] = []
    seen = set()
    for height in sorted(set([0.0] + [float(h) for h in heights])):
        if height <= 0.0 or d == 1:
            labels = np.arange(d)
        elif height >= 1.0:
            labels = np.zeros(d, dtype=int)
        else:
            labels = fcluster(tree, t=height, criterion="distance")

        blocks = {}
        for index, label in enumerate(labels):
            blocks.setdefault(label, []).append(index)
        partition = sorted(blocks.values(), key=lambda b: b[0])
        key = tuple(tuple(b) for b in partition)
        if key in seen:
            continue
        seen.add(key)
        scheme = SamplerScheme(blocks=partition, adaptation=adaptation, param_names=names)
        candidates.append(BlockingCandidate(scheme, height))

    logger.info(f"{len(candidates)} distinct partitions from {len(heights)} cut heights")
    return candidates


def select_candidate(candidates: Sequence[BlockingCandidate]) -> BlockingCandidate:
    """Highest min ESPS; ties go to fewer multi-parameter blocks, then lower height"""
    evaluated = [c for c in candidates if c.evaluated]
    if not evaluated:
        raise HmmMcmcException("no blocking candidate could be evaluated")
    return min(evaluated, key=lambda c: (-c.min_esps, c.scheme.num_multi_blocks, c.cut_height))


def _evaluate(target: PosteriorTarget, candidates: List[BlockingCandidate], start: np.ndarray,
              iterations: int, seed: Optional[int], discard_fraction: float,
              sampler_settings: SamplerSettings, max_workers: int):
    """Benchmark every candidate from the same state with the same seed"""
    # concurrent candidates share the GIL: time each on its own thread CPU clock
    clock = time.thread_time if max_workers > 1 else time.perf_counter
    tasks = [
        (lambda c=c: run_chain(target, c.scheme, iterations, seed, start, sampler_settings,
                               strategy=StrategyLabel.FILTERING_BLOCKING.value, clock=clock))
        for c in candidates
    ]
    for candidate, outcome in zip(candidates, run_chains(tasks, max_workers)):
        if isinstance(outcome, Exception):
            logger.warning(f"Skipping candidate at height {candidate.cut_height}: {outcome}")
            continue
        try:
            report = efficiency_report(outcome, discard_fraction, StrategyLabel.FILTERING_BLOCKING)
        except HmmMcmcException as e:
            logger.warning(f"Skipping candidate at height {candidate.cut_height}: {e}")
            continue
        candidate.report = report
        candidate.min_esps = report.min_esps
        logger.info(f"Height {candidate.cut_height:.2f}: {candidate.scheme.describe()} "
                    f"-> min ESPS {report.min_esps:.3g}")


def autoblock_target(target: PosteriorTarget, settings: Optional[AutoblockSettings] = None,
                     seed: Optional[int] = None, discard_fraction: float = 0.1,
                     sampler_settings: Optional[SamplerSettings] = None,
                     initial_theta: Optional[np.ndarray] = None) -> AutoblockResult:
    """Select a blocking scheme for any posterior over top-level parameters"""
    settings = settings or AutoblockSettings()
    sampler_settings = sampler_settings or SamplerSettings()
    if target.has_latents:
        raise HmmMcmcException("automated blocking applies to filtered posteriors only")

    adaptation = AdaptationSettings(
        interval=sampler_settings.adaptation_interval,
        scalar_target=sampler_settings.scalar_target,
        block_target=sampler_settings.block_target,
    )
    names = target.param_names
    pilot_scheme = SamplerScheme.univariate(len(names), adaptation=adaptation, param_names=names)
    eval_seed = None if seed is None else seed + 1

    pilot = run_chain(target, pilot_scheme, settings.pilot_iterations, seed, initial_theta,
                      sampler_settings, strategy=StrategyLabel.FILTERING.value)
    best: Optional[BlockingCandidate] = None
    history: List[float] = []
    rounds = 0
    # candidates, correlation and pilot of the round that produced `best`
    winning_round = None

    while rounds < (settings.max_rounds if settings.iterate else 1):
        rounds += 1
        corr = estimate_correlation(pilot, discard_fraction, settings.min_pilot_rows)
        candidates = candidate_partitions(corr, settings.cut_heights, names, adaptation)
        _evaluate(target, candidates, pilot.final_state, settings.eval_iterations, eval_seed,
                  discard_fraction, sampler_settings, sampler_settings.max_workers)
        chosen = select_candidate(candidates)
        history.append(chosen.min_esps)

        if best is not None and chosen.min_esps <= best.min_esps:
            logger.info(f"Round {rounds} brought no improvement; stopping")
            break
        best = chosen
        winning_round = (candidates, corr, pilot)
        if settings.iterate and rounds < settings.max_rounds:
            # re-pilot under the chosen scheme
            pilot = run_chain(target, chosen.scheme, settings.pilot_iterations, seed,
                              pilot.final_state, sampler_settings,
                              strategy=StrategyLabel.FILTERING_BLOCKING.value)

    logger.info(f"Selected {best.scheme.describe()} (min ESPS {best.min_esps:.3g})")
    best_candidates, best_corr, best_pilot = winning_round
    return AutoblockResult(best.scheme, best, best_candidates, best_corr, best_pilot, rounds, history)


def run_autoblock(model: HierarchicalModel, data, settings: Optional[AutoblockSettings] = None,
                  seed: Optional[int] = None, discard_fraction: float = 0.1,
                  sampler_settings: Optional[SamplerSettings] = None) -> AutoblockResult:
    """Pilot, cluster and benchmark on the filtered posterior of a model"""
    target = FilteredPosterior(model, data)
    return autoblock_target(target, settings, seed, discard_fraction, sampler_settings)


def auto_block(model: HierarchicalModel, data, pilot_iterations: int = 10_000,
               eval_iterations: int = 5_000,
               heights: Sequence[float] = DEFAULT_CUT_HEIGHTS,
               seed: Optional[int] = None) -> SamplerScheme:
    """The selected scheme only"""
    settings = AutoblockSettings(pilot_iterations=pilot_iterations,
                                 eval_iterations=eval_iterations,
                                 cut_heights=list(heights))
    return run_autoblock(model, data, settings, seed).scheme
