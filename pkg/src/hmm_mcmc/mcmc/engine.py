"""
MCMC engine: runs a sampler scheme against a posterior target
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config.settings import SamplerSettings
from ..core.base_model import HierarchicalModel
from ..core.exceptions import InitializationException
from .samplers import build_samplers
from .scheme import AdaptationSettings, SamplerScheme
from .target import FilteredPosterior, LatentStatePosterior, PosteriorTarget

logger = logging.getLogger(__name__)

MAX_INIT_DRAWS = 100
MIN_RUNTIME = 0.001


@dataclass
class ChainOutput:
    """Draws of the top-level parameters plus run bookkeeping"""

    samples: np.ndarray
    param_names: List[str]
    runtime_seconds: float
    acceptance_rates: Dict[str, float]
    seed: Optional[int]
    scheme: SamplerScheme
    strategy: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return int(self.samples.shape[0])

    @property
    def final_state(self) -> np.ndarray:
        return self.samples[-1].copy()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.samples, columns=self.param_names)


def _starting_point(target: PosteriorTarget, rng: np.random.Generator,
                    initial_theta: Optional[np.ndarray]) -> np.ndarray:
    """Initial theta with a finite log posterior"""
    if initial_theta is not None:
        theta = np.asarray(initial_theta, dtype=float).copy()
        target.initialise_latents(theta)
        if not np.isfinite(target.log_posterior(theta)):
            raise InitializationException(
                f"Non-finite initial log posterior: {target.describe_failure(theta)}"
            )
        return theta

    for attempt in range(MAX_INIT_DRAWS):
        theta = target.initial_theta(rng)
        target.initialise_latents(theta)
        if np.isfinite(target.log_posterior(theta)):
            if attempt:
                logger.debug(f"Found a finite starting point after {attempt + 1} draws")
            return theta
    raise InitializationException(
        f"No finite initial log posterior in {MAX_INIT_DRAWS} draws: "
        f"{target.describe_failure(theta)}"
    )


def run_chain(target: PosteriorTarget, scheme: SamplerScheme, iterations: int,
              seed: Optional[int] = None, initial_theta: Optional[np.ndarray] = None,
              settings: Optional[SamplerSettings] = None, show_progress: bool = False,
              strategy: Optional[str] = None,
              clock: Optional[Callable[[], float]] = None) -> ChainOutput:
    """
    Run one chain for a fixed number of iterations.

    Each iteration updates every block in scheme order, then sweeps the latent
    states when the target has them. The whole run draws from one generator
    seeded with ``seed``, so equal inputs give bit-identical samples. The
    runtime covers the sampling loop only and is read from ``clock``, wall time
    (`time.perf_counter`) unless given.
    """
    if iterations < 1:
        raise InitializationException("iterations must be positive")
    settings = settings or SamplerSettings()
    names = target.param_names
    scheme.validate_for(len(names))

    rng = np.random.default_rng(seed)
    theta = _starting_point(target, rng, initial_theta)
    samplers = build_samplers(scheme, names, target.initial_scales, settings.covariance_jitter)
    log_posterior = target.log_posterior
    log_post = log_posterior(theta)

    samples = np.empty((iterations, len(names)))
    logger.info(f"Running {iterations} iterations: {scheme.describe(names)}"
                + (" + latent states" if target.has_latents else ""))

    clock = clock or time.perf_counter
    start = clock()
    for it in tqdm(range(iterations), disable=not show_progress, desc="MCMC", unit="it"):
        for sampler in samplers:
            theta, log_post, _ = sampler.step(theta, log_post, log_posterior, rng)
        if target.has_latents:
            target.update_latents(theta, rng)
            log_post = log_posterior(theta)
        samples[it] = theta
    elapsed = clock() - start

    runtime = max(round(elapsed, 3), MIN_RUNTIME)
    rates = {s.label: s.acceptance_rate for s in samplers}
    logger.info(f"Finished {iterations} iterations in {runtime:.3f} s")
    return ChainOutput(
        samples=samples,
        param_names=list(names),
        runtime_seconds=runtime,
        acceptance_rates=rates,
        seed=seed,
        scheme=scheme,
        strategy=strategy,
        metadata={"num_latents": target.num_latents},
    )


def build_target(model: HierarchicalModel, data, scheme: SamplerScheme) -> PosteriorTarget:
    if scheme.latent_sampling:
        return LatentStatePosterior(model, data)
    return FilteredPosterior(model, data)


def run_mcmc(model: HierarchicalModel, data, scheme: SamplerScheme, iterations: int,
             seed: Optional[int] = None, initial_theta: Optional[np.ndarray] = None,
             settings: Optional[SamplerSettings] = None, show_progress: bool = False,
             strategy: Optional[str] = None) -> ChainOutput:
    """
    Sample the posterior of a hierarchical model.

    With ``scheme.latent_sampling`` latent states are sampled alongside theta
    and the dataset must be the full one; otherwise they are summed out by
    filtering and raw or reduced data both work.
    """
    scheme.validate_for(model.dimension, model.param_names)
    if settings is not None and scheme.adaptation == AdaptationSettings():
        scheme = scheme.model_copy(update={"adaptation": AdaptationSettings(
            interval=settings.adaptation_interval,
            scalar_target=settings.scalar_target,
            block_target=settings.block_target,
        )})
    target = build_target(model, data, scheme)
    chain = run_chain(target, scheme, iterations, seed, initial_theta, settings,
                      show_progress, strategy)
    chain.metadata["model"] = model.name
    return chain


def run_chains(tasks: Sequence[Callable[[], ChainOutput]],
               max_workers: int = 1) -> List[Union[ChainOutput, Exception]]:
    """
    Run independent chain tasks, returning results in task order.

    A task that raises yields its exception in place of a chain. Tasks share one
    interpreter, so with ``max_workers > 1`` the chains contend for the GIL and
    their wall-clock runtimes are inflated unevenly; time concurrent chains with
    `time.thread_time` when their ESPS will be compared.
    """
    def _guarded(task: Callable[[], ChainOutput]) -> Union[ChainOutput, Exception]:
        try:
            return task()
        except Exception as e:
            logger.debug(f"Chain task failed: {e}")
            return e

    if max_workers <= 1 or len(tasks) <= 1:
        return [_guarded(task) for task in tasks]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(_guarded, tasks))
