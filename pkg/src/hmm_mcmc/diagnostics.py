"""
Effective sample size, sampling efficiency and strategy comparison
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from numpy.fft import irfft, rfft

from .core.exceptions import DiagnosticsException
from .mcmc.engine import ChainOutput
from .utils.format_utils import create_text_table

logger = logging.getLogger(__name__)

MIN_CHAIN_LENGTH = 100
DEFAULT_DISCARD_FRACTION = 0.1


class StrategyLabel(str, Enum):
    LATENT_STATE = "LatentState"
    FILTERING = "Filtering"
    FILTERING_RR = "FilteringRR"
    FILTERING_BLOCKING = "FilteringBlocking"

    @classmethod
    def from_strategy(cls, strategy: str) -> "StrategyLabel":
        """Label for a CLI strategy name or a label value"""
        mapping = {
            "latent": cls.LATENT_STATE,
            "filter": cls.FILTERING,
            "filter-rr": cls.FILTERING_RR,
            "filter-block": cls.FILTERING_BLOCKING,
        }
        if strategy in mapping:
            return mapping[strategy]
        try:
            return cls(strategy)
        except ValueError:
            raise DiagnosticsException(f"Unknown strategy '{strategy}'")


class EssEstimate(NamedTuple):
    ess: float
    degenerate: bool


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Empirical autocorrelation at every lag, via zero-padded FFT"""
    n = x.shape[0]
    centred = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = rfft(centred, n=size)
    acov = irfft(spectrum * np.conjugate(spectrum), n=size)[:n] / n
    return acov / acov[0]


def estimate_ess(x: Sequence[float], min_length: int = MIN_CHAIN_LENGTH) -> EssEstimate:
    """
    ESS by the initial monotone positive sequence estimator.

    Autocorrelations are summed in adjacent pairs until the first
    non-positive pair; pair sums are forced non-increasing. The result is
    clipped to [0, n]. A constant chain gives 0 and is flagged degenerate.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DiagnosticsException("ESS needs a one-dimensional chain")
    n = x.shape[0]
    if n < min_length:
        raise DiagnosticsException(f"chain of length {n} is shorter than {min_length}")
    if not np.all(np.isfinite(x)):
        raise DiagnosticsException("chain contains non-finite values")
    if np.ptp(x) == 0.0:
        return EssEstimate(0.0, True)

    rho = autocorrelation(x)
    num_pairs = n // 2
    pairs = rho[:2 * num_pairs].reshape(num_pairs, 2).sum(axis=1)

    non_positive = np.flatnonzero(pairs <= 0.0)
    if non_positive.size:
        pairs = pairs[:non_positive[0]]
    pairs = np.minimum.accumulate(pairs)

    tau = -1.0 + 2.0 * pairs.sum()
    if tau <= 0.0:
        return EssEstimate(float(n), False)
    return EssEstimate(float(min(n / tau, n)), False)


def effective_sample_size(x: Sequence[float]) -> float:
    return estimate_ess(x).ess


def _post_discard(chain: ChainOutput, discard_fraction: float) -> np.ndarray:
    if not 0.0 <= discard_fraction < 1.0:
        raise DiagnosticsException(f"discard fraction must lie in [0, 1), got {discard_fraction}")
    discard = int(math.floor(chain.iterations * discard_fraction))
    return chain.samples[discard:]


@dataclass
class EfficiencyReport:
    """Per-parameter ESS and effective samples per second of one run"""

    param_names: List[str]
    ess: np.ndarray
    runtime_seconds: float
    strategy_label: StrategyLabel
    iterations: int = 0

    def __post_init__(self):
        self.ess = np.asarray(self.ess, dtype=float)
        if self.runtime_seconds <= 0.0:
            raise DiagnosticsException("runtime must be positive")
        if len(self.param_names) != self.ess.shape[0]:
            raise DiagnosticsException("one ESS value is needed per parameter")

    @property
    def esps(self) -> np.ndarray:
        return self.ess / self.runtime_seconds

    @property
    def min_esps(self) -> float:
        return float(self.esps.min())

    @property
    def mean_esps(self) -> float:
        return float(self.esps.mean())

    @property
    def max_esps(self) -> float:
        return float(self.esps.max())

    @property
    def slowest_parameter(self) -> str:
        return self.param_names[int(np.argmin(self.ess))]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "parameter": self.param_names,
            "ess": self.ess,
            "esps": self.esps,
            "runtime_seconds": self.runtime_seconds,
            "strategy": self.strategy_label.value,
            "iterations": self.iterations,
        })

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "EfficiencyReport":
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except (OSError, pd.errors.ParserError) as e:
            raise DiagnosticsException(f"Cannot read report {path}: {e}")
        required = {"parameter", "ess", "runtime_seconds", "strategy"}
        if frame.empty or not required.issubset(frame.columns):
            raise DiagnosticsException(f"{path} is not an efficiency report")
        return cls(
            param_names=frame["parameter"].astype(str).tolist(),
            ess=frame["ess"].to_numpy(dtype=float),
            runtime_seconds=float(frame["runtime_seconds"].iloc[0]),
            strategy_label=StrategyLabel.from_strategy(str(frame["strategy"].iloc[0])),
            iterations=int(frame["iterations"].iloc[0]) if "iterations" in frame else 0,
        )


def efficiency_report(chain: ChainOutput, discard_fraction: float = DEFAULT_DISCARD_FRACTION,
                      strategy_label: Optional[Union[StrategyLabel, str]] = None) -> EfficiencyReport:
    """ESS of every parameter after discarding burn-in, and ESS per second"""
    samples = _post_discard(chain, discard_fraction)
    label = strategy_label or chain.strategy or StrategyLabel.FILTERING
    if not isinstance(label, StrategyLabel):
        label = StrategyLabel.from_strategy(label)

    ess = np.empty(samples.shape[1])
    for j, name in enumerate(chain.param_names):
        estimate = estimate_ess(samples[:, j])
        if estimate.degenerate:
            logger.warning(f"Parameter {name} never moved; its ESS is 0")
        ess[j] = estimate.ess

    report = EfficiencyReport(list(chain.param_names), ess, chain.runtime_seconds, label,
                              chain.iterations)
    logger.info(f"{label.value}: min ESPS {report.min_esps:.3g} ({report.slowest_parameter}), "
                f"mean ESPS {report.mean_esps:.3g}")
    return report


def compare_strategies(reports: Sequence[EfficiencyReport]) -> pd.DataFrame:
    """
    One row per report with min/mean ESPS, runtime and fold changes.

    Fold changes are relative to the LatentState report when present,
    otherwise to the first report.
    """
    if len(reports) < 2:
        raise DiagnosticsException("comparing strategies needs at least two reports")
    names = set(reports[0].param_names)
    for report in reports[1:]:
        if set(report.param_names) != names:
            raise DiagnosticsException(
                f"{report.strategy_label.value} covers different parameters than "
                f"{reports[0].strategy_label.value}"
            )

    baseline = next(
        (r for r in reports if r.strategy_label == StrategyLabel.LATENT_STATE), reports[0]
    )
    rows = [{
        "strategy": r.strategy_label.value,
        "min_esps": r.min_esps,
        "mean_esps": r.mean_esps,
        "runtime_seconds": r.runtime_seconds,
        "fold_change": r.min_esps / baseline.min_esps if baseline.min_esps > 0 else np.inf,
        "mean_fold_change": r.mean_esps / baseline.mean_esps if baseline.mean_esps > 0 else np.inf,
    } for r in reports]
    return pd.DataFrame(rows)


def posterior_summary(chain: ChainOutput,
                      discard_fraction: float = DEFAULT_DISCARD_FRACTION) -> pd.DataFrame:
    """Mean, sd, quantiles, ESS and Monte Carlo standard error per parameter"""
    samples = _post_discard(chain, discard_fraction)
    rows = []
    for j, name in enumerate(chain.param_names):
        column = samples[:, j]
        ess = estimate_ess(column).ess
        sd = float(column.std(ddof=1))
        q025, q50, q975 = np.quantile(column, [0.025, 0.5, 0.975])
        rows.append({
            "parameter": name,
            "mean": float(column.mean()),
            "sd": sd,
            "q2.5": float(q025),
            "q50": float(q50),
            "q97.5": float(q975),
            "ess": ess,
            "mcse": sd / math.sqrt(ess) if ess > 0 else np.inf,
        })
    return pd.DataFrame(rows)


def format_comparison(table: pd.DataFrame) -> str:
    headers = list(table.columns)
    return create_text_table(headers, list(table.itertuples(index=False, name=None)))


def write_comparison(table: pd.DataFrame, directory: Union[str, Path]) -> Dict[str, Path]:
    """comparison.csv, comparison.txt and figure.csv (strategy, min, mean)"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": directory / "comparison.csv",
        "text": directory / "comparison.txt",
        "figure": directory / "figure.csv",
    }
    table.to_csv(paths["csv"], index=False, float_format="%.6g")
    paths["text"].write_text(format_comparison(table), encoding="utf-8")
    figure = table[["strategy", "min_esps", "mean_esps"]].rename(
        columns={"min_esps": "min", "mean_esps": "mean"}
    )
    figure.to_csv(paths["figure"], index=False, float_format="%.6g")
    logger.info(f"Wrote comparison of {len(table)} strategies to {directory}")
    return paths
