"""
Chain persistence: chain.csv plus a meta.json sidecar
"""

import json
import logging
from pathlib import Path
from typing import Union

import pandas as pd

from ..core.exceptions import HmmMcmcException
from .engine import ChainOutput
from .scheme import SamplerScheme

logger = logging.getLogger(__name__)

CHAIN_FILE = "chain.csv"
META_FILE = "meta.json"


def save_chain(chain: ChainOutput, directory: Union[str, Path]) -> Path:
    """Write the draws (header = parameter names) and run metadata"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    chain.to_frame().to_csv(directory / CHAIN_FILE, index=False, float_format="%.17g")
    meta = {
        "iterations": chain.iterations,
        "param_names": chain.param_names,
        "seed": chain.seed,
        "runtime_seconds": chain.runtime_seconds,
        "acceptance_rates": chain.acceptance_rates,
        "strategy": chain.strategy,
        "scheme": chain.scheme.model_dump(),
        "metadata": chain.metadata,
    }
    with open(directory / META_FILE, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, ensure_ascii=False)

    logger.info(f"Saved {chain.iterations} draws to {directory}")
    return directory


def load_chain(directory: Union[str, Path]) -> ChainOutput:
    directory = Path(directory)
    chain_path = directory / CHAIN_FILE
    meta_path = directory / META_FILE
    if not chain_path.exists() or not meta_path.exists():
        raise HmmMcmcException(f"{directory} does not contain {CHAIN_FILE} and {META_FILE}")

    with open(meta_path, "r", encoding="utf-8") as f:
        meta = json.load(f)
    frame = pd.read_csv(chain_path, float_precision="round_trip")

    return ChainOutput(
        samples=frame.to_numpy(dtype=float),
        param_names=list(frame.columns),
        runtime_seconds=float(meta["runtime_seconds"]),
        acceptance_rates=meta.get("acceptance_rates", {}),
        seed=meta.get("seed"),
        scheme=SamplerScheme.model_validate(meta["scheme"]),
        strategy=meta.get("strategy"),
        metadata=meta.get("metadata", {}),
    )
