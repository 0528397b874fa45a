#!/usr/bin/env python3
"""
hmm-mcmc CLI

Command-line interface for simulating capture-history data, running MCMC
under the four sampling strategies, selecting blocking schemes and
comparing strategy efficiency.
"""

import argparse
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from . import __description__, __version__
from .autoblock import run_autoblock
from .config.settings import HmmMcmcConfig, LoggingSettings, load_config
from .core.base_model import HierarchicalModel
from .core.exceptions import (
    ConfigurationException,
    HmmMcmcException,
    ModelSpecificationException,
    SamplerSchemeException,
)
from .data import CaptureDataset, ReducedDataset, expand_dataset, load_data, reduce_dataset, write_dataset
from .diagnostics import (
    MIN_CHAIN_LENGTH,
    EfficiencyReport,
    compare_strategies,
    efficiency_report,
    format_comparison,
    posterior_summary,
    write_comparison,
)
from .mcmc import REDUCED_DATA_MESSAGE, SamplerScheme, load_chain, run_mcmc, save_chain
from .models import available_models, get_model, simulate_dataset
from .utils.format_utils import create_text_table, format_seconds, sanitize_filename

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

REPORT_FILE = "report.csv"
SUMMARY_FILE = "summary.csv"

Strategy = Literal["latent", "filter", "filter-rr", "filter-block"]


class RunConfig(BaseModel):
    """A validated `run` request"""

    model: str
    model_file: Optional[Path] = None
    data: Path
    strategy: Strategy = "filter"
    iterations: int = Field(default=10_000, ge=1)
    seed: Optional[int] = None
    output: Path
    scheme: Optional[Path] = None
    discard_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)
    show_progress: bool = False

    @model_validator(mode="after")
    def _check_strategy(self) -> "RunConfig":
        if self.strategy == "filter-block" and self.scheme is None:
            raise ValueError("strategy filter-block needs --scheme")
        if self.strategy != "filter-block" and self.scheme is not None:
            raise ValueError(f"--scheme only applies to filter-block, not {self.strategy}")
        if self.model == "custom" and self.model_file is None:
            raise ValueError("model custom needs --model-file")
        kept = self.iterations - math.floor(self.iterations * self.discard_fraction)
        if kept < MIN_CHAIN_LENGTH:
            raise ValueError(
                f"{self.iterations} iterations keep {kept} draws after discarding, "
                f"the report needs at least {MIN_CHAIN_LENGTH}"
            )
        return self

    def prepare_data(self, data: Union[CaptureDataset, ReducedDataset]):
        """Dataset form each strategy samples from"""
        if self.strategy == "latent":
            if isinstance(data, ReducedDataset):
                raise SamplerSchemeException(REDUCED_DATA_MESSAGE)
            return data
        if self.strategy == "filter-rr":
            return data if isinstance(data, ReducedDataset) else reduce_dataset(data)
        if isinstance(data, ReducedDataset):
            return expand_dataset(data)
        return data

    def build_scheme(self, model: HierarchicalModel) -> SamplerScheme:
        if self.strategy == "filter-block":
            scheme = SamplerScheme.load(self.scheme)
            scheme.validate_for(model.dimension, model.param_names)
            return scheme
        return SamplerScheme.univariate(
            model.dimension,
            latent_sampling=self.strategy == "latent",
            param_names=model.param_names,
        )


def setup_logging(settings: LoggingSettings, level: Optional[str] = None):
    """Configure the root logger on stderr, plus a log file when configured"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding="utf-8"))
    level_name = (level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def _load_model(name: str, model_file: Optional[Path]) -> HierarchicalModel:
    return get_model(name, model_file)


def _default_run_dir(config: HmmMcmcConfig, model: str, strategy: str, seed: Optional[int]) -> Path:
    label = sanitize_filename(f"{model}-{strategy}-seed{seed if seed is not None else 'none'}")
    return Path(config.run.output_root) / label


def parse_theta(model: HierarchicalModel, text: Optional[str]) -> np.ndarray:
    """
    Parameter vector from "v1,v2,..." or "name=value,..." overrides.

    Unnamed values must cover every parameter; named ones start from the
    model's default theta.
    """
    theta = model.default_theta()
    if not text:
        return theta
    items = [item.strip() for item in text.split(",") if item.strip()]
    if all("=" in item for item in items):
        names = model.param_names
        for item in items:
            name, value = item.split("=", 1)
            if name.strip() not in names:
                raise ConfigurationException(f"{model.name} has no parameter '{name.strip()}'")
            theta[names.index(name.strip())] = float(value)
        return theta
    try:
        values = [float(item) for item in items]
    except ValueError:
        raise ConfigurationException(f"cannot parse --theta '{text}'")
    if len(values) != model.dimension:
        raise ConfigurationException(
            f"{model.name} has {model.dimension} parameters, --theta gives {len(values)}"
        )
    return np.array(values)


def cmd_run(args: argparse.Namespace, config: HmmMcmcConfig) -> int:
    """Run one chain and persist chain.csv, meta.json, report.csv and summary.csv"""
    try:
        run_config = RunConfig(
            model=args.model,
            model_file=args.model_file,
            data=args.data,
            strategy=args.strategy,
            iterations=args.iterations or config.run.default_iterations,
            seed=args.seed,
            output=args.output or _default_run_dir(config, args.model, args.strategy, args.seed),
            scheme=args.scheme,
            discard_fraction=(args.discard if args.discard is not None
                              else config.diagnostics.discard_fraction),
            show_progress=args.progress or config.run.show_progress,
        )
    except ValidationError as e:
        raise ConfigurationException(f"Invalid run configuration: {e}")

    model = _load_model(run_config.model, run_config.model_file)
    data = run_config.prepare_data(load_data(run_config.data, model.num_obs))
    scheme = run_config.build_scheme(model)

    output = run_config.output
    output.parent.mkdir(parents=True, exist_ok=True)
    # outputs land in `output` only once every file has been written
    staging = Path(tempfile.mkdtemp(prefix=f".{output.name}.", dir=output.parent))
    try:
        chain = run_mcmc(model, data, scheme, run_config.iterations, run_config.seed,
                         settings=config.sampler, show_progress=run_config.show_progress,
                         strategy=run_config.strategy)
        chain.metadata.update({
            "data": str(run_config.data),
            "num_histories": len(data),
            "discard_fraction": run_config.discard_fraction,
        })
        save_chain(chain, staging)
        report = efficiency_report(chain, run_config.discard_fraction)
        report.to_csv(staging / REPORT_FILE)
        posterior_summary(chain, run_config.discard_fraction).to_csv(
            staging / SUMMARY_FILE, index=False, float_format="%.6g"
        )
        output.mkdir(parents=True, exist_ok=True)
        for path in staging.iterdir():
            os.replace(path, output / path.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)

    print(f"✅ {report.strategy_label.value}: {chain.iterations} iterations in "
          f"{format_seconds(chain.runtime_seconds)}")
    print(f"   min ESPS {report.min_esps:.4g} ({report.slowest_parameter}), "
          f"mean ESPS {report.mean_esps:.4g}")
    print(f"   outputs in {output}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: HmmMcmcConfig) -> int:
    """Simulate a dataset and write it with a metadata sidecar"""
    model = _load_model(args.model, args.model_file)
    theta = parse_theta(model, args.theta)
    dataset = simulate_dataset(model, theta, args.n, args.occasions, args.seed)

    output = Path(args.output)
    write_dataset(reduce_dataset(dataset) if args.reduced else dataset, output)
    meta_path = output.with_name(output.name + ".meta.json")
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(dataset.metadata, f, indent=2, ensure_ascii=False)

    print(f"✅ Simulated {len(dataset)} histories over {dataset.num_occasions} occasions -> {output}")
    return EXIT_OK


def cmd_autoblock(args: argparse.Namespace, config: HmmMcmcConfig) -> int:
    """Select a blocking scheme and save it for `run --strategy filter-block`"""
    model = _load_model(args.model, args.model_file)
    data = load_data(args.data, model.num_obs)

    settings = config.autoblock
    if args.pilot_iterations:
        settings.pilot_iterations = args.pilot_iterations
    if args.eval_iterations:
        settings.eval_iterations = args.eval_iterations
    if args.heights:
        settings.cut_heights = [float(h) for h in args.heights.split(",")]
    if args.iterate:
        settings.iterate = True
    if args.max_workers:
        config.sampler.max_workers = args.max_workers

    discard = args.discard if args.discard is not None else config.diagnostics.discard_fraction
    result = run_autoblock(model, data, settings, args.seed, discard, config.sampler)
    path = result.scheme.save(args.output)

    rows = [
        [c.cut_height, c.scheme.describe(model.param_names),
         c.min_esps if c.evaluated else "failed"]
        for c in result.candidates
    ]
    print(create_text_table(["height", "blocks", "min_esps"], rows, precision=4))
    print(f"✅ Selected {result.scheme.describe(model.param_names)} -> {path}")
    return EXIT_OK


def _load_report(path: Path, discard_fraction: float) -> EfficiencyReport:
    """report.csv of a run directory, regenerated from the chain when missing"""
    if path.is_file():
        return EfficiencyReport.from_csv(path)
    if (path / REPORT_FILE).exists():
        return EfficiencyReport.from_csv(path / REPORT_FILE)
    logger.info(f"No {REPORT_FILE} in {path}; recomputing from the chain")
    chain = load_chain(path)
    return efficiency_report(chain, discard_fraction)


def cmd_report(args: argparse.Namespace, config: HmmMcmcConfig) -> int:
    """Compare the efficiency reports of several runs"""
    discard = args.discard if args.discard is not None else config.diagnostics.discard_fraction
    reports = [_load_report(Path(run), discard) for run in args.runs]
    table = compare_strategies(reports)
    print(format_comparison(table))
    if args.output:
        paths = write_comparison(table, args.output)
        print(f"✅ Comparison written to {paths['csv'].parent}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmm-mcmc",
        description=__description__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  hmm-mcmc simulate --model dipper --n 300 --occasions 7 --theta 0.6,0.9 --seed 1 --output d.txt
  hmm-mcmc run --model dipper --data d.txt --strategy filter --iterations 10000 --seed 1
  hmm-mcmc autoblock --model orchid --data orchid.txt --seed 1 --output scheme.json
  hmm-mcmc run --model orchid --data orchid.txt --strategy filter-block --scheme scheme.json
  hmm-mcmc report runs/dipper-latent-seed1 runs/dipper-filter-seed1 --output comparison
        """
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="Configuration file (JSON)")
    parser.add_argument("--log-level", help="Log level (overrides configuration)")

    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_model_args(sub: argparse.ArgumentParser):
        sub.add_argument("--model", required=True,
                         help=f"Model name: {', '.join(available_models())} or custom")
        sub.add_argument("--model-file", type=Path, help="JSON description of a custom model")

    run = subparsers.add_parser("run", help="Run MCMC under one sampling strategy")
    add_model_args(run)
    run.add_argument("--data", type=Path, required=True, help="Capture-history file")
    run.add_argument("--strategy", default="filter",
                     choices=["latent", "filter", "filter-rr", "filter-block"])
    run.add_argument("--iterations", type=int, help="Iterations (default from configuration)")
    run.add_argument("--seed", type=int, help="Random seed")
    run.add_argument("--output", type=Path, help="Run directory")
    run.add_argument("--scheme", type=Path, help="Scheme file for filter-block")
    run.add_argument("--discard", type=float, help="Burn-in fraction for the report")
    run.add_argument("--progress", action="store_true", help="Show a progress bar")
    run.set_defaults(handler=cmd_run)

    simulate = subparsers.add_parser("simulate", help="Simulate a capture-history dataset")
    add_model_args(simulate)
    simulate.add_argument("--n", type=int, required=True, help="Number of individuals")
    simulate.add_argument("--occasions", type=int, help="Number of occasions")
    simulate.add_argument("--theta", help='Parameters as "v1,v2,..." or "name=value,..."')
    simulate.add_argument("--seed", type=int, help="Random seed")
    simulate.add_argument("--output", type=Path, required=True, help="Dataset file")
    simulate.add_argument("--reduced", action="store_true", help="Write the reduced representation")
    simulate.set_defaults(handler=cmd_simulate)

    autoblock = subparsers.add_parser("autoblock", help="Select a blocking scheme")
    add_model_args(autoblock)
    autoblock.add_argument("--data", type=Path, required=True, help="Capture-history file")
    autoblock.add_argument("--seed", type=int, help="Random seed")
    autoblock.add_argument("--pilot-iterations", type=int)
    autoblock.add_argument("--eval-iterations", type=int)
    autoblock.add_argument("--heights", help="Comma-separated cut heights")
    autoblock.add_argument("--iterate", action="store_true",
                           help="Re-pilot under the chosen scheme until no improvement")
    autoblock.add_argument("--max-workers", type=int, help="Concurrent evaluation chains")
    autoblock.add_argument("--discard", type=float, help="Burn-in fraction")
    autoblock.add_argument("--output", type=Path, required=True, help="Scheme file (JSON)")
    autoblock.set_defaults(handler=cmd_autoblock)

    report = subparsers.add_parser("report", help="Compare strategy runs")
    report.add_argument("runs", nargs="+", help="Run directories or report.csv files")
    report.add_argument("--discard", type=float, help="Burn-in fraction when recomputing")
    report.add_argument("--output", type=Path, help="Directory for the comparison files")
    report.set_defaults(handler=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigurationException as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    setup_logging(config.logging, args.log_level)

    try:
        return args.handler(args, config)
    except (ConfigurationException, ModelSpecificationException, SamplerSchemeException) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (HmmMcmcException, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("\n👋 Interrupted by user", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
