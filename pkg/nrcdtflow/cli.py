"""
Command line entry point

Usage:
    nrcdtflow gen        --config config/nt_affine_strong.yml --out results/affine_strong [--idx]
    nrcdtflow features   --config config/nt_affine_strong.yml --out results/affine_strong [--fields]
    nrcdtflow classify   --config config/nt_affine_strong.yml --out results/affine_strong
    nrcdtflow experiment --config config/nt_rigid.yml --seed 7 --threads 4
    nrcdtflow phase      --config config/phase_salt.yml
    nrcdtflow selftest

gen, features and classify form the experiment pipeline one stage at a time:
each stage reads what the previous one wrote into the output directory.

Exit codes: 0 success, 1 validation or self-test failure, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from . import __version__
from .classify.features import extract_feature_sets
from .datagen.dataset import MANIFEST_NAME, Dataset, read_dataset, template_dataset, write_dataset
from .datagen.idx import write_idx
from .exceptions import NrcdtFlowError
from .experiments.config import ConfigError, ConfigIssue, ExperimentConfig
from .experiments.runner import (
    ExperimentResult,
    RepetitionOutcome,
    build_experiment_dataset,
    classify_feature_sets,
    read_feature_files,
    result_rows,
    run_experiment,
    run_phase_transition,
    setting_row,
    write_feature_files,
    write_field_files,
)
from .experiments.selftest import SUITES, selftest
from .logging_config import configure_logging, log_with_context
from .settings import THREADS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_IO = 2

DATASET_DIR = "dataset"


class Context:
    """Resolved options shared by every subcommand"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            config = config.with_seed(args.seed)
        if args.out is not None:
            config = config.with_overrides(output_dir=str(args.out))
        self.config = config
        self.out = Path(config.run.output_dir)
        self.threads = args.threads if args.threads is not None else THREADS
        self.config_hash = config.config_hash()

    @property
    def comment(self) -> str:
        return f"seed={self.config.run.seed} config={self.config_hash}"


# ============================================================================
# Subcommands
# ============================================================================

def _as_idx_images(dataset: Dataset) -> np.ndarray:
    images = dataset.images
    peaks = images.max(axis=(1, 2), keepdims=True)
    peaks[peaks <= 0] = 1.0
    return np.rint(images / peaks * 255.0).astype(np.uint8)


def cmd_gen(ctx: Context) -> int:
    dataset = build_experiment_dataset(ctx.config, ctx.config.run.seed, max_workers=ctx.threads)
    directory = write_dataset(dataset, ctx.out / DATASET_DIR, comment=ctx.comment)
    if ctx.args.idx:
        write_idx(directory / "images-idx3-ubyte", _as_idx_images(dataset))
        write_idx(directory / "labels-idx1-ubyte", dataset.labels.astype(np.uint8))
    print(f"{len(dataset)} samples written to {directory}")
    return EXIT_OK


def cmd_features(ctx: Context) -> int:
    config = ctx.config
    source = Path(ctx.args.data) if ctx.args.data else ctx.out / DATASET_DIR
    if (source / MANIFEST_NAME).exists():
        dataset = read_dataset(source)
    else:
        logger.info(f"No dataset in {source}; generating it from the config")
        dataset = build_experiment_dataset(config, config.run.seed, max_workers=ctx.threads)

    feature_config = config.discretization.feature_config()
    sets = extract_feature_sets(
        dataset.measures(),
        dataset.labels,
        config.run.representations,
        feature_config,
        max_workers=ctx.threads,
        config_hash=ctx.config_hash,
    )
    write_feature_files(sets, ctx.out)
    if ctx.args.fields:
        write_field_files(dataset.measures(), feature_config, ctx.out / "fields", max_workers=ctx.threads)
    if config.classifier.kind == "nt":
        templates = template_dataset(config.dataset_spec())
        template_sets = extract_feature_sets(
            templates.measures(),
            templates.labels,
            config.run.representations,
            feature_config,
            max_workers=ctx.threads,
            config_hash=ctx.config_hash,
        )
        write_feature_files(template_sets, ctx.out, stem="templates")
    print(f"Features of {len(dataset)} samples written to {ctx.out}")
    return EXIT_OK


def cmd_classify(ctx: Context) -> int:
    config = ctx.config
    source = Path(ctx.args.features) if ctx.args.features else ctx.out
    tags = config.run.representations
    sets = read_feature_files(source, tags, config_hash=ctx.config_hash)
    templates = None
    if config.classifier.kind == "nt":
        templates = read_feature_files(source, tags, stem="templates", config_hash=ctx.config_hash)

    reports, probes = classify_feature_sets(config, sets, templates, config.run.seed, 0, ctx.threads)
    angles = config.discretization.angles
    rows = result_rows(config, setting_row(config, angles), [RepetitionOutcome(reports, probes, 0.0)], ctx.config_hash)
    columns = list(rows[0]) if rows else []
    result = ExperimentResult(
        rows=rows,
        columns=columns,
        reports={(angles, tag, metric): [report] for (tag, metric), report in reports.items()},
        config_hash=ctx.config_hash,
        seed=config.run.seed,
    )
    path = result.write(ctx.out)
    _print_table(result)
    print(f"Results written to {path}")
    return EXIT_OK


def cmd_experiment(ctx: Context) -> int:
    result = run_experiment(ctx.config, max_workers=ctx.threads)
    path = result.write(ctx.out)
    _print_table(result)
    print(f"Results written to {path}")
    return EXIT_OK


def cmd_phase(ctx: Context) -> int:
    if ctx.config.phase is None:
        raise ConfigError([ConfigIssue(path="phase", message="the phase command needs a phase section")])
    result = run_phase_transition(ctx.config, max_workers=ctx.threads)
    path = result.write(ctx.out)
    if not ctx.args.quiet:
        print(result.frame().to_string(index=False))
    print(f"Phase grid written to {path}")
    return EXIT_OK


def cmd_selftest(ctx: Context) -> int:
    report = selftest(ctx.args.suite or None, seed=ctx.config.run.seed)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILURE


def _print_table(result: ExperimentResult) -> None:
    frame = result.frame()
    print(frame.to_string(index=False) if not frame.empty else "(no results)")


COMMANDS: Dict[str, Callable[[Context], int]] = {
    "gen": cmd_gen,
    "features": cmd_features,
    "classify": cmd_classify,
    "experiment": cmd_experiment,
    "phase": cmd_phase,
    "selftest": cmd_selftest,
}


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config (YAML); defaults apply when omitted")
    common.add_argument("--seed", type=int, help="Master seed, overrides run.seed")
    common.add_argument("--out", help="Output directory, overrides run.output_dir")
    common.add_argument("--threads", type=int, help="Worker threads (default NRCDT_THREADS)")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(
        prog="nrcdtflow",
        description="Affine-invariant R-CDT features and their classification experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="Generate the dataset as PGM images plus manifest")
    gen.add_argument("--idx", action="store_true", help="Also write IDX image and label files")

    features = commands.add_parser("features", parents=[common], help="Extract feature dumps")
    features.add_argument("--data", help="Dataset directory written by `gen` (default <out>/dataset)")
    features.add_argument("--fields", action="store_true", help="Also dump every R-CDT field under <out>/fields")

    classify = commands.add_parser("classify", parents=[common], help="Classify extracted features")
    classify.add_argument("--features", help="Directory written by `features` (default <out>)")

    commands.add_parser("experiment", parents=[common], help="Run the full experiment")
    commands.add_parser("phase", parents=[common], help="Run the phase-transition grid")

    check = commands.add_parser("selftest", parents=[common], help="Run the invariant suites")
    check.add_argument("--suite", action="append", choices=sorted(SUITES), help="Run only this suite (repeatable)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level="WARNING" if args.quiet else "INFO")

    try:
        ctx = Context(args)
        log_with_context(
            logger,
            "info",
            f"Running {args.command}",
            command=args.command,
            seed=ctx.config.run.seed,
            config_hash=ctx.config_hash,
            threads=ctx.threads,
        )
        return COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for issue in exc.issues:
            print(f"  {issue}", file=sys.stderr)
        return EXIT_FAILURE
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        logger.error(f"I/O error: {exc}")
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NrcdtFlowError, ValueError, KeyError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
