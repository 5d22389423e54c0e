"""
Batch experiment runner.

run_experiment: for every angle count, repetition, representation and metric,
generate the dataset, extract features, classify and evaluate; accuracies are
aggregated over repetitions (mean and population std).

run_knn_protocol: run_experiment with the k-NN classifier on repeated seeded
train/test splits.

run_phase_transition: one accuracy per cell of a corruption grid, written as
CSV plus one PGM heatmap per representation and metric.

Repetition r uses master seed repetition_seed(seed, r); repetition 0 uses the
configured seed itself. Output is identical for every worker count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..classify.classifiers import Metric, linear_probe, predict_knn, predict_nearest_template
from ..classify.evaluation import EvalReport, aggregate, evaluate
from ..classify.features import FeatureConfig, FeatureContext, FeatureSet, extract_feature_sets
from ..datagen.dataset import Dataset, build_dataset, build_linmnist, template_dataset
from ..datagen.idx import load_mnist
from ..datagen.params import CorruptionRanges
from ..datagen.rng import repetition_seed, split_generator
from ..logging_config import log_with_context
from ..parallel import parallel_map
from ..settings import MNIST_DIR
from ..transforms.measures import DiscreteMeasure2D
from ..transforms.nrcdt import FeatureTag
from .config import ExperimentConfig
from ..io import (
    FEATURE_MAGIC,
    read_csv,
    read_dump,
    write_csv,
    write_feature_dump,
    write_field_dump,
    write_pgm,
)

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["representation", "metric", "accuracy_mean", "accuracy_std", "seed", "runtime_s", "config_hash"]
SETTING_COLUMNS = ["setting", "angles", "classifier"]
PHASE_COLUMNS = ["phase", "strength", "count", "angles", "classifier"]
PROBE_COLUMNS = ["separable", "margin"]

ReportKey = Tuple[FeatureTag, Metric]


def _classifier_label(config: ExperimentConfig) -> str:
    c = config.classifier
    if c.kind == "knn":
        return f"knn{c.k}"
    if c.kind == "probe":
        return f"probe{c.probe_classes[0]}v{c.probe_classes[1]}"
    return "nt"


def _setting_label(config: ExperimentConfig) -> str:
    if config.dataset.kind == "linmnist":
        return "linmnist"
    return config.dataset.preset or "custom"


def setting_row(config: ExperimentConfig, angles: int) -> Dict[str, Any]:
    return {"setting": _setting_label(config), "angles": angles, "classifier": _classifier_label(config)}


@dataclass
class RepetitionOutcome:
    reports: Dict[ReportKey, EvalReport]
    probes: Dict[ReportKey, Tuple[bool, float]]
    runtime_s: float


@dataclass
class ExperimentResult:
    """Aggregated rows plus the per-repetition reports behind them"""

    rows: List[Dict[str, Any]]
    columns: List[str]
    reports: Dict[Tuple[int, FeatureTag, Metric], List[EvalReport]]
    config_hash: str
    seed: int
    features: Dict[Tuple[int, int, FeatureTag], FeatureSet] = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows).reindex(columns=self.columns)

    def accuracy(self, tag, metric=Metric.L2, angles: Optional[int] = None) -> float:
        for row in self.rows:
            if row["representation"] == FeatureTag(tag).value and row["metric"] == Metric(metric).value:
                if angles is None or row["angles"] == angles:
                    return float(row["accuracy_mean"])
        raise KeyError(f"no result for {tag} / {metric} / angles={angles}")

    def write(self, directory: Union[str, Path], stem: str = "results") -> Path:
        directory = Path(directory)
        path = write_csv(self.rows, directory / f"{stem}.csv", columns=self.columns)
        comment = f"seed={self.seed} config={self.config_hash}"
        for (angles, tag, metric), reports in self.reports.items():
            confusion = sum(r.confusion for r in reports)
            totals = confusion.sum(axis=1, keepdims=True).astype(float)
            totals[totals == 0] = 1.0
            name = f"confusion_{tag.value}_{metric.value}_M{angles}.pgm"
            write_pgm(confusion / totals, directory / name, comment=comment)
        for (angles, repetition, tag), features in self.features.items():
            write_feature_dump(features.vectors, directory / f"features_{tag.value}_M{angles}_r{repetition}.nrcf")
        return path


# ============================================================================
# Dataset and classification steps
# ============================================================================

def build_experiment_dataset(
    config: ExperimentConfig,
    seed: int,
    corruption: Optional[CorruptionRanges] = None,
    max_workers: int = 1,
) -> Dataset:
    if config.dataset.kind == "linmnist":
        images, labels = load_mnist(config.dataset.mnist_dir or MNIST_DIR, config.dataset.mnist_split)
        return build_linmnist(images, labels, config.dataset.samples_per_class, seed=seed, max_workers=max_workers)
    return build_dataset(config.dataset_spec(seed=seed, corruption=corruption), max_workers=max_workers)


def knn_split(labels: np.ndarray, train_per_class: int, seed: int, repetition: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded per-class split: `train_per_class` references per class, the rest are queries"""
    rng = split_generator(seed, repetition)
    train: List[int] = []
    test: List[int] = []
    for label in sorted(int(c) for c in np.unique(labels)):
        members = np.flatnonzero(labels == label)
        order = members[rng.permutation(members.size)]
        train.extend(order[:train_per_class].tolist())
        test.extend(order[train_per_class:].tolist())
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64)


def classify_feature_sets(
    config: ExperimentConfig,
    sets: Dict[FeatureTag, FeatureSet],
    templates: Optional[Dict[FeatureTag, FeatureSet]],
    seed: int,
    repetition: int,
    max_workers: int,
) -> Tuple[Dict[ReportKey, EvalReport], Dict[ReportKey, Tuple[bool, float]]]:
    cls = config.classifier
    reports: Dict[ReportKey, EvalReport] = {}
    probes: Dict[ReportKey, Tuple[bool, float]] = {}
    for tag in config.run.representations:
        features = sets[tag]
        for metric in config.run.metrics:
            key = (tag, metric)
            if cls.kind == "nt":
                reference = templates[tag].with_metric(metric)
                predictions = predict_nearest_template(features, reference, max_workers)
                reports[key] = evaluate(predictions, features.labels, classes=reference.classes, seed=seed)
            elif cls.kind == "knn":
                train, test = knn_split(features.labels, cls.train_per_class, config.run.seed, repetition)
                reference = features.subset(train).with_metric(metric)
                queries = features.subset(test)
                predictions = predict_knn(queries, reference, cls.k, max_workers)
                reports[key] = evaluate(predictions, queries.labels, classes=features.classes, seed=seed)
            else:
                first, second = cls.probe_classes
                a, b = features.of_class(first), features.of_class(second)
                probe = linear_probe(a, b, cls.max_epochs)
                x = np.vstack((a.vectors, b.vectors))
                predictions = np.where(x @ probe.weights + probe.bias > 0.0, first, second)
                truth = np.concatenate((a.labels, b.labels))
                reports[key] = evaluate(predictions, truth, classes=[first, second], seed=seed)
                probes[key] = (probe.separable, probe.margin)
    return reports, probes


def _repetition(
    config: ExperimentConfig,
    feature_config: FeatureConfig,
    repetition: int,
    templates: Optional[Dict[FeatureTag, FeatureSet]],
    corruption: Optional[CorruptionRanges],
    max_workers: int,
    config_hash: str,
) -> Tuple[RepetitionOutcome, Dict[FeatureTag, FeatureSet]]:
    seed = repetition_seed(config.run.seed, repetition)
    started = time.perf_counter()
    dataset = build_experiment_dataset(config, seed, corruption, max_workers)
    sets = extract_feature_sets(
        dataset.measures(),
        dataset.labels,
        config.run.representations,
        feature_config,
        max_workers=max_workers,
        config_hash=config_hash,
    )
    reports, probes = classify_feature_sets(config, sets, templates, seed, repetition, max_workers)
    return RepetitionOutcome(reports, probes, time.perf_counter() - started), sets


def template_feature_sets(
    config: ExperimentConfig,
    feature_config: FeatureConfig,
    max_workers: int,
    config_hash: str,
) -> Optional[Dict[FeatureTag, FeatureSet]]:
    if config.classifier.kind != "nt":
        return None
    templates = template_dataset(config.dataset_spec())
    return extract_feature_sets(
        templates.measures(),
        templates.labels,
        config.run.representations,
        feature_config,
        max_workers=max_workers,
        config_hash=config_hash,
    )


def write_feature_files(
    sets: Dict[FeatureTag, FeatureSet], directory: Union[str, Path], stem: str = "features"
) -> Path:
    """One NRCF dump per representation plus `<stem>_labels.csv`"""
    directory = Path(directory)
    labels = next(iter(sets.values())).labels
    write_csv(
        [{"position": i, "class": int(label)} for i, label in enumerate(labels)],
        directory / f"{stem}_labels.csv",
        columns=["position", "class"],
    )
    for tag, features in sets.items():
        write_feature_dump(features.vectors, directory / f"{stem}_{tag.value}.nrcf")
    return directory


def read_feature_files(
    directory: Union[str, Path],
    tags: Sequence[FeatureTag],
    stem: str = "features",
    config_hash: str = "",
) -> Dict[FeatureTag, FeatureSet]:
    directory = Path(directory)
    labels = read_csv(directory / f"{stem}_labels.csv").sort_values("position")["class"].to_numpy()
    sets = {}
    for tag in tags:
        tag = FeatureTag(tag)
        magic, vectors = read_dump(directory / f"{stem}_{tag.value}.nrcf")
        if magic != FEATURE_MAGIC:
            raise ValueError(f"{stem}_{tag.value}.nrcf is not a feature dump")
        sets[tag] = FeatureSet(vectors, labels, tag, config_hash=config_hash)
    return sets


def write_field_files(
    measures: Sequence[DiscreteMeasure2D],
    feature_config: FeatureConfig,
    directory: Union[str, Path],
    max_workers: int = 1,
) -> List[Path]:
    """One RCDT dump (the L x M quantile field) per measure, named field_<position>.rcdt"""
    directory = Path(directory)
    fields = parallel_map(lambda m: FeatureContext(m, feature_config).field.values, list(measures), max_workers)
    return [write_field_dump(values, directory / f"field_{i:05d}.rcdt") for i, values in enumerate(fields)]


def result_rows(
    config: ExperimentConfig,
    setting: Dict[str, Any],
    repetitions: Sequence[RepetitionOutcome],
    config_hash: str,
) -> List[Dict[str, Any]]:
    rows = []
    runtime = sum(r.runtime_s for r in repetitions) if config.run.record_runtime else 0.0
    for tag in config.run.representations:
        for metric in config.run.metrics:
            mean, std = aggregate([r.reports[(tag, metric)] for r in repetitions])
            row = dict(setting)
            row.update(
                representation=tag.value,
                metric=metric.value,
                accuracy_mean=mean,
                accuracy_std=std,
                seed=config.run.seed,
                runtime_s=runtime,
                config_hash=config_hash,
            )
            if config.classifier.kind == "probe":
                outcomes = [r.probes[(tag, metric)] for r in repetitions]
                row["separable"] = all(separable for separable, _ in outcomes)
                row["margin"] = min(margin for _, margin in outcomes)
            rows.append(row)
    return rows


# ============================================================================
# Entry points
# ============================================================================

def run_experiment(config: ExperimentConfig, max_workers: int = 1) -> ExperimentResult:
    config_hash = config.config_hash()
    columns = SETTING_COLUMNS + RESULT_COLUMNS + (PROBE_COLUMNS if config.classifier.kind == "probe" else [])
    rows: List[Dict[str, Any]] = []
    reports: Dict[Tuple[int, FeatureTag, Metric], List[EvalReport]] = {}
    dumps: Dict[Tuple[int, int, FeatureTag], FeatureSet] = {}

    for angles in config.discretization.angle_counts:
        feature_config = config.discretization.feature_config(angles)
        templates = template_feature_sets(config, feature_config, max_workers, config_hash)
        repetitions = []
        for repetition in range(config.run.repetitions):
            outcome, sets = _repetition(config, feature_config, repetition, templates, None, max_workers, config_hash)
            repetitions.append(outcome)
            if config.run.dump_features:
                dumps.update({(angles, repetition, tag): s for tag, s in sets.items()})
            for (tag, metric), report in outcome.reports.items():
                reports.setdefault((angles, tag, metric), []).append(report)
                log_with_context(
                    logger,
                    "info",
                    f"{tag.value}/{metric.value} M={angles} repetition {repetition}: accuracy {report.accuracy:.4f}",
                    representation=tag.value,
                    metric=metric.value,
                    angles=angles,
                    repetition=repetition,
                    accuracy=report.accuracy,
                    seed=report.seed,
                    config_hash=config_hash,
                )
        rows.extend(result_rows(config, setting_row(config, angles), repetitions, config_hash))

    return ExperimentResult(rows, columns, reports, config_hash, config.run.seed, dumps)


def run_knn_protocol(
    config: ExperimentConfig,
    k: Optional[int] = None,
    train_per_class: Optional[int] = None,
    max_workers: int = 1,
) -> ExperimentResult:
    """k-NN accuracy, mean and std over `run.repetitions` seeded splits"""
    data = config.to_dict()
    data["classifier"]["kind"] = "knn"
    if k is not None:
        data["classifier"]["k"] = k
    if train_per_class is not None:
        data["classifier"]["train_per_class"] = train_per_class
    return run_experiment(ExperimentConfig.model_validate(data), max_workers=max_workers)


@dataclass
class PhaseResult:
    kind: str
    strengths: List[float]
    counts: List[int]
    accuracy: Dict[ReportKey, np.ndarray]
    rows: List[Dict[str, Any]]
    config_hash: str
    seed: int

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows).reindex(columns=PHASE_COLUMNS + RESULT_COLUMNS)

    def write(self, directory: Union[str, Path], stem: str = "phase") -> Path:
        directory = Path(directory)
        path = write_csv(self.rows, directory / f"{stem}.csv", columns=PHASE_COLUMNS + RESULT_COLUMNS)
        comment = f"seed={self.seed} config={self.config_hash}"
        for (tag, metric), matrix in self.accuracy.items():
            write_pgm(matrix, directory / f"{stem}_{self.kind}_{tag.value}_{metric.value}.pgm", comment=comment)
        return path


def cell_corruption(config: ExperimentConfig, strength: float, count: int) -> CorruptionRanges:
    phase = config.phase
    if phase.kind == "salt":
        return CorruptionRanges(salt_count=(count, count), salt_radius=strength)
    return CorruptionRanges(
        frequency=phase.frequency,
        amplitude=(strength, strength),
        salt_count=(count, count),
        salt_radius=phase.salt_radius,
    )


def run_phase_transition(config: ExperimentConfig, max_workers: int = 1) -> PhaseResult:
    """
    Accuracy over the (strength x count) grid of config.phase.

    Every cell reuses the same seeds, so affine draws are shared and a cell
    without corruption reproduces the clean run exactly.
    """
    if config.phase is None:
        raise ValueError("config has no phase section")
    phase = config.phase
    config_hash = config.config_hash()
    angles = config.discretization.angles
    feature_config = config.discretization.feature_config()
    templates = template_feature_sets(config, feature_config, max_workers, config_hash)

    shape = (len(phase.strengths), len(phase.counts))
    accuracy = {(t, m): np.zeros(shape) for t in config.run.representations for m in config.run.metrics}
    rows: List[Dict[str, Any]] = []
    for i, strength in enumerate(phase.strengths):
        for j, count in enumerate(phase.counts):
            corruption = cell_corruption(config, strength, count)
            repetitions = [
                _repetition(config, feature_config, r, templates, corruption, max_workers, config_hash)[0]
                for r in range(config.run.repetitions)
            ]
            setting = {
                "phase": phase.kind,
                "strength": strength,
                "count": count,
                "angles": angles,
                "classifier": _classifier_label(config),
            }
            cell_rows = result_rows(config, setting, repetitions, config_hash)
            for row in cell_rows:
                accuracy[(FeatureTag(row["representation"]), Metric(row["metric"]))][i, j] = row["accuracy_mean"]
            rows.extend(cell_rows)
            log_with_context(
                logger,
                "info",
                f"Phase cell strength={strength:g} count={count} done",
                phase=phase.kind,
                strength=strength,
                count=count,
                config_hash=config_hash,
            )
    return PhaseResult(
        phase.kind, list(phase.strengths), list(phase.counts), accuracy, rows, config_hash, config.run.seed
    )
