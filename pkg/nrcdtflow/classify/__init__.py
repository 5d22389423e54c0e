"""
Feature pipelines and classifiers.

Modules:
  - features.py: representation registry, FeatureConfig, FeatureSet, extraction
  - classifiers.py: nearest template, k-NN, linear probe
  - evaluation.py: EvalReport, accuracy and confusion matrices
"""

from .classifiers import Metric, knn, linear_probe, nearest_template, predict_knn, predict_nearest_template
from .evaluation import EvalReport, aggregate, evaluate
from .features import (
    FeatureConfig,
    FeatureSet,
    extract_feature_set,
    extract_feature_sets,
    extract_features,
    get_extractor,
    list_specs,
)

__all__ = [
    "EvalReport",
    "FeatureConfig",
    "FeatureSet",
    "Metric",
    "aggregate",
    "evaluate",
    "extract_feature_set",
    "extract_feature_sets",
    "extract_features",
    "get_extractor",
    "knn",
    "linear_probe",
    "list_specs",
    "nearest_template",
    "predict_knn",
    "predict_nearest_template",
]
