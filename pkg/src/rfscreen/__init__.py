"""Multiround random-forest feature screening for wide multiclass tables.

The package screens ultra-wide feature spaces by walking them in chunks:
each round ranks the current chunk plus the previous round's survivors
with a random forest (importance = selection frequency) and carries the
best features forward.  It ships with baseline screeners, a synthetic
blended-feature generator with ground-truth provenance, and a measurement
harness for cross-validated accuracy and CPU-time reporting.
"""

from .baselines import PcaModel, f_scores, kbest_fscore, pca_fit, pca_transform, random_subset
from .data import CsvFormatError, Dataset, FeatureSubset, load_csv, stratified_kfold, write_csv
from .evaluate import (ClassifierSpec, EvaluationReport, ReportEntry, ScreenerSpec,
                       SweepRow, convergence_sweep, cross_validate, fit_screener,
                       grid_search, knn_predict, reduce_full)
from .forest import (ForestModel, ForestParams, TreeNode, best_split, bootstrap_indices,
                     dump_forest, forest_predict, forest_predict_batch, gini_impurity,
                     selection_frequency, train_forest)
from .rfms import (CanaryAudit, RoundRecord, ScreeningConfig, ScreeningResult,
                   augment_with_canaries, canary_audit, partition_features,
                   permute_features, screen)
from .synth import GeneratorConfig, Provenance, generate, truth_overlap

__version__ = "0.1.0"

__all__ = [
    "CanaryAudit", "ClassifierSpec", "CsvFormatError", "Dataset", "EvaluationReport",
    "FeatureSubset", "ForestModel", "ForestParams", "GeneratorConfig", "PcaModel",
    "Provenance", "ReportEntry", "RoundRecord", "ScreenerSpec", "ScreeningConfig",
    "ScreeningResult", "SweepRow", "TreeNode", "augment_with_canaries", "best_split",
    "bootstrap_indices", "canary_audit", "convergence_sweep", "cross_validate",
    "dump_forest", "f_scores", "fit_screener", "forest_predict", "forest_predict_batch",
    "generate", "gini_impurity", "grid_search", "kbest_fscore", "knn_predict",
    "load_csv", "partition_features", "pca_fit", "pca_transform", "permute_features",
    "random_subset", "reduce_full", "screen", "selection_frequency", "stratified_kfold",
    "train_forest", "truth_overlap", "write_csv",
]
