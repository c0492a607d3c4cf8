"""Measurement harness: classifiers, cross-validation, grid search, sweeps.

``cross_validate`` is leak-safe by construction: the screener is fitted on
the training rows of each fold only, then both portions are reduced before
the classifier sees them.  The screen-once protocol (screen the full table
up front, then cross-validate classifiers on the reduced view) is available
through :func:`reduce_full` plus an identity screener, which is also how
the command-line ``evaluate`` behaves unless asked to re-screen per fold.

CPU cost is split into screening seconds (the reduction fit) and fitting
seconds (classifier training), both measured as process CPU time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import PcaModel, kbest_fscore, pca_fit, pca_transform, random_subset
from .data import Dataset, FeatureSubset, stratified_kfold
from .forest import ForestParams, forest_predict_batch, train_forest
from .rfms import ScreeningConfig, screen

SCREENER_NAMES = ("identity", "rfms", "kbest", "pca", "random")
CLASSIFIER_NAMES = ("knn", "rf", "majority")


@dataclass(frozen=True)
class ScreenerSpec:
    """Named screener family plus its parameters.

    The output width lives under ``n_out`` for subset screeners and PCA
    (for rfms it doubles as the carry width).  rfms additionally wants
    ``step_size`` and forest knobs (``n_trees``, ``n_subfeatures``, ...).
    """

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in SCREENER_NAMES:
            raise ValueError(f"unknown screener {self.name!r}")

    def with_n_out(self, n_out: int) -> "ScreenerSpec":
        return ScreenerSpec(self.name, {**self.params, "n_out": n_out})

    def label(self) -> str:
        if self.name == "identity":
            return "identity"
        return f"{self.name}({self.params.get('n_out', '?')})"


@dataclass(frozen=True)
class ClassifierSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CLASSIFIER_NAMES:
            raise ValueError(f"unknown classifier {self.name!r}")

    def label(self) -> str:
        if self.name == "knn":
            return f"knn(k={self.params.get('k', 5)})"
        if self.name == "rf":
            return f"rf(n_trees={self.params.get('n_trees', 50)})"
        return "majority"


@dataclass(frozen=True)
class FittedScreener:
    """Reduction learned on training rows; applies to any row matrix."""

    spec: ScreenerSpec
    selected: FeatureSubset | None = None
    pca: PcaModel | None = None

    @property
    def transforming(self) -> bool:
        return self.pca is not None

    @property
    def n_out(self) -> int:
        if self.pca is not None:
            return self.pca.n_components
        return len(self.selected)

    def reduce(self, features: np.ndarray) -> np.ndarray:
        if self.pca is not None:
            return pca_transform(self.pca, features)
        return np.asarray(features)[:, list(self.selected.indices)]


def fit_screener(spec: ScreenerSpec, train: Dataset, n_threads: int = 1) -> FittedScreener:
    """Fit the screener named by ``spec`` on training data only."""
    p = spec.params
    if spec.name == "identity":
        return FittedScreener(spec, selected=FeatureSubset(tuple(range(train.n_features))))
    n_out = int(p["n_out"])
    if spec.name == "kbest":
        return FittedScreener(spec, selected=kbest_fscore(train, n_out))
    if spec.name == "random":
        return FittedScreener(spec, selected=random_subset(train.n_features, n_out, int(p.get("seed", 0))))
    if spec.name == "pca":
        return FittedScreener(spec, pca=pca_fit(train, n_out))
    config = ScreeningConfig(
        step_size=int(p["step_size"]),
        reduced_size=n_out,
        forest=ForestParams(
            n_trees=int(p.get("n_trees", 100)),
            n_subfeatures=int(p.get("n_subfeatures", max(1, round(train.n_features ** 0.5)))),
            min_samples_leaf=int(p.get("min_samples_leaf", 1)),
            min_purity_increase=float(p.get("min_purity_increase", 0.0)),
            partial_sampling=float(p.get("partial_sampling", 0.7)),
            seed=int(p.get("seed", 20230125)),
        ),
        n_canaries=int(p.get("n_canaries", 0)),
        seed=int(p.get("seed", 20230125)),
    )
    result = screen(train, config, n_threads=n_threads)
    if result.leak_count:
        raise RuntimeError(
            f"screen selected {result.leak_count} canary feature(s); "
            "cannot reduce to original columns"
        )
    return FittedScreener(spec, selected=result.selected)


def knn_predict(train: Dataset, query, k: int) -> int:
    """Majority label among the k nearest training rows (Euclidean).

    Distance ties resolve to the smaller training index, vote ties to the
    smaller class id.
    """
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (train.n_features,):
        raise ValueError(f"expected a vector of length {train.n_features}")
    if not 1 <= k <= train.n_samples:
        raise ValueError(f"k must be in 1..{train.n_samples}")
    return int(_knn_batch(train.features, train.labels, q[None, :], k, train.n_classes)[0])


def _knn_batch(train_X, train_y, queries, k, n_classes) -> np.ndarray:
    diffs = queries[:, None, :] - train_X[None, :, :]
    dist2 = np.sum(diffs * diffs, axis=2)
    order = np.argsort(dist2, axis=1, kind="stable")[:, :k]
    out = np.empty(queries.shape[0], dtype=np.int64)
    for i in range(queries.shape[0]):
        votes = np.bincount(train_y[order[i]], minlength=n_classes + 1)
        out[i] = np.argmax(votes)
    return out


class _FittedClassifier:
    def __init__(self, predict, label):
        self.predict = predict
        self.label = label


def fit_classifier(spec: ClassifierSpec, train_X: np.ndarray, train_y: np.ndarray,
                   n_classes: int, n_threads: int = 1) -> _FittedClassifier:
    p = spec.params
    if spec.name == "majority":
        klass = int(np.argmax(np.bincount(train_y, minlength=n_classes + 1)))
        return _FittedClassifier(lambda X: np.full(X.shape[0], klass, dtype=np.int64),
                                 spec.label())
    if spec.name == "knn":
        k = int(p.get("k", 5))
        if not 1 <= k <= train_X.shape[0]:
            raise ValueError(f"knn k must be in 1..{train_X.shape[0]}")
        X = np.array(train_X, dtype=np.float64)
        y = np.array(train_y, dtype=np.int64)
        return _FittedClassifier(lambda Q: _knn_batch(X, y, np.asarray(Q, dtype=np.float64),
                                                      k, n_classes), spec.label())
    params = ForestParams(
        n_trees=int(p.get("n_trees", 50)),
        n_subfeatures=min(int(p.get("n_subfeatures", max(1, round(train_X.shape[1] ** 0.5)))),
                          train_X.shape[1]),
        min_samples_leaf=int(p.get("min_samples_leaf", 1)),
        min_purity_increase=float(p.get("min_purity_increase", 0.0)),
        partial_sampling=float(p.get("partial_sampling", 0.7)),
        seed=int(p.get("seed", 20230125)),
    )
    train = Dataset(features=train_X, labels=train_y,
                    feature_names=tuple(f"c{i}" for i in range(train_X.shape[1])))
    model = train_forest(train, params, n_threads=n_threads)
    return _FittedClassifier(lambda X: forest_predict_batch(model, X), spec.label())


@dataclass(frozen=True)
class ReportEntry:
    """One measured cell: a (screener, classifier, output width) triple."""

    screener_id: str
    classifier_id: str
    n_features_out: int
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    screening_cpu_s: float
    fitting_cpu_s: float


@dataclass(frozen=True)
class EvaluationReport:
    entries: tuple[ReportEntry, ...]
    best_index: int

    @property
    def best(self) -> ReportEntry:
        return self.entries[self.best_index]


def cross_validate(dataset: Dataset, screener: ScreenerSpec, classifier: ClassifierSpec,
                   folds: int = 5, seed: int = 20230125, folds_idx=None,
                   n_threads: int = 1) -> ReportEntry:
    """Fold-internal screening and classification; returns the cell entry.

    The screener only ever sees training rows, so the reported accuracy is
    free of selection leakage.  The identity screener reports a screening
    time of exactly 0.
    """
    if folds_idx is None:
        if folds < 2:
            raise ValueError("folds must be at least 2")
        folds_idx = stratified_kfold(dataset, folds, seed)
    accuracies = []
    screening_cpu = 0.0
    fitting_cpu = 0.0
    n_out = dataset.n_features
    for train_rows, test_rows in folds_idx:
        train = Dataset(features=dataset.features[train_rows],
                        labels=dataset.labels[train_rows],
                        feature_names=dataset.feature_names)
        if screener.name == "identity":
            fitted = fit_screener(screener, train)
        else:
            t0 = time.process_time()
            fitted = fit_screener(screener, train, n_threads=n_threads)
            screening_cpu += time.process_time() - t0
        n_out = fitted.n_out
        reduced_train = fitted.reduce(train.features)
        reduced_test = fitted.reduce(dataset.features[test_rows])
        t0 = time.process_time()
        clf = fit_classifier(classifier, reduced_train, train.labels,
                             dataset.n_classes, n_threads=n_threads)
        fitting_cpu += time.process_time() - t0
        predictions = clf.predict(reduced_test)
        accuracies.append(float(np.mean(predictions == dataset.labels[test_rows])))
    return ReportEntry(
        screener_id=screener.label(),
        classifier_id=classifier.label(),
        n_features_out=n_out,
        fold_accuracies=tuple(accuracies),
        mean_accuracy=float(np.mean(accuracies)),
        screening_cpu_s=screening_cpu,
        fitting_cpu_s=fitting_cpu,
    )


def reduce_full(dataset: Dataset, screener: ScreenerSpec, n_threads: int = 1):
    """Screen-once protocol: fit on the whole table, return (view, entry_meta).

    The returned dataset is the reduced view of all rows; screening CPU
    seconds are measured here so downstream cells can report them.
    """
    t0 = time.process_time()
    fitted = fit_screener(screener, dataset, n_threads=n_threads)
    cpu = 0.0 if screener.name == "identity" else time.process_time() - t0
    reduced = Dataset(
        features=fitted.reduce(dataset.features),
        labels=dataset.labels,
        feature_names=tuple(
            f"pc{i + 1}" for i in range(fitted.n_out)
        ) if fitted.transforming else tuple(
            dataset.feature_names[i] for i in fitted.selected.indices
        ),
    )
    return reduced, fitted, cpu


def grid_search(dataset: Dataset, screener_grid, classifier_grid,
                folds: int = 5, seed: int = 20230125, n_threads: int = 1) -> EvaluationReport:
    """Exhaustive Cartesian sweep; best cell = highest mean accuracy.

    Ties keep the earliest cell in grid order (screeners outer, classifiers
    inner), so the result is deterministic.
    """
    screener_grid = list(screener_grid)
    classifier_grid = list(classifier_grid)
    if not screener_grid or not classifier_grid:
        raise ValueError("parameter grid must be non-empty")
    entries = []
    best_index = 0
    for s_spec in screener_grid:
        for c_spec in classifier_grid:
            entry = cross_validate(dataset, s_spec, c_spec, folds=folds, seed=seed,
                                   n_threads=n_threads)
            entries.append(entry)
            if entry.mean_accuracy > entries[best_index].mean_accuracy:
                best_index = len(entries) - 1
    return EvaluationReport(entries=tuple(entries), best_index=best_index)


@dataclass(frozen=True)
class SweepRow:
    n_features_out: int
    best_accuracy: float
    best_classifier_id: str
    screening_cpu_s: float
    fitting_cpu_s: float


def convergence_sweep(dataset: Dataset, screener: ScreenerSpec, classifier_grid,
                      counts, folds: int = 5, seed: int = 20230125,
                      leak_safe: bool = False, n_threads: int = 1) -> list[SweepRow]:
    """Best accuracy as a function of the number of screened features.

    One row per requested count.  By default each count screens the whole
    table once and cross-validates classifiers on the reduced view;
    ``leak_safe=True`` re-screens inside every fold instead.
    """
    classifier_grid = list(classifier_grid)
    if not classifier_grid:
        raise ValueError("classifier grid must be non-empty")
    counts = [int(c) for c in counts]
    if any(c < 1 or c > dataset.n_features for c in counts):
        raise ValueError(f"counts must be in 1..{dataset.n_features}")
    rows = []
    for count in counts:
        spec = screener.with_n_out(count)
        if leak_safe:
            cells = [cross_validate(dataset, spec, c_spec, folds=folds, seed=seed,
                                    n_threads=n_threads) for c_spec in classifier_grid]
        else:
            reduced, _, screening_cpu = reduce_full(dataset, spec, n_threads=n_threads)
            cells = []
            for c_spec in classifier_grid:
                cell = cross_validate(reduced, ScreenerSpec("identity"), c_spec,
                                      folds=folds, seed=seed, n_threads=n_threads)
                cells.append(ReportEntry(
                    screener_id=spec.label(),
                    classifier_id=cell.classifier_id,
                    n_features_out=count,
                    fold_accuracies=cell.fold_accuracies,
                    mean_accuracy=cell.mean_accuracy,
                    screening_cpu_s=screening_cpu,
                    fitting_cpu_s=cell.fitting_cpu_s,
                ))
        best = max(range(len(cells)), key=lambda i: cells[i].mean_accuracy)
        rows.append(SweepRow(
            n_features_out=count,
            best_accuracy=cells[best].mean_accuracy,
            best_classifier_id=cells[best].classifier_id,
            screening_cpu_s=cells[best].screening_cpu_s,
            fitting_cpu_s=cells[best].fitting_cpu_s,
        ))
    return rows
