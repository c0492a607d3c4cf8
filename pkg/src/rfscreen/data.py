"""In-memory data model, CSV ingestion, and stratified splitting.

A :class:`Dataset` holds a dense numeric feature matrix, integer class
labels remapped to ``1..k``, and unique feature names.  Instances are
immutable after construction (the underlying arrays are marked read-only)
and safe to share across threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import stream


class CsvFormatError(ValueError):
    """Raised when an input CSV cannot be ingested; names the offending cell."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus class labels.

    ``features`` has shape ``(n_samples, n_features)`` and is stored
    column-major so screening and split-finding can scan one feature at a
    time over contiguous memory.  ``labels`` contains class ids in
    ``1..n_classes``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.asfortranarray(np.asarray(self.features, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValueError("labels must be a vector with one entry per sample")
        if feats.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length must match the feature count")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite (no NaN/inf)")
        if labels.size and labels.min() < 1:
            raise ValueError("labels must be positive class ids")
        feats.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def select_features(self, indices) -> "Dataset":
        """Column-subset view as a new Dataset (labels shared)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[:, idx],
            labels=self.labels,
            feature_names=tuple(self.feature_names[i] for i in idx),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True)
class FeatureSubset:
    """Ordered selection of feature positions, most important first.

    Indices are 0-based internally; :meth:`one_based` is the reporting form.
    """

    indices: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError("feature indices must be nonnegative")
        if len(set(idx)) != len(idx):
            raise ValueError("feature indices must be distinct")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)


def load_csv(path, label_column: str = "label") -> Dataset:
    """Read a UTF-8 comma-separated file into a Dataset.

    The first row is the header.  Every column except ``label_column`` must
    parse as a finite float; violations are reported with their 1-based data
    row and column name.  Labels are remapped to ``1..k`` in order of first
    occurrence.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if label_column not in header:
            raise CsvFormatError(f"{path}: label column {label_column!r} not found in header")
        label_pos = header.index(label_column)
        feature_names = tuple(name for i, name in enumerate(header) if i != label_pos)
        if len(set(feature_names)) != len(feature_names):
            raise CsvFormatError(f"{path}: duplicate feature names in header")
        if not feature_names:
            raise CsvFormatError(f"{path}: no feature columns besides {label_column!r}")

        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for row_num, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for pos, cell in enumerate(row):
                if pos == label_pos:
                    raw_labels.append(cell)
                    continue
                name = header[pos]
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: non-numeric value {cell!r} at row {row_num}, column {name}"
                    ) from None
                if math.isnan(value) or math.isinf(value):
                    raise CsvFormatError(
                        f"{path}: non-finite value {cell!r} at row {row_num}, column {name}"
                    )
                values.append(value)
            rows.append(values)
        if not rows:
            raise CsvFormatError(f"{path}: no data rows")

    remap: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, raw in enumerate(raw_labels):
        if raw not in remap:
            remap[raw] = len(remap) + 1
        labels[i] = remap[raw]
    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=labels,
        feature_names=feature_names,
    )


def write_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write the standard CSV form: header row, label column first.

    Floats are written with ``repr`` so a round-trip through
    :func:`load_csv` reproduces the matrix exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([label_column, *dataset.feature_names])
        for i in range(dataset.n_samples):
            writer.writerow(
                [int(dataset.labels[i]), *(repr(float(v)) for v in dataset.features[i])]
            )


def stratified_kfold(dataset: Dataset, folds: int, seed: int):
    """Deterministic stratified split into ``folds`` (train, test) index pairs.

    Per-class test counts across folds differ by at most one.  Every class
    must have at least ``folds`` samples.
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    rng = stream(seed, 0x5F01D)
    assignment = np.empty(dataset.n_samples, dtype=np.int64)
    for cls in range(1, dataset.n_classes + 1):
        members = np.flatnonzero(dataset.labels == cls)
        if members.size == 0:
            continue
        if members.size < folds:
            raise ValueError(
                f"class {cls} has {members.size} samples, fewer than folds={folds}"
            )
        members = members[rng.permutation(members.size)]
        for fold_id, chunk in enumerate(np.array_split(members, folds)):
            assignment[chunk] = fold_id
    out = []
    everything = np.arange(dataset.n_samples)
    for fold_id in range(folds):
        test = everything[assignment == fold_id]
        train = everything[assignment != fold_id]
        out.append((train, test))
    return out
