"""Tabular dataset container, CSV ingestion, and synthetic data generation."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "SyntheticSpec",
    "load_csv",
    "save_csv",
    "generate_synthetic",
    "synthetic_class_means",
]


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric feature matrix with integer class labels.

    Safe to share across threads once constructed; all arrays are set
    read-only in ``__post_init__``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        n, d = features.shape
        if labels.shape != (n,):
            raise ValueError(f"labels length {labels.shape} does not match {n} rows")
        if not np.all(np.isfinite(features)):
            bad = np.argwhere(~np.isfinite(features))[0]
            raise ValueError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if len(self.feature_names) != d:
            raise ValueError(f"expected {d} feature names, got {len(self.feature_names)}")
        k = len(self.class_names)
        if k < 2:
            raise ValueError("dataset must have at least 2 classes")
        if len(set(self.feature_names)) != d or len(set(self.class_names)) != k:
            raise ValueError("feature and class names must be unique")
        if n and (labels.min() < 0 or labels.max() >= k):
            raise ValueError(f"labels must lie in [0, {k})")
        features.setflags(write=False)
        labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows) -> "Dataset":
        """New Dataset restricted to the given row indices (classes kept)."""
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names, self.class_names)

    def to_json_obj(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "class_names": list(self.class_names),
            "rows": [
                {"features": [float(v) for v in row], "label": int(lab)}
                for row, lab in zip(self.features, self.labels)
            ],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "Dataset":
        rows = obj["rows"]
        features = np.array([r["features"] for r in rows], dtype=np.float64)
        labels = np.array([r["label"] for r in rows], dtype=np.int64)
        if features.size == 0:
            features = features.reshape(0, len(obj["feature_names"]))
        return Dataset(features, labels, tuple(obj["feature_names"]), tuple(obj["class_names"]))

    def save_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh)

    @staticmethod
    def load_json(path: str) -> "Dataset":
        with open(path, encoding="utf-8") as fh:
            return Dataset.from_json_obj(json.load(fh))


def load_csv(path: str, label_column: str) -> Dataset:
    """Read a comma-delimited, UTF-8, headered CSV into a Dataset.

    The label column may hold arbitrary strings; classes are the sorted
    distinct label values and rows map to indices in that order. Every
    other column must parse as a finite float.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r} in header")
        label_pos = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_pos)
        raw_rows: list[list[float]] = []
        raw_labels: list[str] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            values = []
            for i, cell in enumerate(row):
                if i == label_pos:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {row_no}, column {header[i]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(f"{path}: row {row_no}, column {header[i]!r}: non-finite value")
                values.append(v)
            raw_rows.append(values)
            raw_labels.append(row[label_pos])
    class_names = tuple(sorted(set(raw_labels)))
    if len(class_names) < 2:
        raise ValueError(f"{path}: fewer than 2 classes in column {label_column!r}")
    index = {name: i for i, name in enumerate(class_names)}
    features = np.array(raw_rows, dtype=np.float64)
    labels = np.array([index[lab] for lab in raw_labels], dtype=np.int64)
    return Dataset(features, labels, feature_names, class_names)


def save_csv(data: Dataset, path: str, label_column: str = "label") -> None:
    """Write a Dataset as CSV; floats at 17 significant digits round-trip."""
    if label_column in data.feature_names:
        raise ValueError(f"label column name {label_column!r} collides with a feature")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + [label_column])
        for row, lab in zip(data.features, data.labels):
            writer.writerow([f"{v:.17g}" for v in row] + [data.class_names[lab]])


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the Gaussian-blob generator (pure function of these)."""

    dim: int
    n_classes: int = 2
    n_samples: int = 1000
    seed: int = 0
    feature_prefix: str = "x"
    class_prefix: str = "c"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.n_samples < self.n_classes:
            raise ValueError("n_samples must be >= n_classes")


def _synthetic_rng(spec: SyntheticSpec) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(spec.seed))


def synthetic_class_means(spec: SyntheticSpec) -> np.ndarray:
    """The (n_classes, dim) means the generator draws for this spec."""
    return _synthetic_rng(spec).standard_normal((spec.n_classes, spec.dim))


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Sample a dataset of Gaussian blobs with identity covariance.

    Class means are i.i.d. standard normal; each row picks a class
    uniformly and adds unit-variance noise around its mean. Deterministic
    in ``spec.seed`` (``synthetic_class_means`` reproduces the means).
    """
    rng = _synthetic_rng(spec)
    means = rng.standard_normal((spec.n_classes, spec.dim))
    labels = rng.integers(0, spec.n_classes, size=spec.n_samples)
    features = means[labels] + rng.standard_normal((spec.n_samples, spec.dim))
    feature_names = tuple(f"{spec.feature_prefix}{i}" for i in range(spec.dim))
    class_names = tuple(f"{spec.class_prefix}{i}" for i in range(spec.n_classes))
    return Dataset(features, labels.astype(np.int64), feature_names, class_names)
