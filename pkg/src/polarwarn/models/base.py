"""Uniform fit/predict contract over the six benchmark classifiers.

Every model standardizes its inputs with statistics learned on the training
split, trains deterministically given (data, seed), and scores rows with a
ranking value: raw output for LIN, sigmoid probability for LOG, signed
margin for SVM, positive-neighbor fraction for KNN, leaf positive fraction
for DT and the output unit for NN.  Labels threshold the score at 0.5
(0 for the SVM margin).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

ALGORITHMS = ("lin", "log", "svm", "knn", "nn", "dt")

_HYPERPARAMETER_DEFAULTS: dict[str, dict] = {
    "lin": {},
    "log": {"regularization": 1.0, "max_iter": 2000, "tol": 1e-6},
    "svm": {"regularization": 1.0, "max_iter": 1000},
    "knn": {"k": 5},
    "nn": {"hidden_size": 16, "max_iter": 500, "regularization": 1e-4, "tol": 1e-6},
    "dt": {"max_depth": 10, "min_leaf": 2},
}


class DegenerateFitError(Exception):
    """Training data cannot support a parametric fit (single class)."""


class ShapeError(Exception):
    """Prediction rows do not match the training feature width."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels and stable column names."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    positive_class_name: str = "positive"
    row_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if X.shape[0] != len(y):
            raise ValueError("labels length must match feature rows")
        if X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names must match feature columns")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain non-finite values")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0/1")
        if self.row_ids is not None and len(self.row_ids) != X.shape[0]:
            raise ValueError("row_ids length must match feature rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def take_rows(self, idx: Sequence[int]) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return replace(
            self,
            features=self.features[idx],
            labels=self.labels[idx],
            row_ids=None if self.row_ids is None else tuple(self.row_ids[i] for i in idx),
        )

    def take_columns(self, names: Sequence[str]) -> "Dataset":
        pos = {n: i for i, n in enumerate(self.feature_names)}
        idx = [pos[n] for n in names]
        return replace(self, features=self.features[:, idx], feature_names=tuple(names))


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    hyperparameters: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        merged = dict(_HYPERPARAMETER_DEFAULTS[self.algorithm])
        merged.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", merged)
        if self.algorithm == "knn":
            k = merged["k"]
            if not isinstance(k, int) or k < 1 or k % 2 == 0:
                raise ValueError(f"knn k must be an odd integer >= 1, got {k}")
        for cap_key in ("max_iter",):
            if cap_key in merged and merged[cap_key] is not None and merged[cap_key] < 1:
                raise ValueError(f"{cap_key} must be >= 1")


def default_specs(seed: int = 0) -> list[ModelSpec]:
    """One spec per benchmark algorithm with default hyperparameters."""
    return [ModelSpec(algorithm=a, seed=seed) for a in ALGORITHMS]


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.mean):
            raise ShapeError(f"expected {len(self.mean)} columns, got {X.shape[1]}")
        return (X - self.mean) / self.scale


def fit_standardizer(X: np.ndarray) -> Standardizer:
    """Per-column z-scoring statistics; zero-variance columns map to 0."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)  # population form
    scale = np.where(scale == 0.0, 1.0, scale)
    return Standardizer(mean=mean, scale=scale)


def standardize(dataset: Dataset) -> tuple[Standardizer, Dataset]:
    if dataset.n == 0:
        raise ValueError("cannot standardize an empty dataset")
    std = fit_standardizer(dataset.features)
    return std, replace(dataset, features=std.apply(dataset.features))


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    standardizer: Standardizer
    params: dict


def fit(train: Dataset, spec: ModelSpec) -> TrainedModel:
    """Train one model; deterministic given (data, spec.seed)."""
    from . import linear, mlp, neighbors, tree

    if train.n == 0:
        raise ValueError("empty training set")
    classes = np.unique(train.labels)
    if len(classes) < 2 and spec.algorithm != "knn":
        raise DegenerateFitError(
            f"{spec.algorithm} requires both classes in training data (got {classes.tolist()})"
        )
    std = fit_standardizer(train.features)
    X = std.apply(train.features)
    y = train.labels.astype(float)
    hp = dict(spec.hyperparameters)
    if spec.algorithm == "lin":
        params = linear.fit_lin(X, y)
    elif spec.algorithm == "log":
        params = linear.fit_log(X, y, hp)
    elif spec.algorithm == "svm":
        params = linear.fit_svm(X, y, hp)
    elif spec.algorithm == "knn":
        params = neighbors.fit_knn(X, y, hp)
    elif spec.algorithm == "nn":
        params = mlp.fit_nn(X, y, hp, spec.seed)
    elif spec.algorithm == "dt":
        params = tree.fit_dt(X, y, hp)
    else:  # pragma: no cover - guarded by ModelSpec
        raise ValueError(spec.algorithm)
    return TrainedModel(spec=spec, standardizer=std, params=params)


def predict(model: TrainedModel, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scores and 0/1 labels for a row matrix matching the training width."""
    from . import linear, mlp, neighbors, tree

    X = model.standardizer.apply(rows)
    algo = model.spec.algorithm
    if algo == "lin":
        scores = linear.score_linear(model.params, X)
    elif algo == "log":
        scores = linear.score_log(model.params, X)
    elif algo == "svm":
        scores = linear.score_linear(model.params, X)
    elif algo == "knn":
        scores = neighbors.score_knn(model.params, X)
    elif algo == "nn":
        scores = mlp.score_nn(model.params, X)
    elif algo == "dt":
        scores = tree.score_dt(model.params, X)
    else:  # pragma: no cover
        raise ValueError(algo)
    cut = 0.0 if algo == "svm" else 0.5
    labels = (scores >= cut).astype(np.int8)
    return scores, labels


def dataset_to_csv(dataset: Dataset, path) -> None:
    """Row-id, feature columns, label; one row per instance."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", *dataset.feature_names, "label"])
        ids = dataset.row_ids or [str(i) for i in range(dataset.n)]
        for rid, row, label in zip(ids, dataset.features, dataset.labels):
            writer.writerow([rid, *row.tolist(), int(label)])


MODEL_FORMAT_VERSION = 1


def _encode(value):
    if isinstance(value, np.ndarray):
        return {"__array__": value.tolist(), "shape": list(value.shape)}
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _decode(value):
    if isinstance(value, dict):
        if "__array__" in value:
            return np.asarray(value["__array__"], dtype=float).reshape(value["shape"])
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "algorithm": model.spec.algorithm,
        "hyperparameters": _encode(dict(model.spec.hyperparameters)),
        "seed": model.spec.seed,
        "standardizer": {
            "mean": _encode(model.standardizer.mean),
            "scale": _encode(model.standardizer.scale),
        },
        "params": _encode(copy.deepcopy(model.params)),
    }


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: {doc.get('format_version')}")
    spec = ModelSpec(
        algorithm=doc["algorithm"],
        hyperparameters=_decode(doc["hyperparameters"]),
        seed=doc["seed"],
    )
    std = Standardizer(
        mean=_decode(doc["standardizer"]["mean"]),
        scale=_decode(doc["standardizer"]["scale"]),
    )
    return TrainedModel(spec=spec, standardizer=std, params=_decode(doc["params"]))


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
