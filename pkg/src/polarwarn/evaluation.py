"""Benchmark protocol: metrics, splits, rebalancing, AUC, stepwise selection.

The repeated-holdout protocol is: rebalance the classes by seeded
undersampling, split 60/40 stratified, fit, evaluate; repeat with derived
seeds and aggregate.  Aggregated reports pool the confusion counts across
cycles (cycles have identical sizes, so pooled accuracy equals the mean) and
average the per-cycle AUC.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .models import Dataset, ModelSpec, fit, predict


class StratificationError(Exception):
    """A class has too few rows to appear on both sides of the split."""


class UndefinedAUCError(Exception):
    """AUC needs at least one row of each class."""


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    fp_rate: float
    f1: float
    support: int
    flagged: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[int, ClassMetrics]
    weighted: ClassMetrics
    accuracy: float
    mean_abs_err: float
    tp: int
    tn: int
    fp: int
    fn: int
    n: int
    auc: float | None = None
    class_names: dict[int, str] = field(default_factory=lambda: {0: "negative", 1: "positive"})

    def to_json_dict(self) -> dict:
        def cm(m: ClassMetrics) -> dict:
            return {
                "precision": m.precision,
                "recall": m.recall,
                "fp_rate": m.fp_rate,
                "f1": m.f1,
                "support": m.support,
                "flagged": list(m.flagged),
            }

        return {
            "per_class": {self.class_names[k]: cm(v) for k, v in sorted(self.per_class.items())},
            "weighted_avg": cm(self.weighted),
            "accuracy": self.accuracy,
            "mean_abs_err": self.mean_abs_err,
            "auc": self.auc,
            "counts": {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn, "n": self.n},
        }


def split_train_test(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded stratified shuffle split.

    The train size is round(train_fraction * N); per-class sizes follow a
    largest-remainder apportionment so the class ratio is preserved, with
    every class keeping at least one row on each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    y = dataset.labels
    classes = np.unique(y)
    counts = {int(c): int(np.sum(y == c)) for c in classes}
    if any(n < 2 for n in counts.values()):
        raise StratificationError(f"every class needs >= 2 rows for a stratified split: {counts}")
    total_train = int(round(train_fraction * dataset.n))
    total_train = min(max(total_train, len(classes)), dataset.n - len(classes))

    quotas = {c: train_fraction * n for c, n in counts.items()}
    base = {c: int(np.floor(q)) for c, q in quotas.items()}
    for c in counts:
        base[c] = min(max(base[c], 1), counts[c] - 1)
    remainder_order = sorted(counts, key=lambda c: (-(quotas[c] - np.floor(quotas[c])), c))
    i = 0
    while sum(base.values()) < total_train and i < 10 * len(counts):
        c = remainder_order[i % len(counts)]
        if base[c] < counts[c] - 1:
            base[c] += 1
        i += 1
    while sum(base.values()) > total_train:
        c = max(base, key=lambda cc: (base[cc] - quotas[cc], cc))
        if base[c] <= 1:
            break
        base[c] -= 1

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for c in sorted(counts):
        idx = np.flatnonzero(y == c)
        perm = rng.permutation(len(idx))
        shuffled = idx[perm]
        train_idx.extend(shuffled[: base[c]].tolist())
        test_idx.extend(shuffled[base[c] :].tolist())
    return dataset.take_rows(sorted(train_idx)), dataset.take_rows(sorted(test_idx))


def rebalance(dataset: Dataset, seed: int) -> Dataset:
    """Seeded undersampling of the majority class down to the minority count."""
    y = dataset.labels
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("rebalance requires both classes")
    if n_pos == n_neg:
        return dataset
    minority, majority = (1, 0) if n_pos < n_neg else (0, 1)
    keep = np.flatnonzero(y == minority)
    maj_idx = np.flatnonzero(y == majority)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(maj_idx, size=len(keep), replace=False)
    return dataset.take_rows(sorted(np.concatenate([keep, chosen]).tolist()))


def _one_class(labels: np.ndarray, predicted: np.ndarray, positive: int) -> ClassMetrics:
    tp = int(np.sum((predicted == positive) & (labels == positive)))
    fp = int(np.sum((predicted == positive) & (labels != positive)))
    fn = int(np.sum((predicted != positive) & (labels == positive)))
    tn = int(np.sum((predicted != positive) & (labels != positive)))
    flagged: list[str] = []
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        flagged.append("precision")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        flagged.append("recall")
    if fp + tn > 0:
        fp_rate = fp / (fp + tn)
    else:
        fp_rate = 0.0
        flagged.append("fp_rate")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassMetrics(
        precision=precision,
        recall=recall,
        fp_rate=fp_rate,
        f1=f1,
        support=tp + fn,
        flagged=tuple(flagged),
    )


def confusion_metrics(
    labels: Sequence[int],
    predicted: Sequence[int],
    positive_class: int = 1,
    class_names: dict[int, str] | None = None,
) -> MetricsReport:
    """Exact confusion-matrix metrics, per class and support-weighted."""
    labels = np.asarray(labels, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if labels.shape != predicted.shape or labels.ndim != 1 or len(labels) == 0:
        raise ValueError("labels and predictions must be equal-length non-empty vectors")
    per_class = {c: _one_class(labels, predicted, c) for c in (0, 1)}
    n = len(labels)
    weights = {c: per_class[c].support / n for c in per_class}
    weighted = ClassMetrics(
        precision=sum(weights[c] * per_class[c].precision for c in per_class),
        recall=sum(weights[c] * per_class[c].recall for c in per_class),
        fp_rate=sum(weights[c] * per_class[c].fp_rate for c in per_class),
        f1=sum(weights[c] * per_class[c].f1 for c in per_class),
        support=n,
        flagged=tuple(
            sorted({f for c in per_class for f in per_class[c].flagged})
        ),
    )
    pos = positive_class
    tp = int(np.sum((predicted == pos) & (labels == pos)))
    fp = int(np.sum((predicted == pos) & (labels != pos)))
    fn = int(np.sum((predicted != pos) & (labels == pos)))
    tn = n - tp - fp - fn
    return MetricsReport(
        per_class=per_class,
        weighted=weighted,
        accuracy=(tp + tn) / n,
        mean_abs_err=float(np.mean(np.abs(labels - predicted))),
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        n=n,
        class_names=class_names or {0: "negative", 1: "positive"},
    )


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """Rank-based AUC: P(random positive outscores a random negative), ties 1/2.

    Computed from the Mann-Whitney statistic with midranks, which equals the
    trapezoidal area under the recall vs false-positive-rate curve.
    """
    labels = np.asarray(labels, dtype=int)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC undefined: need both classes")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = float(np.sum(ranks[labels == 1]))
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class Protocol:
    """Repeated rebalance -> split -> fit -> evaluate cycles."""

    repeats: int = 10
    train_fraction: float = 0.6
    seed: int = 0


@dataclass(frozen=True)
class CycleOutcome:
    labels: np.ndarray
    predicted: np.ndarray
    auc: float


def run_cycles(dataset: Dataset, spec: ModelSpec, protocol: Protocol) -> list[CycleOutcome]:
    """Run every protocol cycle for one model spec; derived seed is seed + i."""
    outcomes = []
    for i in range(protocol.repeats):
        cycle_seed = protocol.seed + i
        balanced = rebalance(dataset, cycle_seed)
        train, test = split_train_test(balanced, protocol.train_fraction, cycle_seed)
        model = fit(train, spec)
        scores, predicted = predict(model, test.features)
        outcomes.append(
            CycleOutcome(labels=test.labels, predicted=predicted, auc=roc_auc(test.labels, scores))
        )
    return outcomes


def aggregate_outcomes(
    outcomes: Sequence[CycleOutcome], class_names: dict[int, str] | None = None
) -> MetricsReport:
    labels = np.concatenate([o.labels for o in outcomes])
    predicted = np.concatenate([o.predicted for o in outcomes])
    report = confusion_metrics(labels, predicted, class_names=class_names)
    mean_auc = float(np.mean([o.auc for o in outcomes]))
    return MetricsReport(
        per_class=report.per_class,
        weighted=report.weighted,
        accuracy=report.accuracy,
        mean_abs_err=report.mean_abs_err,
        tp=report.tp,
        tn=report.tn,
        fp=report.fp,
        fn=report.fn,
        n=report.n,
        auc=mean_auc,
        class_names=report.class_names,
    )


def evaluate_spec(
    dataset: Dataset,
    spec: ModelSpec,
    protocol: Protocol,
    class_names: dict[int, str] | None = None,
) -> MetricsReport:
    return aggregate_outcomes(run_cycles(dataset, spec, protocol), class_names)


def mean_cycle_auc(dataset: Dataset, spec: ModelSpec, protocol: Protocol) -> float:
    return float(np.mean([o.auc for o in run_cycles(dataset, spec, protocol)]))


@dataclass(frozen=True)
class StepwiseResult:
    """Greedy forward selection order with the mean AUC after each addition."""

    features: tuple[str, ...]
    auc_trace: tuple[float, ...]


def forward_stepwise(
    dataset: Dataset,
    spec: ModelSpec,
    max_features: int,
    protocol: Protocol,
) -> StepwiseResult:
    """Add, per round, the unselected feature with the best mean test AUC.

    Candidates whose fit or AUC is undefined in any cycle score 0 for the
    round; ties break toward the lower feature index.
    """
    if max_features > len(dataset.feature_names):
        raise ValueError("max_features exceeds the number of columns")
    selected: list[str] = []
    trace: list[float] = []
    remaining = list(dataset.feature_names)
    for _ in range(max_features):
        best_name = None
        best_auc = -1.0
        for name in remaining:  # feature-name order == column order: index tie-break
            candidate = dataset.take_columns(selected + [name])
            try:
                auc = mean_cycle_auc(candidate, spec, protocol)
            except Exception:
                auc = 0.0
            if auc > best_auc:
                best_auc, best_name = auc, name
        selected.append(best_name)
        remaining.remove(best_name)
        trace.append(best_auc)
    return StepwiseResult(features=tuple(selected), auc_trace=tuple(trace))


def report_to_csv(reports: dict[str, MetricsReport], path: str | Path) -> None:
    """Benchmark-table CSV: one row per (algorithm, class/weighted average)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["algorithm", "row", "auc", "accuracy", "mean_abs_err", "precision", "recall", "fp_rate", "f1"]
        )
        for algo, rep in reports.items():
            for cls in sorted(rep.per_class):
                m = rep.per_class[cls]
                writer.writerow(
                    [algo, rep.class_names[cls], rep.auc, rep.accuracy, rep.mean_abs_err,
                     m.precision, m.recall, m.fp_rate, m.f1]
                )
            w = rep.weighted
            writer.writerow(
                [algo, "weighted_avg", rep.auc, rep.accuracy, rep.mean_abs_err,
                 w.precision, w.recall, w.fp_rate, w.f1]
            )


def report_to_json(reports: dict[str, MetricsReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({a: r.to_json_dict() for a, r in reports.items()}, fh, indent=2)
