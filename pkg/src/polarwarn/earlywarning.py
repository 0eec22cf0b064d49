"""Early-warning stage: entity datasets, the benchmark, and disputed predictions.

The flow per entity sample is: compute the polarization measures, build
their exceedance curves, select data-driven thresholds, attach the binary
indicators, benchmark the classifier suite on the disputed/undisputed task,
keep the two best models, refit them on the full balanced sample and score
every entity.  Those per-entity predictions feed the fake-news stage.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, EntitySample, disputed_entities
from .features import EntityFeatures, entity_features
from .models import Dataset, ModelSpec, TrainedModel, default_specs, fit, predict
from .evaluation import MetricsReport, Protocol, evaluate_spec, rebalance
from . import thresholds as th

log = logging.getLogger(__name__)

CLASS_NAMES = {0: "undisputed", 1: "disputed"}

# Fixed dataset schemas; occurrences is log-scaled in the matrix (raw counts
# stay in the CSV export of EntityFeatures).
E1_COLUMNS = (
    "occurrences",
    "post_sent_min",
    "post_sent_max",
    "post_sent_mean",
    "post_sent_std",
    "presentation_distance",
    "n_negative_posts",
    "controversy",
)
E2_COLUMNS = E1_COLUMNS + (
    "comment_sent_min",
    "comment_sent_max",
    "comment_sent_mean",
    "comment_sent_std",
    "response_dist_min",
    "response_dist_max",
    "response_dist_mean",
    "response_dist_std",
    "comments_count",
    "n_negative_comments",
    "perception",
    "captivation",
)


def build_entity_dataset(features: list[EntityFeatures], sample_name: str) -> Dataset:
    """Fixed-schema matrix over the sample's entities, labeled by disputedness.

    E1-style samples use the first eight columns, E2-style samples all
    twenty.  Rows missing a mandatory field (no scored comments, or an
    indicator that was never filled) are excluded and logged.
    """
    wide = sample_name.upper() != "E1"
    columns = E2_COLUMNS if wide else E1_COLUMNS
    rows = []
    ids = []
    labels = []
    excluded = []
    for f in sorted(features, key=lambda f: f.entity):
        values = []
        ok = True
        for col in columns:
            v = getattr(f, col)
            if v is None:
                ok = False
                break
            if col == "occurrences":
                v = math.log1p(v)
            values.append(float(v))
        if not ok:
            excluded.append(f.entity)
            continue
        rows.append(values)
        ids.append(f.entity)
        labels.append(f.disputed)
    if excluded:
        log.warning(
            "build_entity_dataset(%s): excluded %d entities with missing features: %s",
            sample_name, len(excluded), ", ".join(excluded[:10]) + ("..." if len(excluded) > 10 else ""),
        )
    return Dataset(
        features=np.asarray(rows, dtype=float).reshape(len(rows), len(columns)),
        labels=np.asarray(labels, dtype=np.int8),
        feature_names=columns,
        positive_class_name="disputed",
        row_ids=tuple(ids),
    )


@dataclass(frozen=True)
class BenchmarkResult:
    reports: dict[str, MetricsReport]
    failures: dict[str, str]


def run_benchmark(
    dataset: Dataset,
    specs: list[ModelSpec],
    protocol: Protocol,
    class_names: dict[int, str] | None = None,
    jobs: int = 1,
) -> BenchmarkResult:
    """Average the benchmark protocol per algorithm; failures never abort."""
    names = class_names or CLASS_NAMES

    def one(spec: ModelSpec):
        try:
            return spec.algorithm, evaluate_spec(dataset, spec, protocol, names), None
        except Exception as exc:
            return spec.algorithm, None, f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, specs))
    else:
        results = [one(s) for s in specs]
    reports = {a: r for a, r, e in results if r is not None}
    failures = {a: e for a, r, e in results if e is not None}
    for algo, err in failures.items():
        log.warning("benchmark failure for %s: %s", algo, err)
    return BenchmarkResult(reports=reports, failures=failures)


def select_best_models(reports: dict[str, MetricsReport]) -> tuple[str, str]:
    """Top two algorithms by AUC, ties by accuracy then algorithm name."""
    if len(reports) < 2:
        raise ValueError(f"need at least two successful reports, got {len(reports)}")
    ranked = sorted(
        reports, key=lambda a: (-(reports[a].auc or 0.0), -reports[a].accuracy, a)
    )
    return ranked[0], ranked[1]


@dataclass(frozen=True)
class EntityPrediction:
    entity: str
    pred_a: int
    pred_b: int
    score_a: float
    score_b: float
    model_a: str
    model_b: str


def predict_disputed(
    dataset: Dataset, model_a: TrainedModel, model_b: TrainedModel
) -> list[EntityPrediction]:
    """Score every row of the full sample with both selected models."""
    if model_a.spec.algorithm == model_b.spec.algorithm:
        raise ValueError("the two predictive models must differ")
    if dataset.row_ids is None:
        raise ValueError("dataset must carry entity row ids")
    scores_a, labels_a = predict(model_a, dataset.features)
    scores_b, labels_b = predict(model_b, dataset.features)
    return [
        EntityPrediction(
            entity=eid,
            pred_a=int(labels_a[i]),
            pred_b=int(labels_b[i]),
            score_a=float(scores_a[i]),
            score_b=float(scores_b[i]),
            model_a=model_a.spec.algorithm,
            model_b=model_b.spec.algorithm,
        )
        for i, eid in enumerate(dataset.row_ids)
    ]


def measure_curves(
    features: list[EntityFeatures],
    disputed: frozenset[str],
    with_comment_measures: bool,
) -> dict[str, th.ExceedanceCurve]:
    """Exceedance curves for every measure the sample supports."""
    curves = {
        th.MEASURE_PRESENTATION: th.build_exceedance_curve(
            {f.entity: f.presentation_distance for f in features}, disputed, th.default_grid(2.0)
        )
    }
    if with_comment_measures:
        response_values = {
            f.entity: f.response_dist_global for f in features if f.response_dist_global is not None
        }
        if response_values:
            curves[th.MEASURE_RESPONSE] = th.build_exceedance_curve(
                response_values, disputed, th.default_grid(2.0)
            )
        curves[th.MEASURE_ENGAGEMENT] = th.build_exceedance_curve(
            {f.entity: f.engaged_fraction for f in features}, disputed, th.default_grid(1.0)
        )
    return curves


def fill_indicators(features: list[EntityFeatures], result: th.ThresholdResult) -> None:
    for f in features:
        f.controversy = 1 if f.presentation_distance >= result.delta_p else 0
        if result.delta_r is not None and f.response_dist_global is not None:
            f.perception = 1 if f.response_dist_global >= result.delta_r else 0
        if result.rho_e is not None:
            f.captivation = 1 if f.engaged_fraction >= result.rho_e else 0


@dataclass
class EarlyWarningResult:
    sample_name: str
    features: list[EntityFeatures]
    curves: dict[str, th.ExceedanceCurve]
    thresholds: th.ThresholdResult
    selections: dict[str, th.ThresholdSelection]
    dataset: Dataset
    benchmark: BenchmarkResult
    best: tuple[str, str]
    models: tuple[TrainedModel, TrainedModel]
    predictions: list[EntityPrediction]

    def predictions_by_entity(self) -> dict[str, EntityPrediction]:
        return {p.entity: p for p in self.predictions}


def run_early_warning(
    corpus: Corpus,
    sample: EntitySample,
    specs: list[ModelSpec] | None = None,
    protocol: Protocol = Protocol(),
    measure_configs=None,
    jobs: int = 1,
) -> EarlyWarningResult:
    """Full early-warning pass over one entity sample."""
    if not sample.entities:
        raise ValueError(f"entity sample {sample.name!r} is empty")
    specs = specs if specs is not None else default_specs(seed=protocol.seed)
    disputed = disputed_entities(corpus, sample)
    features = entity_features(corpus, sample, thresholds=None, disputed=disputed)
    curves = measure_curves(features, disputed, sample.requires_comment_sentiment)
    thresholds, selections = th.select_thresholds(curves, measure_configs)
    fill_indicators(features, thresholds)
    dataset = build_entity_dataset(features, sample.name)
    benchmark = run_benchmark(dataset, specs, protocol, jobs=jobs)
    best = select_best_models(benchmark.reports)
    spec_by_algo = {s.algorithm: s for s in specs}
    balanced = rebalance(dataset, protocol.seed)
    model_a = fit(balanced, spec_by_algo[best[0]])
    model_b = fit(balanced, spec_by_algo[best[1]])
    predictions = predict_disputed(dataset, model_a, model_b)
    return EarlyWarningResult(
        sample_name=sample.name,
        features=features,
        curves=curves,
        thresholds=thresholds,
        selections=selections,
        dataset=dataset,
        benchmark=benchmark,
        best=best,
        models=(model_a, model_b),
        predictions=predictions,
    )
