"""Metric formulas against brute-force counting and pairwise AUC oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarwarn import evaluation as ev
from polarwarn.models import Dataset, ModelSpec


def make_dataset(X, y):
    X = np.asarray(X, dtype=float)
    return Dataset(
        features=X,
        labels=np.asarray(y, dtype=np.int8),
        feature_names=tuple(f"f{i}" for i in range(X.shape[1])),
    )


class TestSplit:
    def test_exact_arithmetic_balanced_ten(self):
        ds = make_dataset(np.arange(10).reshape(-1, 1), [0] * 5 + [1] * 5)
        train, test = ev.split_train_test(ds, 0.6, seed=0)
        assert train.n == 6 and test.n == 4
        assert int(train.labels.sum()) == 3 and int(test.labels.sum()) == 2

    def test_same_seed_identical(self):
        rng = np.random.default_rng(0)
        ds = make_dataset(rng.normal(0, 1, (40, 2)), rng.integers(0, 2, 40))
        a = ev.split_train_test(ds, 0.6, seed=3)
        b = ev.split_train_test(ds, 0.6, seed=3)
        assert np.array_equal(a[0].features, b[0].features)
        assert np.array_equal(a[1].features, b[1].features)

    def test_partition_property(self):
        rng = np.random.default_rng(1)
        X = rng.normal(0, 1, (100, 1))
        ds = make_dataset(X, rng.integers(0, 2, 100))
        train, test = ev.split_train_test(ds, 0.6, seed=5)
        combined = np.sort(np.concatenate([train.features[:, 0], test.features[:, 0]]))
        assert np.array_equal(combined, np.sort(X[:, 0]))
        assert train.n + test.n == 100

    def test_small_class_error(self):
        ds = make_dataset([[0.0], [1.0], [2.0]], [0, 0, 1])
        with pytest.raises(ev.StratificationError):
            ev.split_train_test(ds, 0.6, seed=0)

    def test_unbalanced_strata_rounding(self):
        ds = make_dataset(np.arange(10).reshape(-1, 1), [0] * 7 + [1] * 3)
        train, test = ev.split_train_test(ds, 0.6, seed=2)
        assert train.n == 6
        assert int(np.sum(train.labels == 0)) == 4
        assert int(np.sum(train.labels == 1)) == 2


class TestRebalance:
    def test_undersamples_majority(self):
        ds = make_dataset(np.arange(100).reshape(-1, 1), [0] * 80 + [1] * 20)
        out = ev.rebalance(ds, seed=0)
        assert int(np.sum(out.labels == 0)) == 20
        assert int(np.sum(out.labels == 1)) == 20

    def test_balanced_input_unchanged(self):
        ds = make_dataset(np.arange(10).reshape(-1, 1), [0] * 5 + [1] * 5)
        out = ev.rebalance(ds, seed=0)
        assert np.array_equal(out.features, ds.features)

    def test_minority_rows_all_kept(self):
        ds = make_dataset(np.arange(50).reshape(-1, 1), [0] * 40 + [1] * 10)
        out = ev.rebalance(ds, seed=4)
        minority_rows = set(ds.features[ds.labels == 1, 0].tolist())
        assert minority_rows <= set(out.features[:, 0].tolist())

    def test_seeds_vary_subset(self):
        ds = make_dataset(np.arange(100).reshape(-1, 1), [0] * 80 + [1] * 20)
        a = ev.rebalance(ds, seed=0)
        b = ev.rebalance(ds, seed=1)
        assert a.n == b.n == 40
        assert not np.array_equal(a.features, b.features)

    def test_single_class_error(self):
        ds = make_dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ValueError):
            ev.rebalance(ds, seed=0)


class TestConfusionMetrics:
    def test_perfect_predictions(self):
        rep = ev.confusion_metrics([1, 0, 1, 0], [1, 0, 1, 0])
        assert rep.accuracy == 1.0
        assert rep.per_class[1].f1 == 1.0
        assert rep.per_class[1].fp_rate == 0.0
        assert rep.mean_abs_err == 0.0

    def test_hand_confusion_matrix(self):
        rep = ev.confusion_metrics([1, 1, 0, 0], [1, 0, 0, 0])
        pos = rep.per_class[1]
        assert pos.precision == 1.0
        assert pos.recall == 0.5
        assert pos.f1 == pytest.approx(2 / 3)
        assert pos.fp_rate == 0.0
        assert rep.accuracy == 0.75
        assert rep.mean_abs_err == 0.25
        assert (rep.tp, rep.tn, rep.fp, rep.fn) == (1, 2, 0, 1)

    def test_all_positive_predictor(self):
        rep = ev.confusion_metrics([1, 1, 0, 0], [1, 1, 1, 1])
        assert rep.per_class[1].recall == 1.0
        assert rep.per_class[1].fp_rate == 1.0
        assert rep.accuracy == 0.5
        assert rep.per_class[0].flagged == ("precision",)
        assert rep.per_class[0].recall == 0.0

    def test_counts_sum_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 60))
            labels = rng.integers(0, 2, n)
            preds = rng.integers(0, 2, n)
            rep = ev.confusion_metrics(labels, preds)
            assert rep.tp + rep.tn + rep.fp + rep.fn == rep.n == n
            assert rep.accuracy == pytest.approx((rep.tp + rep.tn) / n)

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=80))
    @settings(max_examples=80, deadline=None)
    def test_weighted_recall_equals_accuracy(self, pairs):
        labels = [p[0] for p in pairs]
        preds = [p[1] for p in pairs]
        rep = ev.confusion_metrics(labels, preds)
        assert rep.weighted.recall == pytest.approx(rep.accuracy)


def pairwise_auc(labels, scores):
    """O(n^2) concordant-pair oracle with half credit for ties."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestRocAuc:
    def test_perfect_separation(self):
        assert ev.roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0

    def test_all_ties_half(self):
        assert ev.roc_auc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]) == 0.5

    def test_single_class_error(self):
        with pytest.raises(ev.UndefinedAUCError):
            ev.roc_auc([1, 1], [0.1, 0.9])

    def test_matches_pair_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 50))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            scores = np.round(rng.normal(0, 1, n), 1)  # coarse -> frequent ties
            assert abs(ev.roc_auc(labels, scores) - pairwise_auc(labels, scores)) < 1e-9

    @given(
        st.lists(st.integers(0, 1), min_size=4, max_size=40),
        st.floats(min_value=0.1, max_value=5.0),
        st.floats(min_value=-3.0, max_value=3.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_invariant_under_increasing_transform(self, labels, scale, shift):
        if len(set(labels)) < 2:
            labels = labels[: len(labels) // 2 * 2]
            labels = [0, 1] * (len(labels) // 2) or [0, 1]
        rng = np.random.default_rng(7)
        scores = rng.normal(0, 1, len(labels))
        transformed = np.exp(scale * scores) + shift
        assert ev.roc_auc(labels, scores) == pytest.approx(
            ev.roc_auc(labels, transformed), abs=1e-12
        )


class TestProtocol:
    def planted(self, n=120, seed=0):
        rng = np.random.default_rng(seed)
        signal = rng.normal(0, 1, n)
        y = (signal + rng.normal(0, 0.6, n) > 0).astype(int)
        noise = rng.normal(0, 1, (n, 2))
        X = np.column_stack([signal, noise])
        return make_dataset(X, y)

    def test_cycles_and_aggregate(self):
        ds = self.planted()
        protocol = ev.Protocol(repeats=5, seed=1)
        report = ev.evaluate_spec(ds, ModelSpec("log"), protocol)
        assert report.auc is not None and report.auc > 0.8
        assert report.tp + report.tn + report.fp + report.fn == report.n

    def test_label_permutation_hovers_at_half(self):
        ds = self.planted(n=200)
        rng = np.random.default_rng(5)
        permuted = Dataset(
            features=ds.features,
            labels=rng.permutation(ds.labels),
            feature_names=ds.feature_names,
        )
        auc = ev.mean_cycle_auc(permuted, ModelSpec("log"), ev.Protocol(repeats=8, seed=2))
        assert 0.35 < auc < 0.65


class TestForwardStepwise:
    def test_oracle_feature_selected_first(self):
        rng = np.random.default_rng(3)
        y = rng.integers(0, 2, 80)
        X = np.column_stack([rng.normal(0, 1, 80), y.astype(float), rng.normal(0, 1, 80)])
        ds = make_dataset(X, y)
        result = ev.forward_stepwise(ds, ModelSpec("log"), 2, ev.Protocol(repeats=4, seed=0))
        assert result.features[0] == "f1"
        assert result.auc_trace[0] == 1.0

    def test_noise_columns_hover_at_half(self):
        rng = np.random.default_rng(9)
        X = rng.normal(0, 1, (150, 3))
        y = rng.integers(0, 2, 150)
        ds = make_dataset(X, y)
        result = ev.forward_stepwise(ds, ModelSpec("log"), 3, ev.Protocol(repeats=6, seed=1))
        assert all(0.3 < a < 0.7 for a in result.auc_trace)

    def test_too_many_features_rejected(self):
        ds = make_dataset(np.zeros((10, 2)), [0, 1] * 5)
        with pytest.raises(ValueError):
            ev.forward_stepwise(ds, ModelSpec("log"), 3, ev.Protocol())

    def test_index_tie_break(self):
        # two identical perfect columns: the lower index must win
        y = np.array([0, 1] * 30)
        X = np.column_stack([y.astype(float), y.astype(float)])
        ds = make_dataset(X, y)
        result = ev.forward_stepwise(ds, ModelSpec("log"), 1, ev.Protocol(repeats=3, seed=0))
        assert result.features[0] == "f0"


def test_report_serialization_round_trip(tmp_path):
    rep = ev.confusion_metrics([1, 0, 1, 0], [1, 0, 0, 0], class_names={0: "neg", 1: "pos"})
    ev.report_to_json({"log": rep}, tmp_path / "r.json")
    ev.report_to_csv({"log": rep}, tmp_path / "r.csv")
    text = (tmp_path / "r.csv").read_text()
    assert "weighted_avg" in text and "log" in text
    doc = (tmp_path / "r.json").read_text()
    assert '"pos"' in doc
