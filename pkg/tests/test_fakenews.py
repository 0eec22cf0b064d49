"""Post-level features against hand counts and a per-post brute oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarwarn import corpus as cm
from polarwarn import earlywarning as ew
from polarwarn import fakenews as fn
from polarwarn.evaluation import Protocol
from polarwarn.models import Dataset, ModelSpec

from conftest import comment, mention, post, source, write_corpus


class TestSemanticStats:
    def stats(self, text):
        return dict(zip(fn.SEMANTIC_STAT_NAMES, fn.semantic_stats(text)))

    def test_hand_counts(self):
        s = self.stats("Ciao. Ciao!")
        assert s["sentences"] == 2
        assert s["words"] == 2
        assert s["punctuation_signs"] == 2
        assert s["capital_letters"] == 2
        assert s["characters"] == 11
        assert s["avg_word_length"] == 4
        assert s["avg_sentence_length"] == 1

    def test_empty_text_all_zero(self):
        assert fn.semantic_stats("").tolist() == [0.0] * 9

    def test_all_caps_rate(self):
        assert self.stats("AAAA")["capital_rate"] == 1.0

    def test_no_terminator_is_one_sentence(self):
        s = self.stats("due parole")
        assert s["sentences"] == 1
        assert s["avg_sentence_length"] == 2

    def test_accented_words_count(self):
        assert self.stats("perché però")["words"] == 2

    @given(st.text(max_size=80), st.integers(0, 5))
    @settings(max_examples=80, deadline=None)
    def test_trailing_whitespace_invariant(self, text, pad):
        padded = text + " " * pad + "\n" * (pad % 2)
        assert fn.semantic_stats(text).tolist() == fn.semantic_stats(padded).tolist()


def build_user_corpus(tmp_path):
    """Three sources; u1 comments on p1 twice and on two other sources."""
    sources = [source("s1"), source("s2"), source("s3", "fake")]
    posts = [post("p1", "s1"), post("p2", "s2", 50), post("p3", "s3", 60),
             post("p4", "s1", 70)]
    comments = [
        comment("c1", "p1", "u1", 1, replies=1, likes=2),
        comment("c2", "p1", "u1", 2, replies=3, likes=4),
        comment("c3", "p2", "u1", 3),
        comment("c4", "p3", "u1", 4),
    ]
    mentions = [mention("alpha", "p1", 0.9)]
    return cm.load_corpus(write_corpus(tmp_path / "u", sources, posts, comments, mentions))


class TestUserStats:
    def test_hand_computation_single_commenter(self, tmp_path):
        corpus = build_user_corpus(tmp_path)
        sample = cm.select_e1(corpus)
        stats = dict(zip(fn.USER_STAT_NAMES, fn.user_stats(corpus, "p1", sample)))
        assert stats["comments_to_commenters_avg"] == 4  # replies 1 + 3
        assert stats["comments_to_commenters_std"] == 0
        assert stats["likes_to_commenters_avg"] == 6
        assert stats["comments_per_user_avg"] == 2
        assert stats["pages_per_user_avg"] == 3  # s1, s2, s3 corpus-wide
        assert stats["mean_std_comments_to_commenters"] == 1.0  # std of {1, 3}
        assert stats["engaged_users"] == 0  # 2 of 4 comments on alpha's posts

    def test_no_commenters_all_zero(self, tmp_path):
        corpus = build_user_corpus(tmp_path)
        sample = cm.select_e1(corpus)
        assert fn.user_stats(corpus, "p4", sample).tolist() == [0.0] * 12

    def test_engaged_commenter_counted(self, tmp_path):
        sources = [source("s1")]
        posts = [post("p1")]
        comments = [comment(f"c{i}", "p1", "fan", i) for i in range(5)]
        mentions = [mention("alpha", "p1", 0.9)]
        corpus = cm.load_corpus(write_corpus(tmp_path / "e", sources, posts, comments, mentions))
        sample = cm.select_e1(corpus)
        stats = dict(zip(fn.USER_STAT_NAMES, fn.user_stats(corpus, "p1", sample)))
        assert stats["engaged_users"] == 1
        assert stats["engaged_users_rate"] == 1.0


def tiny_prediction(entity, pred_a=0, pred_b=0):
    return ew.EntityPrediction(
        entity=entity, pred_a=pred_a, pred_b=pred_b,
        score_a=float(pred_a), score_b=float(pred_b), model_a="log", model_b="nn",
    )


class TestPredictedStats:
    def test_counts_and_rates(self):
        preds = {"a": tiny_prediction("a", 1, 1), "b": tiny_prediction("b", 0, 0)}
        values = fn.predicted_stats(["a", "b"], preds)
        assert values.tolist() == [1, 0.5, 1, 0.5]

    def test_no_entities_zero(self):
        assert fn.predicted_stats([], {}).tolist() == [0, 0, 0, 0]


@pytest.fixture(scope="module")
def small_post_world(tmp_path_factory):
    from conftest import SMALL_SYNTH_CONFIG
    from polarwarn import synth

    directory = tmp_path_factory.mktemp("posts")
    truth = synth.generate(SMALL_SYNTH_CONFIG, directory)
    corpus = cm.load_corpus(directory)
    e1 = cm.select_e1(corpus)
    warning = ew.run_early_warning(corpus, e1, protocol=Protocol(repeats=4, seed=2))
    p1 = cm.posts_for_entities(corpus, e1, name="P1")
    dataset = fn.build_post_dataset(corpus, p1, warning.features, warning.predictions, e1)
    return corpus, truth, e1, warning, p1, dataset


class TestBuildPostDataset:
    def test_p1_width_44(self, small_post_world):
        *_, dataset = small_post_world
        assert len(dataset.feature_names) == 44
        assert len(set(dataset.feature_names)) == 44

    def test_p2_width_52(self, small_post_world):
        corpus, _, _, _, _, _ = small_post_world
        e2 = cm.select_e2(corpus)
        warning = ew.run_early_warning(corpus, e2, protocol=Protocol(repeats=3, seed=2))
        p2 = cm.posts_for_entities(corpus, e2, name="P2")
        ds = fn.build_post_dataset(corpus, p2, warning.features, warning.predictions, e2)
        assert len(ds.feature_names) == 52

    def test_rates_bounded_counts_nonnegative(self, small_post_world):
        *_, dataset = small_post_world
        for i, name in enumerate(dataset.feature_names):
            column = dataset.features[:, i]
            if "rate" in name:
                assert np.all((column >= 0) & (column <= 1)), name
            if name.startswith(("st_", "ub_engaged", "pred_n")):
                assert np.all(column >= 0), name

    def test_labels_match_source_category(self, small_post_world):
        corpus, _, _, _, p1, dataset = small_post_world
        for pid, label in zip(dataset.row_ids, dataset.labels):
            expected = 1 if corpus.source_category(pid) == "fake" else 0
            assert label == expected

    def test_predicted_count_bounded_by_contained(self, small_post_world):
        corpus, _, e1, warning, _, dataset = small_post_world
        names = list(dataset.feature_names)
        n_col = names.index(f"pred_n_disputed_{warning.best[0]}")
        for row, pid in zip(dataset.features, dataset.row_ids):
            contained = [
                e for e, conf in corpus.entities_by_post.get(pid, {}).items()
                if e in e1.entities and conf >= e1.min_confidence
            ]
            assert row[n_col] <= len(contained)

    def test_matches_naive_recomputation(self, small_post_world):
        corpus, _, e1, warning, p1, dataset = small_post_world
        pred_map = warning.predictions_by_entity()
        feature_map = {f.entity: f for f in warning.features}
        names = list(dataset.feature_names)
        rng = np.random.default_rng(0)
        for pid in rng.choice(sorted(p1.posts), size=60, replace=False):
            row = dataset.features[dataset.row_ids.index(pid)]
            p = corpus.posts[pid]
            cids = corpus.comments_by_post.get(pid, ())
            # structural block recomputed directly from records
            assert row[names.index("st_likes")] == p.likes
            assert row[names.index("st_comments")] == len(cids)
            assert row[names.index("st_shares")] == p.shares
            likes_on = sum(corpus.comments[c].likes for c in cids)
            assert row[names.index("st_likes_on_comments")] == likes_on
            if cids:
                assert row[names.index("st_avg_likes_on_comments")] == pytest.approx(
                    likes_on / len(cids)
                )
            # semantic: recompute on raw strings
            assert row[names.index("sem_post_characters")] == len(p.text.strip())
            joined = "\n".join(corpus.comments[c].text for c in cids)
            assert row[names.index("sem_comments_words")] == fn.semantic_stats(joined)[1]
            # sentiment block: presentation distances of contained entities
            contained = sorted(
                e for e, conf in corpus.entities_by_post.get(pid, {}).items()
                if e in e1.entities and conf >= e1.min_confidence
            )
            dps = [feature_map[e].presentation_distance for e in contained]
            if dps:
                assert row[names.index("sb_presentation_dist_mean")] == pytest.approx(
                    sum(dps) / len(dps)
                )
            # predicted block
            n_a = sum(1 for e in contained if pred_map[e].pred_a == 1)
            assert row[names.index(f"pred_n_disputed_{warning.best[0]}")] == n_a


def synthetic_category_dataset(signal_category, n=240, seed=0):
    """Noise in every category except one, which carries the label."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    names, columns = [], []
    for cat, prefix in (("ST", "st_"), ("S", "sem_"), ("UB", "ub_"), ("SB", "sb_"), ("P", "pred_")):
        for j in range(2):
            names.append(f"{prefix}x{j}")
            if cat == signal_category and j == 0:
                columns.append(y + rng.normal(0, 0.3, n))
            else:
                columns.append(rng.normal(0, 1, n))
    return Dataset(
        features=np.column_stack(columns),
        labels=y.astype(np.int8),
        feature_names=tuple(names),
        positive_class_name="fake",
    )


class TestExperiments:
    def test_step_one_identical_across_modes(self):
        ds = synthetic_category_dataset("P")
        spec = ModelSpec("log", seed=1)
        protocol = Protocol(repeats=3, seed=4)
        a = fn.run_experiment(ds, "A", [spec], protocol)
        b = fn.run_experiment(ds, "B", [spec], protocol)
        assert a.steps[0] == b.steps[0] == "ST"
        assert a.auc["log"][0] == b.auc["log"][0]

    def test_predicted_signal_peaks_at_st_plus_p(self):
        ds = synthetic_category_dataset("P")
        exp = fn.run_experiment(ds, "A", [ModelSpec("log", seed=1)], Protocol(repeats=4, seed=4))
        values = dict(zip(exp.steps, exp.auc["log"]))
        assert max(values, key=values.get) == "ST+P"

    def test_mode_b_final_gains_over_baseline(self):
        ds = synthetic_category_dataset("P")
        exp = fn.run_experiment(ds, "B", [ModelSpec("log", seed=1)], Protocol(repeats=4, seed=4))
        assert exp.auc["log"][-1] > exp.auc["log"][0]

    def test_unknown_mode_rejected(self):
        ds = synthetic_category_dataset("ST")
        with pytest.raises(ValueError):
            fn.run_experiment(ds, "C", [ModelSpec("log")], Protocol(repeats=2))


class TestFinalReport:
    def test_structural_signal_ranks_first(self):
        ds = synthetic_category_dataset("ST", n=300, seed=5)
        reports, ranking = fn.final_report(
            ds, [ModelSpec("log", seed=2)], Protocol(repeats=3, seed=6), max_features=3
        )
        assert ranking.features[0] == "st_x0"
        assert reports["log"].auc > 0.8

    def test_report_class_names(self):
        ds = synthetic_category_dataset("ST", n=200, seed=6)
        reports, _ = fn.final_report(
            ds, [ModelSpec("log", seed=2)], Protocol(repeats=2, seed=6), max_features=1
        )
        assert reports["log"].class_names == {0: "not_fake", 1: "fake"}
