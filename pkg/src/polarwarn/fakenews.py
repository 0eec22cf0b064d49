"""Post-level fake-news classification over five feature categories.

Per post: structural (diffusion counts), semantic (surface text statistics
of the post and of its concatenated comments), user-based (commenter
behavior and engagement), sentiment-based (presentation/response measures of
the contained entities) and predicted (early-warning disputed predictions).
Column names carry a category prefix (st_, sem_, ub_, sb_, pred_) so the
step experiments can slice by category.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, EntitySample, PostSample
from .features import EntityFeatures
from .evaluation import Protocol, MetricsReport, StepwiseResult, evaluate_spec, forward_stepwise, mean_cycle_auc
from .earlywarning import EntityPrediction
from .models import Dataset, ModelSpec

log = logging.getLogger(__name__)

CLASS_NAMES = {0: "not_fake", 1: "fake"}

_WORD = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_SPLIT = re.compile(r"[.!?]+")
_PUNCTUATION = set(".,;:!?'\"()-")

SEMANTIC_STAT_NAMES = (
    "characters",
    "words",
    "sentences",
    "capital_letters",
    "punctuation_signs",
    "avg_word_length",
    "avg_sentence_length",
    "punctuation_rate",
    "capital_rate",
)


def semantic_stats(text: str) -> np.ndarray:
    """Nine surface statistics of a text.

    Words are maximal alphanumeric runs; sentences are '.!?'-delimited
    segments containing at least one word; the average sentence length is in
    words; rates divide by the character count.  Surrounding whitespace is
    ignored and empty text yields all zeros.
    """
    text = text.strip()
    n_chars = len(text)
    words = _WORD.findall(text)
    sentences = [seg for seg in _SENTENCE_SPLIT.split(text) if _WORD.search(seg)]
    n_punct = sum(1 for ch in text if ch in _PUNCTUATION)
    n_caps = sum(1 for ch in text if ch.isupper())
    return np.array(
        [
            n_chars,
            len(words),
            len(sentences),
            n_caps,
            n_punct,
            sum(len(w) for w in words) / len(words) if words else 0.0,
            len(words) / len(sentences) if sentences else 0.0,
            n_punct / n_chars if n_chars else 0.0,
            n_caps / n_chars if n_chars else 0.0,
        ],
        dtype=float,
    )


STRUCTURAL_NAMES = (
    "likes",
    "comments",
    "shares",
    "likes_on_comments",
    "comments_on_comments",
    "avg_likes_on_comments",
    "avg_comments_on_comments",
)


def structural_stats(corpus: Corpus, post_id: str) -> np.ndarray:
    post = corpus.posts[post_id]
    cids = corpus.comments_by_post.get(post_id, ())
    likes_on = sum(corpus.comments[c].likes for c in cids)
    replies_on = sum(corpus.comments[c].replies for c in cids)
    n = len(cids)
    return np.array(
        [
            post.likes,
            n,
            post.shares,
            likes_on,
            replies_on,
            likes_on / n if n else 0.0,
            replies_on / n if n else 0.0,
        ],
        dtype=float,
    )


USER_STAT_NAMES = (
    "comments_to_commenters_avg",
    "comments_to_commenters_std",
    "likes_to_commenters_avg",
    "likes_to_commenters_std",
    "mean_std_likes_to_commenters",
    "mean_std_comments_to_commenters",
    "comments_per_user_avg",
    "comments_per_user_std",
    "pages_per_user_avg",
    "pages_per_user_std",
    "engaged_users",
    "engaged_users_rate",
)


@dataclass(frozen=True)
class _UserContext:
    """Corpus-wide per-user tallies shared across all posts of a build."""

    pages_per_user: Mapping[str, int]
    total_comments: Mapping[str, int]
    member_comment_counts: Mapping[tuple[str, str], int]
    post_entities: Mapping[str, tuple[str, ...]]


def _build_user_context(corpus: Corpus, sample: EntitySample) -> _UserContext:
    pages: dict[str, set[str]] = {}
    totals: dict[str, int] = {}
    for user, cids in corpus.comments_by_user.items():
        totals[user] = len(cids)
        pages[user] = {corpus.posts[corpus.comments[c].post_id].source_id for c in cids}
    post_entities: dict[str, list[str]] = {}
    for entity in sorted(sample.entities):
        for p in sample.member_posts[entity]:
            post_entities.setdefault(p, []).append(entity)
    member_counts: dict[tuple[str, str], int] = {}
    for p, entities in post_entities.items():
        for cid in corpus.comments_by_post.get(p, ()):
            user = corpus.comments[cid].user_id
            for entity in entities:
                key = (user, entity)
                member_counts[key] = member_counts.get(key, 0) + 1
    return _UserContext(
        pages_per_user={u: len(s) for u, s in pages.items()},
        total_comments=totals,
        member_comment_counts=member_counts,
        post_entities={p: tuple(es) for p, es in post_entities.items()},
    )


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, var**0.5


def user_stats(corpus: Corpus, post_id: str, sample: EntitySample, ctx: _UserContext | None = None) -> np.ndarray:
    """Twelve commenter-behavior statistics for one post.

    "Comments/likes to commenters" are the replies/likes received by each
    commenter on their comments under this post, aggregated across
    commenters; the mean-std variants average the per-commenter standard
    deviation.  Engagement uses the corpus-wide 95% rule against the
    entities the post contains.
    """
    if ctx is None:
        ctx = _build_user_context(corpus, sample)
    by_user: dict[str, list] = {}
    for cid in corpus.comments_by_post.get(post_id, ()):
        c = corpus.comments[cid]
        by_user.setdefault(c.user_id, []).append(c)
    if not by_user:
        return np.zeros(len(USER_STAT_NAMES))
    commenters = sorted(by_user)
    replies_sums = [sum(c.replies for c in by_user[u]) for u in commenters]
    likes_sums = [sum(c.likes for c in by_user[u]) for u in commenters]
    per_user_like_stds = [_mean_std([c.likes for c in by_user[u]])[1] for u in commenters]
    per_user_reply_stds = [_mean_std([c.replies for c in by_user[u]])[1] for u in commenters]
    comment_counts = [len(by_user[u]) for u in commenters]
    pages = [ctx.pages_per_user[u] for u in commenters]

    entities = ctx.post_entities.get(post_id, ())
    engaged = 0
    for u in commenters:
        total = ctx.total_comments[u]
        for entity in entities:
            if ctx.member_comment_counts.get((u, entity), 0) > 0.95 * total:
                engaged += 1
                break
    r_avg, r_std = _mean_std(replies_sums)
    l_avg, l_std = _mean_std(likes_sums)
    c_avg, c_std = _mean_std(comment_counts)
    p_avg, p_std = _mean_std(pages)
    return np.array(
        [
            r_avg,
            r_std,
            l_avg,
            l_std,
            sum(per_user_like_stds) / len(commenters),
            sum(per_user_reply_stds) / len(commenters),
            c_avg,
            c_std,
            p_avg,
            p_std,
            engaged,
            engaged / len(commenters),
        ],
        dtype=float,
    )


SENTIMENT_BASE_NAMES = ("post_sentiment", "presentation_dist_mean", "presentation_dist_std")
SENTIMENT_COMMENT_NAMES = (
    "comment_sent_avg",
    "comment_sent_std",
    "rate_positive_comments",
    "rate_negative_comments",
    "pos_over_neg_comments",
    "n_captivating_entities",
    "rate_captivating_entities",
    "response_dist_avg",
)


def sentiment_stats(
    corpus: Corpus,
    post_id: str,
    entities: Sequence[str],
    feature_map: Mapping[str, EntityFeatures],
    include_comment_sentiment: bool,
) -> np.ndarray:
    """Sentiment-based features; the comment-dependent block only for P2-style builds."""
    post = corpus.posts[post_id]
    dps = [feature_map[e].presentation_distance for e in entities if e in feature_map]
    dp_mean, dp_std = _mean_std(dps)
    values = [post.sentiment, dp_mean, dp_std]
    if include_comment_sentiment:
        scored = [
            corpus.comments[c].sentiment
            for c in corpus.comments_by_post.get(post_id, ())
            if corpus.comments[c].sentiment is not None
        ]
        s_avg, s_std = _mean_std(scored)
        n_pos = sum(1 for s in scored if s > 0)
        n_neg = sum(1 for s in scored if s < 0)
        kappa = [feature_map[e].captivation for e in entities if e in feature_map]
        n_capt = sum(1 for k in kappa if k == 1)
        responses = [
            feature_map[e].response_dist_global
            for e in entities
            if e in feature_map and feature_map[e].response_dist_global is not None
        ]
        values += [
            s_avg,
            s_std,
            n_pos / len(scored) if scored else 0.0,
            n_neg / len(scored) if scored else 0.0,
            n_pos / max(1, n_neg),
            n_capt,
            n_capt / len(entities) if entities else 0.0,
            sum(responses) / len(responses) if responses else 0.0,
        ]
    return np.array(values, dtype=float)


def predicted_stats(entities: Sequence[str], predictions: Mapping[str, EntityPrediction]) -> np.ndarray:
    """Counts and rates of contained entities predicted disputed, per model."""
    n = len(entities)
    count_a = sum(1 for e in entities if e in predictions and predictions[e].pred_a == 1)
    count_b = sum(1 for e in entities if e in predictions and predictions[e].pred_b == 1)
    return np.array(
        [count_a, count_a / n if n else 0.0, count_b, count_b / n if n else 0.0], dtype=float
    )


CATEGORY_PREFIXES = {
    "ST": ("st_",),
    "S": ("sem_",),
    "UB": ("ub_",),
    "SB": ("sb_",),
    "P": ("pred_",),
}


def post_feature_names(include_comment_sentiment: bool, model_a: str, model_b: str) -> tuple[str, ...]:
    names = ["st_" + n for n in STRUCTURAL_NAMES]
    names += ["sem_post_" + n for n in SEMANTIC_STAT_NAMES]
    names += ["sem_comments_" + n for n in SEMANTIC_STAT_NAMES]
    names += ["ub_" + n for n in USER_STAT_NAMES]
    names += ["sb_" + n for n in SENTIMENT_BASE_NAMES]
    if include_comment_sentiment:
        names += ["sb_" + n for n in SENTIMENT_COMMENT_NAMES]
    names += [
        f"pred_n_disputed_{model_a}",
        f"pred_rate_disputed_{model_a}",
        f"pred_n_disputed_{model_b}",
        f"pred_rate_disputed_{model_b}",
    ]
    return tuple(names)


def build_post_dataset(
    corpus: Corpus,
    post_sample: PostSample,
    entity_features: Iterable[EntityFeatures],
    predictions: Sequence[EntityPrediction],
    sample: EntitySample,
) -> Dataset:
    """Full per-post feature matrix, labeled fake/not-fake by source category.

    P1-style builds (no comment sentiment in the entity sample) omit the
    comment-dependent sentiment block, giving 44 columns; P2-style builds
    carry all 52.
    """
    feature_map = {f.entity: f for f in entity_features}
    pred_map = {p.entity: p for p in predictions}
    if not predictions:
        raise ValueError("early-warning predictions are required")
    model_a = predictions[0].model_a
    model_b = predictions[0].model_b
    include_comments = sample.requires_comment_sentiment
    ctx = _build_user_context(corpus, sample)
    names = post_feature_names(include_comments, model_a, model_b)

    rows = []
    ids = []
    labels = []
    for post_id in sorted(post_sample.posts):
        entities = ctx.post_entities.get(post_id, ())
        if not entities:
            log.warning("post %s has no qualifying entity mentions", post_id)
        post = corpus.posts[post_id]
        comment_text = "\n".join(
            corpus.comments[c].text for c in corpus.comments_by_post.get(post_id, ())
        )
        row = np.concatenate(
            [
                structural_stats(corpus, post_id),
                semantic_stats(post.text),
                semantic_stats(comment_text),
                user_stats(corpus, post_id, sample, ctx),
                sentiment_stats(corpus, post_id, entities, feature_map, include_comments),
                predicted_stats(entities, pred_map),
            ]
        )
        rows.append(row)
        ids.append(post_id)
        labels.append(post_sample.labels[post_id])
    return Dataset(
        features=np.asarray(rows, dtype=float).reshape(len(rows), len(names)),
        labels=np.asarray(labels, dtype=np.int8),
        feature_names=names,
        positive_class_name="fake",
        row_ids=tuple(ids),
    )


def subset_by_categories(dataset: Dataset, categories: Sequence[str]) -> Dataset:
    prefixes = tuple(p for c in categories for p in CATEGORY_PREFIXES[c])
    names = [n for n in dataset.feature_names if n.startswith(prefixes)]
    return dataset.take_columns(names)


EXPERIMENT_STEPS = {
    "A": [("ST",), ("ST", "S"), ("ST", "UB"), ("ST", "SB"), ("ST", "P")],
    "B": [("ST",), ("ST", "S"), ("ST", "S", "UB"), ("ST", "S", "UB", "SB"), ("ST", "S", "UB", "SB", "P")],
}


@dataclass(frozen=True)
class ExperimentResult:
    mode: str
    steps: tuple[str, ...]
    auc: dict[str, tuple[float, ...]]  # algorithm -> AUC per step


def run_experiment(
    dataset: Dataset,
    mode: str,
    specs: list[ModelSpec],
    protocol: Protocol,
) -> ExperimentResult:
    """Per-algorithm AUC as feature categories are added step by step."""
    mode = mode.upper()
    if mode not in EXPERIMENT_STEPS:
        raise ValueError("mode must be 'A' or 'B'")
    steps: list[str] = []
    step_sets = []
    for cats in EXPERIMENT_STEPS[mode]:
        sub = subset_by_categories(dataset, cats)
        if sub.features.shape[1] == 0:
            log.warning("experiment %s: step %s has no columns, skipped", mode, "+".join(cats))
            continue
        steps.append("+".join(cats))
        step_sets.append(sub)
    auc: dict[str, list[float]] = {s.algorithm: [] for s in specs}
    for sub in step_sets:
        for spec in specs:
            auc[spec.algorithm].append(mean_cycle_auc(sub, spec, protocol))
    return ExperimentResult(
        mode=mode, steps=tuple(steps), auc={a: tuple(v) for a, v in auc.items()}
    )


def final_report(
    dataset: Dataset,
    specs: list[ModelSpec],
    protocol: Protocol,
    max_features: int = 16,
) -> tuple[dict[str, MetricsReport], StepwiseResult]:
    """Full-feature benchmark table plus the stepwise best-feature ranking."""
    reports = {
        spec.algorithm: evaluate_spec(dataset, spec, protocol, CLASS_NAMES) for spec in specs
    }
    best_algo = min(reports, key=lambda a: (-(reports[a].auc or 0.0), -reports[a].accuracy, a))
    best_spec = next(s for s in specs if s.algorithm == best_algo)
    ranking = forward_stepwise(
        dataset, best_spec, min(max_features, len(dataset.feature_names)), protocol
    )
    return reports, ranking
