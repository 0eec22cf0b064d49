"""Entity-level polarization measures and the derived analysis curves.

Measures per entity: sentiment spread across the posts that present it
(presentation distance), the gap between how it is presented and how users
respond in comments (response distance), and the fraction of its audience
that is devoted to it (engaged fraction).  Binary indicators (controversy,
perception, captivation) follow once data-driven thresholds are known.

All functions are pure with respect to an immutable corpus; "negative"
always means sentiment strictly below zero, and standard deviations use the
population form (divide by n).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, EntitySample, FAKE, OFFICIAL, disputed_entities


class UnknownEntityError(Exception):
    """The entity has no member posts in the corpus or sample."""


class MissingFeatureError(Exception):
    """A required input (e.g. comment sentiment) is absent for this entity."""


def _population_std(values: Sequence[float], mean: float) -> float:
    n = len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / n)


def _member_posts(corpus: Corpus, entity: str, member_posts) -> list[str]:
    if member_posts is None:
        member_posts = corpus.posts_by_entity.get(entity, {})
    posts = sorted(member_posts)
    if not posts:
        raise UnknownEntityError(f"entity {entity!r} has no member posts")
    return posts


def presentation_distance(corpus: Corpus, entity: str, member_posts=None) -> float:
    """Spread (max minus min) of post sentiment across the entity's posts."""
    posts = _member_posts(corpus, entity, member_posts)
    sentiments = [corpus.posts[p].sentiment for p in posts]
    return max(sentiments) - min(sentiments)


@dataclass(frozen=True)
class ResponseDistances:
    """Per-entity response-distance summary.

    ``global_`` is the absolute gap between the mean post sentiment (over all
    member posts) and the mean comment sentiment pooled over their scored
    comments.  The min/max/mean/std aggregate the per-post distance
    r(p) = abs(post sentiment - mean comment sentiment of p) over member
    posts that have at least one scored comment.
    """

    global_: float
    min: float
    max: float
    mean: float
    std: float
    n_posts_with_comments: int


def response_distance_stats(corpus: Corpus, entity: str, member_posts=None) -> ResponseDistances:
    posts = _member_posts(corpus, entity, member_posts)
    post_sentiments = [corpus.posts[p].sentiment for p in posts]
    per_post: list[float] = []
    pooled: list[float] = []
    for p in posts:
        scored = [
            corpus.comments[c].sentiment
            for c in corpus.comments_by_post.get(p, ())
            if corpus.comments[c].sentiment is not None
        ]
        if scored:
            pooled.extend(scored)
            per_post.append(abs(corpus.posts[p].sentiment - sum(scored) / len(scored)))
    if not pooled:
        raise MissingFeatureError(f"entity {entity!r} has no sentiment-scored comments")
    global_ = abs(sum(post_sentiments) / len(post_sentiments) - sum(pooled) / len(pooled))
    mean = sum(per_post) / len(per_post)
    return ResponseDistances(
        global_=global_,
        min=min(per_post),
        max=max(per_post),
        mean=mean,
        std=_population_std(per_post, mean),
        n_posts_with_comments=len(per_post),
    )


def engaged_fraction(corpus: Corpus, entity: str, member_posts=None) -> float:
    """Fraction of the entity's commenters devoted to it.

    A user counts as engaged when strictly more than 95% of all their
    corpus-wide comments sit on posts containing the entity.  The denominator
    is the set of users with at least one comment on a member post; an
    entity nobody commented on gets 0.
    """
    posts = set(_member_posts(corpus, entity, member_posts))
    commenters: set[str] = set()
    for p in posts:
        for cid in corpus.comments_by_post.get(p, ()):
            commenters.add(corpus.comments[cid].user_id)
    if not commenters:
        return 0.0
    engaged = 0
    for user in commenters:
        all_comments = corpus.comments_by_user[user]
        on_member = sum(1 for cid in all_comments if corpus.comments[cid].post_id in posts)
        if on_member > 0.95 * len(all_comments):
            engaged += 1
    return engaged / len(commenters)


@dataclass
class EntityFeatures:
    entity: str
    occurrences: int
    post_sent_min: float
    post_sent_max: float
    post_sent_mean: float
    post_sent_std: float
    presentation_distance: float
    n_negative_posts: int
    engaged_fraction: float
    disputed: int
    comments_count: int = 0
    n_negative_comments: int = 0
    comment_sent_min: float | None = None
    comment_sent_max: float | None = None
    comment_sent_mean: float | None = None
    comment_sent_std: float | None = None
    response_dist_min: float | None = None
    response_dist_max: float | None = None
    response_dist_mean: float | None = None
    response_dist_std: float | None = None
    response_dist_global: float | None = None
    controversy: int | None = None
    perception: int | None = None
    captivation: int | None = None
    missing: tuple[str, ...] = ()


def entity_features(
    corpus: Corpus,
    sample: EntitySample,
    thresholds=None,
    disputed: frozenset[str] | None = None,
) -> list[EntityFeatures]:
    """Compute the full per-entity feature record for every sample entity.

    Comment-dependent fields stay None (and the record is flagged) when an
    entity has no sentiment-scored comments; the batch never aborts.
    Indicators are filled only when ``thresholds`` is given: controversy when
    the presentation distance reaches delta_p, perception when the global
    response distance reaches delta_r, captivation when the engaged fraction
    reaches rho_e.
    """
    if disputed is None:
        disputed = disputed_entities(corpus, sample)
    delta_p = getattr(thresholds, "delta_p", None)
    delta_r = getattr(thresholds, "delta_r", None)
    rho_e = getattr(thresholds, "rho_e", None)

    out: list[EntityFeatures] = []
    for entity in sorted(sample.entities):
        posts = sorted(sample.member_posts[entity])
        sentiments = [corpus.posts[p].sentiment for p in posts]
        mean = sum(sentiments) / len(sentiments)
        u_e = engaged_fraction(corpus, entity, sample.member_posts[entity])
        feat = EntityFeatures(
            entity=entity,
            occurrences=len(posts),
            post_sent_min=min(sentiments),
            post_sent_max=max(sentiments),
            post_sent_mean=mean,
            post_sent_std=_population_std(sentiments, mean),
            presentation_distance=max(sentiments) - min(sentiments),
            n_negative_posts=sum(1 for s in sentiments if s < 0),
            engaged_fraction=u_e,
            disputed=1 if entity in disputed else 0,
        )

        scored: list[float] = []
        n_comments = 0
        for p in posts:
            for cid in corpus.comments_by_post.get(p, ()):
                n_comments += 1
                s = corpus.comments[cid].sentiment
                if s is not None:
                    scored.append(s)
        feat.comments_count = n_comments
        missing: list[str] = []
        if scored:
            cmean = sum(scored) / len(scored)
            feat.comment_sent_min = min(scored)
            feat.comment_sent_max = max(scored)
            feat.comment_sent_mean = cmean
            feat.comment_sent_std = _population_std(scored, cmean)
            feat.n_negative_comments = sum(1 for s in scored if s < 0)
            rd = response_distance_stats(corpus, entity, sample.member_posts[entity])
            feat.response_dist_min = rd.min
            feat.response_dist_max = rd.max
            feat.response_dist_mean = rd.mean
            feat.response_dist_std = rd.std
            feat.response_dist_global = rd.global_
        else:
            missing.append("comment_sentiment")

        if thresholds is not None:
            if delta_p is not None:
                feat.controversy = 1 if feat.presentation_distance >= delta_p else 0
            if delta_r is not None and feat.response_dist_global is not None:
                feat.perception = 1 if feat.response_dist_global >= delta_r else 0
            if rho_e is not None:
                feat.captivation = 1 if u_e >= rho_e else 0
        feat.missing = tuple(missing)
        out.append(feat)
    return out


def attention_curve(
    corpus: Corpus,
    sample: EntitySample,
    features: Iterable[EntityFeatures],
    grid: Sequence[float],
) -> list[tuple[float, float, float]]:
    """Mean likes and comment counts of posts whose entities spread past each cut.

    For every grid value the post set is the union of member posts over
    entities with presentation distance >= the cut; an empty set yields zeros.
    """
    grid = list(grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending")
    dp = {f.entity: f.presentation_distance for f in features}
    rows = []
    for delta in grid:
        posts: set[str] = set()
        for entity, value in dp.items():
            if value >= delta:
                posts.update(sample.member_posts[entity])
        if posts:
            likes = sum(corpus.posts[p].likes for p in posts) / len(posts)
            n_comments = sum(len(corpus.comments_by_post.get(p, ())) for p in posts) / len(posts)
        else:
            likes = n_comments = 0.0
        rows.append((delta, likes, n_comments))
    return rows


@dataclass(frozen=True)
class Histogram:
    """Bin edges plus area-normalized densities; ``empty`` marks a void class."""

    edges: tuple[float, ...]
    density: tuple[float, ...]
    n: int
    empty: bool = False

    def area(self) -> float:
        return sum(
            d * (b - a) for d, a, b in zip(self.density, self.edges, self.edges[1:])
        )


def response_distribution(
    features: Iterable[EntityFeatures],
    controversial: bool,
    disputed: bool,
    bins: int = 20,
    value_range: tuple[float, float] = (0.0, 2.0),
) -> Histogram:
    """Area-1 histogram of the mean response distance for one C/UC x D/UD class."""
    want_c = 1 if controversial else 0
    want_d = 1 if disputed else 0
    values = [
        f.response_dist_mean
        for f in features
        if f.controversy == want_c and f.disputed == want_d and f.response_dist_mean is not None
    ]
    lo, hi = value_range
    edges = tuple(lo + (hi - lo) * i / bins for i in range(bins + 1))
    if not values:
        return Histogram(edges=edges, density=(0.0,) * bins, n=0, empty=True)
    counts = [0] * bins
    for v in values:
        idx = min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[max(idx, 0)] += 1
    width = (hi - lo) / bins
    density = tuple(c / (len(values) * width) for c in counts)
    return Histogram(edges=edges, density=density, n=len(values))


@dataclass(frozen=True)
class LagHistogram:
    """Official-to-fake first-appearance lags, binned in hours."""

    edges_hours: tuple[float, ...]
    counts: tuple[int, ...]
    lags_hours: tuple[float, ...]
    never_fake: int
    fake_first: int


def temporal_lag_histogram(
    corpus: Corpus,
    sample: EntitySample,
    bin_hours: float = 1.0,
    entities: Iterable[str] | None = None,
) -> LagHistogram:
    """Lag between an entity's first official post and its first fake post.

    Entities never reaching a fake source, or reaching it first (or at the
    same instant), are excluded from the histogram and tallied separately.
    """
    if bin_hours <= 0:
        raise ValueError("bin_hours must be positive")
    chosen = sorted(entities) if entities is not None else sorted(sample.entities)
    lags: list[float] = []
    never_fake = 0
    fake_first = 0
    for entity in chosen:
        posts = sample.member_posts.get(entity, frozenset())
        official_ts = [corpus.posts[p].timestamp for p in posts if corpus.source_category(p) == OFFICIAL]
        fake_ts = [corpus.posts[p].timestamp for p in posts if corpus.source_category(p) == FAKE]
        if not fake_ts:
            never_fake += 1
            continue
        if not official_ts or min(fake_ts) <= min(official_ts):
            fake_first += 1
            continue
        lags.append((min(fake_ts) - min(official_ts)) / 3600.0)
    if lags:
        n_bins = max(1, math.ceil(max(lags) / bin_hours))
    else:
        n_bins = 1
    counts = [0] * n_bins
    for lag in lags:
        counts[min(int(lag / bin_hours), n_bins - 1)] += 1
    edges = tuple(i * bin_hours for i in range(n_bins + 1))
    return LagHistogram(
        edges_hours=edges,
        counts=tuple(counts),
        lags_hours=tuple(lags),
        never_fake=never_fake,
        fake_first=fake_first,
    )


FEATURE_CSV_COLUMNS = [f.name for f in fields(EntityFeatures) if f.name != "missing"] + ["missing"]


def features_to_csv(features: Iterable[EntityFeatures], path: str | Path) -> None:
    """One row per entity, fixed column order; missing values left blank."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_CSV_COLUMNS)
        for f in features:
            row = []
            for col in FEATURE_CSV_COLUMNS:
                v = getattr(f, col)
                if col == "missing":
                    v = "|".join(v)
                row.append("" if v is None else v)
            writer.writerow(row)


def curve_to_csv(rows: Iterable[tuple], header: Sequence[str], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(list(row))
