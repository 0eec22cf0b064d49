"""Annotated social-media corpus: loading, validation, indexing, sampling.

The corpus is read from four JSONL files (sources, posts, comments, entity
mentions), validated for schema and referential integrity, and indexed for
the downstream feature computations.  After loading, a :class:`Corpus` is
immutable and safe to share across workers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

OFFICIAL = "official"
FAKE = "fake"

_WS = re.compile(r"\s+")


class CorpusError(Exception):
    """Base class for data-layer failures."""


class SchemaError(CorpusError):
    """A record is malformed (bad JSON, missing field, out-of-range value)."""


class IntegrityError(CorpusError):
    """Referential integrity is broken (dangling keys, duplicate ids)."""


def normalize_entity(label: str) -> str:
    """Canonical topic key: case-folded, inner whitespace collapsed."""
    return _WS.sub(" ", label.strip()).casefold()


@dataclass(frozen=True)
class Source:
    id: str
    name: str
    category: str  # OFFICIAL or FAKE


@dataclass(frozen=True)
class Post:
    id: str
    source_id: str
    timestamp: int
    text: str
    sentiment: float
    likes: int
    shares: int


@dataclass(frozen=True)
class Comment:
    id: str
    post_id: str
    user_id: str
    timestamp: int
    text: str
    sentiment: float | None
    likes: int
    replies: int


@dataclass(frozen=True)
class EntityMention:
    entity: str
    post_id: str
    confidence: float


@dataclass(frozen=True)
class EntitySample:
    """Entities passing a confidence/coverage filter, with their member posts.

    ``member_posts[e]`` holds every post carrying a qualifying mention of
    ``e`` (confidence >= ``min_confidence``).
    """

    name: str
    entities: frozenset[str]
    member_posts: Mapping[str, frozenset[str]]
    min_confidence: float
    min_posts: int
    requires_comment_sentiment: bool = False


@dataclass(frozen=True)
class PostSample:
    """Posts containing at least one entity of an EntitySample.

    ``labels[p]`` is 1 when the post's source is a fake outlet, else 0.
    """

    name: str
    posts: frozenset[str]
    labels: Mapping[str, int]
    entity_sample_name: str


@dataclass
class Corpus:
    sources: dict[str, Source]
    posts: dict[str, Post]
    comments: dict[str, Comment]
    mentions: list[EntityMention]
    # indexes, built once at load time
    comments_by_post: dict[str, tuple[str, ...]] = field(default_factory=dict)
    comments_by_user: dict[str, tuple[str, ...]] = field(default_factory=dict)
    posts_by_entity: dict[str, dict[str, float]] = field(default_factory=dict)
    entities_by_post: dict[str, dict[str, float]] = field(default_factory=dict)

    def source_category(self, post_id: str) -> str:
        return self.sources[self.posts[post_id].source_id].category

    def breakdown(self) -> dict[str, dict[str, int]]:
        """Per-category tallies of pages, posts, likes, comments, shares."""
        out = {
            cat: {"pages": 0, "posts": 0, "likes": 0, "comments": 0, "shares": 0}
            for cat in (OFFICIAL, FAKE)
        }
        for src in self.sources.values():
            out[src.category]["pages"] += 1
        for post in self.posts.values():
            row = out[self.sources[post.source_id].category]
            row["posts"] += 1
            row["likes"] += post.likes
            row["shares"] += post.shares
        for comment in self.comments.values():
            cat = self.source_category(comment.post_id)
            out[cat]["comments"] += 1
        return out


@dataclass(frozen=True)
class CorpusPaths:
    sources: Path
    posts: Path
    comments: Path
    mentions: Path

    @classmethod
    def in_dir(cls, directory: str | Path) -> "CorpusPaths":
        d = Path(directory)
        return cls(
            sources=d / "sources.jsonl",
            posts=d / "posts.jsonl",
            comments=d / "comments.jsonl",
            mentions=d / "mentions.jsonl",
        )


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _as_str(obj: dict, key: str, where: str) -> str:
    v = _need(obj, key, where)
    if not isinstance(v, str) or not v:
        raise SchemaError(f"{where}: field {key!r} must be a non-empty string")
    return v


def _as_count(obj: dict, key: str, where: str) -> int:
    v = _need(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise SchemaError(f"{where}: field {key!r} must be a non-negative integer")
    return v


def _as_timestamp(obj: dict, key: str, where: str) -> int:
    v = _need(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{where}: field {key!r} must be integer UTC seconds")
    return v


def _as_sentiment(v, where: str, key: str = "sentiment") -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: field {key!r} must be a number")
    v = float(v)
    if not -1.0 <= v <= 1.0:
        raise SchemaError(f"{where}: field {key!r} out of range [-1, 1]: {v}")
    return v


def load_corpus(paths: CorpusPaths | str | Path) -> Corpus:
    """Load and validate the four JSONL files into an indexed corpus.

    Raises SchemaError with file/line coordinates for malformed records and
    IntegrityError listing every dangling reference or duplicate key.
    """
    if not isinstance(paths, CorpusPaths):
        paths = CorpusPaths.in_dir(paths)
    for p in (paths.sources, paths.posts, paths.comments, paths.mentions):
        if not Path(p).exists():
            raise CorpusError(f"missing corpus file: {p}")

    sources: dict[str, Source] = {}
    for lineno, obj in _iter_jsonl(paths.sources):
        where = f"{paths.sources}:{lineno}"
        sid = _as_str(obj, "id", where)
        category = _as_str(obj, "category", where)
        if category not in (OFFICIAL, FAKE):
            raise SchemaError(f"{where}: category must be 'official' or 'fake'")
        if sid in sources:
            raise IntegrityError(f"{where}: duplicate source id {sid!r}")
        sources[sid] = Source(id=sid, name=_as_str(obj, "name", where), category=category)

    posts: dict[str, Post] = {}
    for lineno, obj in _iter_jsonl(paths.posts):
        where = f"{paths.posts}:{lineno}"
        pid = _as_str(obj, "id", where)
        if pid in posts:
            raise IntegrityError(f"{where}: duplicate post id {pid!r}")
        posts[pid] = Post(
            id=pid,
            source_id=_as_str(obj, "source_id", where),
            timestamp=_as_timestamp(obj, "timestamp", where),
            text=str(_need(obj, "text", where)),
            sentiment=_as_sentiment(_need(obj, "sentiment", where), where),
            likes=_as_count(obj, "likes", where),
            shares=_as_count(obj, "shares", where),
        )

    comments: dict[str, Comment] = {}
    for lineno, obj in _iter_jsonl(paths.comments):
        where = f"{paths.comments}:{lineno}"
        cid = _as_str(obj, "id", where)
        if cid in comments:
            raise IntegrityError(f"{where}: duplicate comment id {cid!r}")
        raw_sent = _need(obj, "sentiment", where)
        comments[cid] = Comment(
            id=cid,
            post_id=_as_str(obj, "post_id", where),
            user_id=_as_str(obj, "user_id", where),
            timestamp=_as_timestamp(obj, "timestamp", where),
            text=str(_need(obj, "text", where)),
            sentiment=None if raw_sent is None else _as_sentiment(raw_sent, where),
            likes=_as_count(obj, "likes", where),
            replies=_as_count(obj, "replies", where),
        )

    mentions: list[EntityMention] = []
    seen_pairs: set[tuple[str, str]] = set()
    for lineno, obj in _iter_jsonl(paths.mentions):
        where = f"{paths.mentions}:{lineno}"
        entity = normalize_entity(_as_str(obj, "entity", where))
        post_id = _as_str(obj, "post_id", where)
        conf = _need(obj, "confidence", where)
        if isinstance(conf, bool) or not isinstance(conf, (int, float)):
            raise SchemaError(f"{where}: field 'confidence' must be a number")
        conf = float(conf)
        if not 0.0 <= conf <= 1.0:
            raise SchemaError(f"{where}: confidence out of range [0, 1]: {conf}")
        pair = (entity, post_id)
        if pair in seen_pairs:
            raise IntegrityError(f"{where}: duplicate mention of {entity!r} in post {post_id!r}")
        seen_pairs.add(pair)
        mentions.append(EntityMention(entity=entity, post_id=post_id, confidence=conf))

    dangling: list[str] = []
    for post in posts.values():
        if post.source_id not in sources:
            dangling.append(f"post {post.id!r} -> source {post.source_id!r}")
    for comment in comments.values():
        if comment.post_id not in posts:
            dangling.append(f"comment {comment.id!r} -> post {comment.post_id!r}")
    for mention in mentions:
        if mention.post_id not in posts:
            dangling.append(f"mention {mention.entity!r} -> post {mention.post_id!r}")
    if dangling:
        raise IntegrityError("dangling references: " + "; ".join(sorted(dangling)))

    corpus = Corpus(sources=sources, posts=posts, comments=comments, mentions=mentions)
    _build_indexes(corpus)
    return corpus


def _build_indexes(corpus: Corpus) -> None:
    by_post: dict[str, list[str]] = {}
    by_user: dict[str, list[str]] = {}
    for cid in corpus.comments:
        c = corpus.comments[cid]
        by_post.setdefault(c.post_id, []).append(cid)
        by_user.setdefault(c.user_id, []).append(cid)
    corpus.comments_by_post = {k: tuple(v) for k, v in by_post.items()}
    corpus.comments_by_user = {k: tuple(v) for k, v in by_user.items()}

    posts_by_entity: dict[str, dict[str, float]] = {}
    entities_by_post: dict[str, dict[str, float]] = {}
    for m in corpus.mentions:
        posts_by_entity.setdefault(m.entity, {})[m.post_id] = m.confidence
        entities_by_post.setdefault(m.post_id, {})[m.entity] = m.confidence
    corpus.posts_by_entity = posts_by_entity
    corpus.entities_by_post = entities_by_post


def select_entities(
    corpus: Corpus,
    min_confidence: float,
    min_posts: int,
    require_comment_sentiment: bool = False,
    name: str = "",
) -> EntitySample:
    """Entities whose qualifying mentions appear in at least ``min_posts`` posts.

    A mention below ``min_confidence`` is ignored entirely; the post-count
    rule counts distinct posts with qualifying mentions, not raw mentions.
    """
    if not 0.0 <= min_confidence <= 1.0:
        raise ValueError(f"min_confidence out of range: {min_confidence}")
    member: dict[str, frozenset[str]] = {}
    for entity, post_conf in corpus.posts_by_entity.items():
        qualifying = frozenset(p for p, c in post_conf.items() if c >= min_confidence)
        if len(qualifying) >= min_posts and qualifying:
            member[entity] = qualifying
    return EntitySample(
        name=name or f"conf{min_confidence:g}_posts{min_posts}",
        entities=frozenset(member),
        member_posts=member,
        min_confidence=min_confidence,
        min_posts=min_posts,
        requires_comment_sentiment=require_comment_sentiment,
    )


def select_e1(corpus: Corpus) -> EntitySample:
    return select_entities(corpus, 0.6, 1, require_comment_sentiment=False, name="E1")


def select_e2(corpus: Corpus) -> EntitySample:
    return select_entities(corpus, 0.9, 100, require_comment_sentiment=True, name="E2")


def disputed_entities(corpus: Corpus, sample: EntitySample) -> frozenset[str]:
    """Entities with member posts in both the official and the fake category."""
    out = set()
    for entity in sample.entities:
        cats = {corpus.source_category(p) for p in sample.member_posts[entity]}
        if OFFICIAL in cats and FAKE in cats:
            out.add(entity)
    return frozenset(out)


def posts_for_entities(corpus: Corpus, sample: EntitySample, name: str = "") -> PostSample:
    """All posts containing at least one entity of the sample, labeled by source."""
    if not sample.entities:
        raise ValueError("entity sample is empty")
    posts: set[str] = set()
    for entity in sample.entities:
        posts.update(sample.member_posts[entity])
    labels = {p: (1 if corpus.source_category(p) == FAKE else 0) for p in posts}
    return PostSample(
        name=name or f"P[{sample.name}]",
        posts=frozenset(posts),
        labels=labels,
        entity_sample_name=sample.name,
    )
