"""Shared corpus builders and session-scoped synthetic fixtures."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from polarwarn import corpus as cm
from polarwarn import synth


def write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def write_corpus(directory: Path, sources, posts, comments, mentions) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    write_jsonl(directory / "sources.jsonl", sources)
    write_jsonl(directory / "posts.jsonl", posts)
    write_jsonl(directory / "comments.jsonl", comments)
    write_jsonl(directory / "mentions.jsonl", mentions)
    return directory


def source(sid, category="official", name=None):
    return {"id": sid, "name": name or sid, "category": category}


def post(pid, source_id="s1", timestamp=0, text="hello world.", sentiment=0.0, likes=0, shares=0):
    return {"id": pid, "source_id": source_id, "timestamp": timestamp, "text": text,
            "sentiment": sentiment, "likes": likes, "shares": shares}


def comment(cid, post_id, user_id="u1", timestamp=10, text="ok", sentiment=None, likes=0, replies=0):
    return {"id": cid, "post_id": post_id, "user_id": user_id, "timestamp": timestamp,
            "text": text, "sentiment": sentiment, "likes": likes, "replies": replies}


def mention(entity, post_id, confidence=0.95):
    return {"entity": entity, "post_id": post_id, "confidence": confidence}


@pytest.fixture
def tiny_corpus(tmp_path):
    """Two sources, three posts, four comments, three entities."""
    directory = write_corpus(
        tmp_path / "tiny",
        sources=[source("s1", "official"), source("s2", "fake")],
        posts=[
            post("p1", "s1", 0, "First post.", 0.4, likes=10, shares=2),
            post("p2", "s1", 100, "Second post!", -0.2, likes=4, shares=0),
            post("p3", "s2", 3600, "Third post?", -0.8, likes=1, shares=7),
        ],
        comments=[
            comment("c1", "p1", "u1", 5, "nice", 0.5, likes=1, replies=0),
            comment("c2", "p1", "u2", 6, "bad", -0.5, likes=0, replies=1),
            comment("c3", "p2", "u1", 101, "hm", 0.0, likes=2, replies=3),
            comment("c4", "p3", "u3", 3700, "no", None, likes=0, replies=0),
        ],
        mentions=[
            mention("alpha", "p1", 0.95),
            mention("alpha", "p3", 0.9),
            mention("beta", "p2", 0.7),
            mention("gamma", "p1", 0.3),
        ],
    )
    return cm.load_corpus(directory)


SMALL_SYNTH_CONFIG = synth.SynthConfig(
    n_entities=120,
    n_posts=2200,
    n_users=900,
    n_comments=16000,
    head_entities=10,
    head_posts_min=105,
    head_posts_max=120,
    seed=99,
)


@pytest.fixture(scope="session")
def small_synth(tmp_path_factory):
    """Small generated corpus shared by feature/threshold/benchmark tests."""
    directory = tmp_path_factory.mktemp("small_synth")
    truth = synth.generate(SMALL_SYNTH_CONFIG, directory)
    corpus = cm.load_corpus(directory)
    return corpus, truth, directory
