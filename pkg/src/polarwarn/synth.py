"""Seeded synthetic corpus generator with planted, verifiable ground truth.

The generator plants the separations the pipeline is supposed to detect:
disputed entities span a wide post-sentiment range (their official posts
lean positive, their fake posts negative) and attract a devoted commenter
cohort with consonant responses; undisputed entities live on official
sources only, with narrow presentation spread and divergent comments.  Fake
posts appear a bounded number of hours after the entity's first official
post.  A single seeded random stream with a fixed draw order (sources,
entity roles, post allocation, per-entity posts, per-post comments, noise
mentions) makes output files byte-identical per seed.

Ground truth (disputed sets, engaged cohorts, exact presentation spreads,
engaged fractions, planted lags) is tallied during generation, so tests can
verify the feature pipeline against an independent bookkeeping path.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

_EPOCH_2016_07_31 = 1469923200
_DAY = 86400

_OFFICIAL_TEXTS = (
    "Report {k}: an update on {entity}. Officials confirmed the details this morning. Further coverage follows.",
    "Analysis {k}: what the new figures say about {entity}. Experts weigh the evidence carefully.",
    "Interview {k}: a measured conversation about {entity}. Both positions are presented below.",
    "BREAKING {k}: major development on {entity}! Follow our live blog for updates!",
)
_FAKE_TEXTS = (
    "SHOCKING!!! The TRUTH about {entity} THEY do not want you to see!!! SHARE before it is DELETED!!!",
    "EXPOSED: {entity} SCANDAL {k}!!! Mainstream media SILENT!!! WAKE UP!!!",
    "UNBELIEVABLE!!! {entity} secret plan LEAKED {k}!!! READ NOW!!!",
    "New details emerge about {entity}. Sources say the official account {k} leaves questions open.",
)
_COMMENT_TEXTS = (
    "wow",
    "I do not believe this at all!!",
    "interesting point, thanks for sharing",
    "this again? come on",
    "absolutely true!!!",
    "source please",
)


class SynthConfigError(Exception):
    """The configuration is internally infeasible."""


@dataclass(frozen=True)
class SynthConfig:
    n_official_sources: int = 25
    n_fake_sources: int = 15
    n_entities: int = 1000
    disputed_fraction: float = 0.3
    n_posts: int = 10_000
    n_users: int = 3000
    n_comments: int = 100_000
    head_entities: int = 40
    head_posts_min: int = 105
    head_posts_max: int = 130
    disputed_sentiment_low: float = -0.85
    disputed_sentiment_high: float = 0.85
    undisputed_spread: float = 0.3
    disputed_narrow_fraction: float = 0.15
    undisputed_wide_fraction: float = 0.12
    consonant_noise: float = 0.08
    divergent_offset_low: float = 0.3
    divergent_offset_high: float = 0.7
    official_clickbait_rate: float = 0.10
    fake_sober_rate: float = 0.15
    engaged_cohort_size: int = 5
    audience_size_min: int = 10
    audience_size: int = 30
    cohort_comment_share: float = 0.7
    fake_post_fraction: float = 0.4
    fake_lag_hours_low: float = 1.0
    fake_lag_hours_high: float = 23.5
    comment_missing_sentiment_rate: float = 0.05
    noise_mention_rate: float = 0.15
    seed: int = 20160731

    def n_disputed(self) -> int:
        return int(round(self.n_entities * self.disputed_fraction))

    def validate(self) -> None:
        for name in ("disputed_fraction", "cohort_comment_share",
                     "disputed_narrow_fraction", "undisputed_wide_fraction",
                     "comment_missing_sentiment_rate", "noise_mention_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthConfigError(f"{name} must lie in [0, 1], got {v}")
        if not -1.0 <= self.disputed_sentiment_low < self.disputed_sentiment_high <= 1.0:
            raise SynthConfigError("disputed sentiment range must be ordered within [-1, 1]")
        if self.n_entities < 1 or self.n_posts < 1 or self.n_users < 1:
            raise SynthConfigError("entity, post and user counts must be positive")
        if self.head_entities > self.n_entities:
            raise SynthConfigError("head_entities exceeds n_entities")
        reserved = self.n_disputed() * self.engaged_cohort_size
        if reserved + self.audience_size > self.n_users:
            raise SynthConfigError(
                f"infeasible: {reserved} cohort users + audience {self.audience_size} "
                f"exceed n_users={self.n_users}"
            )
        n_head_disputed = min(int(round(self.head_entities * self.disputed_fraction)), self.n_disputed())
        minima = (self.n_disputed() - n_head_disputed) * 3 + (
            self.n_entities - self.head_entities - (self.n_disputed() - n_head_disputed)
        )
        if self.head_entities * self.head_posts_max + minima > self.n_posts * 2:
            pass  # loose sanity only; exact feasibility checked during allocation

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SynthConfig":
        return cls(**doc)


@dataclass
class EntityTruth:
    entity: str
    disputed: bool
    head: bool
    profile: str  # wide_disputed | narrow_disputed | lookalike | plain
    n_posts: int
    d_p: float
    u_e: float
    engaged_users: tuple[str, ...]
    cohort: tuple[str, ...]
    lag_hours: float | None


@dataclass
class GroundTruth:
    entities: dict[str, EntityTruth]
    disputed: tuple[str, ...]
    totals: dict[str, int]
    config: SynthConfig

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "totals": dict(self.totals),
            "disputed": list(self.disputed),
            "entities": {
                e: {
                    "disputed": t.disputed,
                    "head": t.head,
                    "profile": t.profile,
                    "n_posts": t.n_posts,
                    "d_p": t.d_p,
                    "u_e": t.u_e,
                    "engaged_users": list(t.engaged_users),
                    "cohort": list(t.cohort),
                    "lag_hours": t.lag_hours,
                }
                for e, t in self.entities.items()
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "GroundTruth":
        entities = {
            e: EntityTruth(
                entity=e,
                disputed=v["disputed"],
                head=v["head"],
                profile=v["profile"],
                n_posts=v["n_posts"],
                d_p=v["d_p"],
                u_e=v["u_e"],
                engaged_users=tuple(v["engaged_users"]),
                cohort=tuple(v["cohort"]),
                lag_hours=v["lag_hours"],
            )
            for e, v in doc["entities"].items()
        }
        return cls(
            entities=entities,
            disputed=tuple(doc["disputed"]),
            totals=dict(doc["totals"]),
            config=SynthConfig.from_json_dict(doc["config"]),
        )


@dataclass
class _Records:
    sources: list[dict] = field(default_factory=list)
    posts: list[dict] = field(default_factory=list)
    comments: list[dict] = field(default_factory=list)
    mentions: list[dict] = field(default_factory=list)


def _clip(v: float) -> float:
    return float(min(1.0, max(-1.0, v)))


def build_synthetic(config: SynthConfig) -> tuple[_Records, GroundTruth]:
    """Generate all records in memory together with the planted truth."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    rec = _Records()

    official_ids = [f"src_official_{i:03d}" for i in range(config.n_official_sources)]
    fake_ids = [f"src_fake_{i:03d}" for i in range(config.n_fake_sources)]
    for i, sid in enumerate(official_ids):
        rec.sources.append({"id": sid, "name": f"Official Outlet {i}", "category": "official"})
    for i, sid in enumerate(fake_ids):
        rec.sources.append({"id": sid, "name": f"Fringe Site {i}", "category": "fake"})

    n_ent = config.n_entities
    entities = [f"entity_{i:04d}" for i in range(n_ent)]
    n_disputed = config.n_disputed()
    disputed_idx = set(int(i) for i in rng.choice(n_ent, size=n_disputed, replace=False))
    sorted_disputed = sorted(disputed_idx)
    sorted_undisputed = [i for i in range(n_ent) if i not in disputed_idx]
    n_head_disputed = min(int(round(config.head_entities * config.disputed_fraction)), n_disputed)
    head_idx = set(sorted_disputed[:n_head_disputed])
    head_idx.update(sorted_undisputed[: config.head_entities - n_head_disputed])

    # post-count allocation: heads draw from the head range, the rest get a
    # class minimum plus a multinomial share of the remaining budget
    head_counts = {}
    for i in sorted(head_idx):
        head_counts[i] = int(rng.integers(config.head_posts_min, config.head_posts_max + 1))
    non_head = [i for i in range(n_ent) if i not in head_idx]
    minima = {i: (3 if i in disputed_idx else 1) for i in non_head}
    budget = config.n_posts - sum(head_counts.values()) - sum(minima.values())
    if budget < 0:
        raise SynthConfigError(
            f"n_posts={config.n_posts} cannot cover head allocation plus per-entity minima"
        )
    extra = rng.multinomial(budget, np.full(len(non_head), 1.0 / len(non_head))) if non_head else []
    post_counts = dict(head_counts)
    for i, e in zip(non_head, extra):
        post_counts[i] = minima[i] + int(e)

    users = [f"user_{i:05d}" for i in range(config.n_users)]
    cohorts: dict[int, list[str]] = {}
    cursor = 0
    for i in sorted_disputed:
        cohorts[i] = users[cursor : cursor + config.engaged_cohort_size]
        cursor += config.engaged_cohort_size
    pool = np.array(users[cursor:])

    # per-entity roles; the narrow/lookalike minorities create genuine class
    # overlap so the benchmark operates away from trivial separability
    audiences: dict[int, list[str]] = {}
    centers: dict[int, float] = {}
    lags: dict[int, float] = {}
    high_confidence: dict[int, bool] = {}
    profiles: dict[int, str] = {}
    divergence_sign: dict[int, float] = {}
    for i in range(n_ent):
        audience_n = int(rng.integers(min(config.audience_size_min, config.audience_size),
                                      config.audience_size + 1))
        audiences[i] = [str(u) for u in rng.choice(pool, size=audience_n, replace=False)]
        centers[i] = float(rng.uniform(-0.2, 0.6))
        if i in disputed_idx:
            lags[i] = float(rng.uniform(config.fake_lag_hours_low, config.fake_lag_hours_high))
            narrow = bool(rng.uniform() < config.disputed_narrow_fraction)
            profiles[i] = "narrow_disputed" if narrow else "wide_disputed"
        else:
            wide = bool(rng.uniform() < config.undisputed_wide_fraction)
            profiles[i] = "lookalike" if wide else "plain"
            divergence_sign[i] = 1.0 if rng.uniform() < 0.5 else -1.0
        high_confidence[i] = True if i in head_idx else bool(rng.uniform() < 0.5)

    # tallies for the ground truth (independent of the feature pipeline)
    user_total: dict[str, int] = {}
    user_entity: dict[tuple[str, int], int] = {}
    commenters: dict[int, set[str]] = {i: set() for i in range(n_ent)}
    sent_min: dict[int, float] = {}
    sent_max: dict[int, float] = {}
    first_official: dict[int, int] = {}
    first_fake: dict[int, int] = {}

    mean_comments = config.n_comments / config.n_posts
    post_counter = 0
    comment_counter = 0
    for i in range(n_ent):
        entity = entities[i]
        n_e = post_counts[i]
        is_disputed = i in disputed_idx
        if is_disputed:
            n_fake = max(1, int(round(config.fake_post_fraction * n_e)))
            n_fake = min(n_fake, n_e - 1)
        else:
            n_fake = 0
        n_official = n_e - n_fake
        t0 = _EPOCH_2016_07_31 + int(rng.uniform(0, 90 * _DAY))

        slots: list[tuple[str, int, float]] = []  # (category, timestamp, sentiment)
        lo, hi = config.disputed_sentiment_low, config.disputed_sentiment_high
        half = config.undisputed_spread / 2.0
        profile = profiles[i]
        for j in range(n_official):
            ts = t0 if j == 0 else t0 + int(rng.uniform(3600, 30 * _DAY))
            if profile == "wide_disputed":
                sent = hi if j == 0 else float(rng.uniform(0.0, hi))
            elif profile == "lookalike":
                sent = float(rng.uniform(lo, hi))
            else:  # narrow_disputed and plain share the tight band
                sent = _clip(centers[i] + float(rng.uniform(-half, half)))
            slots.append(("official", ts, sent))
        if is_disputed:
            fake_t0 = t0 + int(lags[i] * 3600)
            for j in range(n_fake):
                ts = fake_t0 if j == 0 else fake_t0 + int(rng.uniform(3600, 30 * _DAY))
                if profile == "wide_disputed":
                    sent = lo if j == 0 else float(rng.uniform(lo, 0.0))
                else:
                    sent = _clip(centers[i] + float(rng.uniform(-half, half)))
                slots.append(("fake", ts, sent))

        for category, ts, sent in slots:
            pid = f"post_{post_counter:06d}"
            post_counter += 1
            # a slice of each class borrows the other side's writing style, so
            # surface statistics separate well but never perfectly
            if category == "official":
                source = official_ids[int(rng.integers(len(official_ids)))]
                style = "fake" if rng.uniform() < config.official_clickbait_rate else "official"
                likes = int(rng.gamma(2.0, 30.0))
                shares = int(rng.gamma(2.0, 8.0))
            else:
                source = fake_ids[int(rng.integers(len(fake_ids)))]
                style = "official" if rng.uniform() < config.fake_sober_rate else "fake"
                likes = int(rng.gamma(2.0, 18.0))
                shares = int(rng.gamma(2.0, 16.0))
            if style == "official":
                text = _OFFICIAL_TEXTS[int(rng.integers(len(_OFFICIAL_TEXTS)))].format(
                    k=int(rng.integers(1000)), entity=entity.replace("_", " ")
                )
            else:
                text = _FAKE_TEXTS[int(rng.integers(len(_FAKE_TEXTS)))].format(
                    k=int(rng.integers(1000)), entity=entity.replace("_", " ").upper()
                )
            rec.posts.append(
                {
                    "id": pid,
                    "source_id": source,
                    "timestamp": ts,
                    "text": text,
                    "sentiment": sent,
                    "likes": likes,
                    "shares": shares,
                }
            )
            conf = float(rng.uniform(0.92, 0.99)) if high_confidence[i] else float(rng.uniform(0.62, 0.88))
            rec.mentions.append({"entity": entity, "post_id": pid, "confidence": conf})

            sent_min[i] = min(sent_min.get(i, sent), sent)
            sent_max[i] = max(sent_max.get(i, sent), sent)
            if category == "official":
                first_official[i] = min(first_official.get(i, ts), ts)
            else:
                first_fake[i] = min(first_fake.get(i, ts), ts)

            n_c = int(rng.poisson(mean_comments))
            for _ in range(n_c):
                cid = f"comment_{comment_counter:07d}"
                comment_counter += 1
                if is_disputed and rng.uniform() < config.cohort_comment_share:
                    user = cohorts[i][int(rng.integers(config.engaged_cohort_size))]
                else:
                    user = audiences[i][int(rng.integers(len(audiences[i])))]
                if rng.uniform() < config.comment_missing_sentiment_rate:
                    c_sent = None
                elif is_disputed:
                    # consonant audience: responses hug the presentation
                    c_sent = _clip(sent + float(rng.normal(0.0, config.consonant_noise)))
                else:
                    # divergent audience with a per-entity bias direction
                    offset = float(
                        rng.uniform(config.divergent_offset_low, config.divergent_offset_high)
                    )
                    c_sent = _clip(sent + divergence_sign[i] * offset)
                rec.comments.append(
                    {
                        "id": cid,
                        "post_id": pid,
                        "user_id": user,
                        "timestamp": ts + int(rng.uniform(60, _DAY)),
                        "text": _COMMENT_TEXTS[int(rng.integers(len(_COMMENT_TEXTS)))],
                        "sentiment": c_sent,
                        "likes": int(rng.poisson(2.0)),
                        "replies": int(rng.poisson(1.0)),
                    }
                )
                user_total[user] = user_total.get(user, 0) + 1
                user_entity[(user, i)] = user_entity.get((user, i), 0) + 1
                commenters[i].add(user)

    # low-confidence noise mentions exercise the confidence filter without
    # affecting sample membership
    primary_by_post = {m["post_id"]: m["entity"] for m in rec.mentions}
    for post in rec.posts:
        if rng.uniform() < config.noise_mention_rate:
            other = entities[int(rng.integers(n_ent))]
            if other != primary_by_post[post["id"]]:
                rec.mentions.append(
                    {
                        "entity": other,
                        "post_id": post["id"],
                        "confidence": float(rng.uniform(0.15, 0.55)),
                    }
                )

    truth_entities: dict[str, EntityTruth] = {}
    for i in range(n_ent):
        entity = entities[i]
        engaged = sorted(
            u for u in commenters[i] if user_entity.get((u, i), 0) > 0.95 * user_total[u]
        )
        u_e = len(engaged) / len(commenters[i]) if commenters[i] else 0.0
        lag_hours = None
        if i in disputed_idx:
            lag_hours = (first_fake[i] - first_official[i]) / 3600.0
        truth_entities[entity] = EntityTruth(
            entity=entity,
            disputed=i in disputed_idx,
            head=i in head_idx,
            profile=profiles[i],
            n_posts=post_counts[i],
            d_p=sent_max[i] - sent_min[i],
            u_e=u_e,
            engaged_users=tuple(engaged),
            cohort=tuple(cohorts.get(i, ())),
            lag_hours=lag_hours,
        )
    truth = GroundTruth(
        entities=truth_entities,
        disputed=tuple(entities[i] for i in sorted_disputed),
        totals={
            "sources": len(rec.sources),
            "posts": len(rec.posts),
            "comments": len(rec.comments),
            "mentions": len(rec.mentions),
            "users_active": len(user_total),
        },
        config=config,
    )
    return rec, truth


def ground_truth(config: SynthConfig) -> GroundTruth:
    """The planted truth alone, regenerated deterministically from the config."""
    return build_synthetic(config)[1]


def _write_jsonl(rows: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")


def generate(config: SynthConfig, out_dir: str | Path) -> GroundTruth:
    """Write the four corpus JSONL files plus truth.json; returns the truth."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec, truth = build_synthetic(config)
    _write_jsonl(rec.sources, out / "sources.jsonl")
    _write_jsonl(rec.posts, out / "posts.jsonl")
    _write_jsonl(rec.comments, out / "comments.jsonl")
    _write_jsonl(rec.mentions, out / "mentions.jsonl")
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth.to_json_dict(), fh, indent=2, sort_keys=True)
    return truth


def load_truth(path: str | Path) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        return GroundTruth.from_json_dict(json.load(fh))
