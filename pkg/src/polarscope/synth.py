"""Synthetic retweet-stream corpora with planted polarization labels.

Two stream families: two-camp streams where users overwhelmingly retweet
within their own camp (planted polarized), and preferential-attachment
star streams where a handful of posts are massively retweeted by mostly
one-shot users (planted non-polarized: their structure barely changes
under degree-preserving shuffling). Streams carry class-dependent URL,
hashtag, genre and activity-concentration distributions so that subset
features are informative, mirroring the observational findings the
predictor leans on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import MS_PER_HOUR, RunConfig, SeedTopic, derive_seed
from .ingest import GENRES, Tweet, TopicDataset

POLARIZED_GENRES = ("International", "Business", "Social")
CALM_GENRES = ("Sports", "Life", "Weather·Disaster", "Science·Culture")

_FILLER_VOCAB = 24


@dataclass
class SynthTopic:
    dataset: TopicDataset
    polarized: bool


def _timestamps(rng, n, window_start, window_end):
    a = rng.uniform(0.8, 2.2)
    b = rng.uniform(1.0, 6.0)
    frac = np.sort(rng.beta(a, b, size=n))
    span = window_end - window_start
    return (window_start + (frac * span)).astype(np.int64)


def _text(seed_kw, sub_kw, rng):
    fillers = " ".join(f"w{int(rng.integers(_FILLER_VOCAB))}" for _ in range(3))
    return f"{seed_kw} {sub_kw} {fillers}"


def _decorations(rng, url_p, tag_p, i):
    urls = (f"https://x.example/{i}",) if rng.random() < url_p else ()
    tags = (f"#t{int(rng.integers(8))}",) if rng.random() < tag_p else ()
    return urls, tags


def polarized_stream(
    topic_idx: int,
    seed_kw: str,
    sub_kw: str,
    window_start: int,
    genre: str,
    n_tweets: int,
    rng: np.random.Generator,
    window_hours: int = 12,
) -> TopicDataset:
    """Two camps of mostly one-shot retweeters around partisan posters.

    Activity is heavy-tailed (a small vocal minority carries much of the
    volume), retweet targets follow popularity, and cross-camp traffic is
    concentrated on persistent bridge users. Camp cohesion varies by topic,
    from sharply split to barely above the detection threshold.
    """
    window_end = window_start + window_hours * MS_PER_HOUR
    # most users act once or twice; the pool scales with volume so the
    # network stays sparse and subset networks genuinely shrink
    n_users = max(400, int(n_tweets * rng.uniform(0.35, 0.55)))
    split = rng.uniform(0.4, 0.6)
    camp_sizes = (max(50, int(n_users * split)), max(50, n_users - int(n_users * split)))
    share_a = camp_sizes[0] / sum(camp_sizes)
    zipf_a = rng.uniform(0.85, 1.15)
    p_orig = rng.uniform(0.03, 0.06)
    # share of retweet traffic that crosses camps, spread diffusely over
    # ordinary users: the low end is sharply polarized, the high end barely
    # clears the detection threshold
    cross_target = rng.uniform(*cross_range)
    url_p = rng.uniform(0.25, 0.55)
    tag_p = rng.uniform(0.35, 0.60)
    times = _timestamps(rng, n_tweets, window_start, window_end)

    # vectorized per-event draws
    camps = (rng.random(n_tweets) >= share_a).astype(np.int64)
    actor = np.empty(n_tweets, dtype=np.int64)
    cross = rng.random(n_tweets) < cross_target
    for c in (0, 1):
        size = camp_sizes[c]
        w = (np.arange(size) + 1.0) ** -zipf_a
        w /= w.sum()
        mask = camps == c
        actor[mask] = rng.choice(size, size=int(mask.sum()), p=w)
    orig_flags = rng.random(n_tweets) < p_orig
    prefer_popular = rng.random(n_tweets) < 0.75
    url_flags = rng.random(n_tweets) < url_p
    tag_flags = rng.random(n_tweets) < tag_p

    # per-camp originals; popularity-proportional pick via the Yule trick
    # (reuse a random past retweet's target), uniform otherwise
    originals: list[list[tuple[str, str]]] = [[], []]
    past_targets: list[list[int]] = [[], []]
    tweets: list[Tweet] = []
    for i in range(n_tweets):
        tid = f"s{topic_idx}-{i}"
        camp = int(camps[i])
        author = f"t{topic_idx}-c{camp}u{int(actor[i])}"
        urls = (f"https://x.example/{i}",) if url_flags[i] else ()
        tags = (f"#t{int(rng.integers(8))}",) if tag_flags[i] else ()
        if orig_flags[i] or not originals[camp]:
            tweets.append(
                Tweet(
                    id=tid,
                    author_id=author,
                    created_at=int(times[i]),
                    text=_text(seed_kw, sub_kw, rng),
                    urls=urls,
                    hashtags=tags,
                )
            )
            originals[camp].append((tid, author))
            continue
        src_camp = 1 - camp if cross[i] else camp
        if not originals[src_camp]:
            src_camp = camp
        pool = originals[src_camp]
        past = past_targets[src_camp]
        if past and prefer_popular[i]:
            src_idx = past[int(rng.integers(len(past)))]
        else:
            src_idx = int(rng.integers(len(pool)))
        src = pool[src_idx]
        if author == src[1]:
            continue  # drop self-retweets at generation time
        past.append(src_idx)
        tweets.append(
            Tweet(
                id=tid,
                author_id=author,
                created_at=int(times[i]),
                text=_text(seed_kw, sub_kw, rng),
                retweet_of_author=src[1],
                retweet_of_tweet=src[0],
                urls=urls,
                hashtags=tags,
            )
        )
    return TopicDataset(
        seed_keyword=seed_kw,
        sub_keyword=sub_kw,
        window_start=window_start,
        window_end=window_end,
        tweets=sorted(tweets, key=lambda t: (t.created_at, t.id)),
        genre=genre,
    )


def star_stream(
    topic_idx: int,
    seed_kw: str,
    sub_kw: str,
    window_start: int,
    genre: str,
    n_tweets: int,
    rng: np.random.Generator,
    window_hours: int = 12,
) -> TopicDataset:
    """A few hub posts retweeted preferentially by mostly one-shot users."""
    window_end = window_start + window_hours * MS_PER_HOUR
    n_hubs = int(rng.integers(2, 6))
    pool_size = max(600, int(n_tweets * rng.uniform(0.35, 0.6)))
    # bimodal URL regime: very low or very high usage
    url_p = rng.uniform(0.02, 0.08) if rng.random() < 0.5 else rng.uniform(0.85, 0.95)
    tag_p = rng.uniform(0.05, 0.25)
    times = _timestamps(rng, n_tweets, window_start, window_end)

    hubs = []
    tweets: list[Tweet] = []
    for h in range(n_hubs):
        tid = f"s{topic_idx}-h{h}"
        author = f"t{topic_idx}-hub{h}"
        urls, tags = _decorations(rng, url_p, tag_p, h)
        tweets.append(
            Tweet(
                id=tid,
                author_id=author,
                created_at=int(times[min(h, n_tweets - 1)]),
                text=_text(seed_kw, sub_kw, rng),
                urls=urls,
                hashtags=tags,
            )
        )
        hubs.append([tid, author, 1])
    for i in range(n_hubs, n_tweets):
        tid = f"s{topic_idx}-{i}"
        pops = np.array([h[2] for h in hubs], dtype=np.float64)
        src = hubs[int(rng.choice(n_hubs, p=pops / pops.sum()))]
        src[2] += 1
        retweeter = f"t{topic_idx}-r{int(rng.integers(pool_size))}"
        urls, tags = _decorations(rng, url_p, tag_p, i)
        tweets.append(
            Tweet(
                id=tid,
                author_id=retweeter,
                created_at=int(times[i]),
                text=_text(seed_kw, sub_kw, rng),
                retweet_of_author=src[1],
                retweet_of_tweet=src[0],
                urls=urls,
                hashtags=tags,
            )
        )
    return TopicDataset(
        seed_keyword=seed_kw,
        sub_keyword=sub_kw,
        window_start=window_start,
        window_end=window_end,
        tweets=sorted(tweets, key=lambda t: (t.created_at, t.id)),
        genre=genre,
    )


def make_corpus(
    n_polarized: int = 30,
    n_star: int = 30,
    seed: int = 0,
    tweets_range: tuple[int, int] = (2200, 3600),
    base_time: int = 1_650_000_000_000,
) -> list[SynthTopic]:
    """Generate the labeled synthetic corpus; deterministic given seed."""
    topics: list[SynthTopic] = []
    total = n_polarized + n_star
    for idx in range(total):
        rng = np.random.default_rng(derive_seed(seed, "synth-topic", idx))
        polarized = idx < n_polarized
        seed_kw = f"alpha{idx:03d}"
        sub_kw = f"beta{idx:03d}"
        window_start = base_time + idx * 24 * MS_PER_HOUR
        n_tweets = int(rng.integers(*tweets_range))
        if polarized:
            genre = (
                str(rng.choice(POLARIZED_GENRES))
                if rng.random() < 0.6
                else str(rng.choice(GENRES))
            )
            ds = polarized_stream(idx, seed_kw, sub_kw, window_start, genre, n_tweets, rng)
        else:
            genre = (
                str(rng.choice(CALM_GENRES))
                if rng.random() < 0.7
                else str(rng.choice(GENRES))
            )
            ds = star_stream(idx, seed_kw, sub_kw, window_start, genre, n_tweets, rng)
        topics.append(SynthTopic(dataset=ds, polarized=polarized))
    return topics


def write_dump(topics: list[SynthTopic], path) -> Path:
    """Flatten the corpus to one line-delimited dump file."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for st in topics:
            for tw in st.dataset.tweets:
                rec = {
                    "id": tw.id,
                    "author_id": tw.author_id,
                    "created_at": tw.created_at,
                    "text": tw.text,
                    "urls": list(tw.urls),
                    "hashtags": list(tw.hashtags),
                }
                if tw.retweet_of_author is not None:
                    rec["retweet_of_author"] = tw.retweet_of_author
                    rec["retweet_of_tweet"] = tw.retweet_of_tweet
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path


def corpus_config(topics: list[SynthTopic], dump_path, output_dir, seed: int = 0) -> RunConfig:
    """RunConfig that makes the CLI pipeline reconstruct exactly this corpus
    (one mined sub-keyword per seed)."""
    cfg = RunConfig(
        dump_path=str(dump_path),
        seed_topics=[
            SeedTopic(
                keyword=st.dataset.seed_keyword,
                genre=st.dataset.genre,
                window_start=st.dataset.window_start,
            )
            for st in topics
        ],
        subkeyword_k=1,
        seed=seed,
        output_dir=str(output_dir),
    )
    return cfg


def planted_labels(topics: list[SynthTopic]) -> dict[str, bool]:
    return {st.dataset.topic_id: st.polarized for st in topics}
