"""Tweet dump parsing, sub-keyword mining, topic slicing and seed selection.

Input dumps are line-delimited JSON, one record per line, with a
configurable field-name mapping so exports from different collection tools
can be ingested. Keyword matching is case-folded substring containment
throughout.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_DUMP_SCHEMA
from .errors import SchemaError

GENRES = (
    "International",
    "Politics",
    "Business",
    "Social",
    "Sports",
    "Science·Culture",
    "Life",
    "Weather·Disaster",
)

Tokenizer = Callable[[str], list[str]]

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def default_tokenizer(text: str) -> list[str]:
    """Split on Unicode whitespace/punctuation; tokens are case-folded."""
    return _WORD_RE.findall(text.casefold())


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword list: one token per line, UTF-8, blank lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if token:
                words.add(token.casefold())
    return frozenset(words)


@dataclass(frozen=True)
class Tweet:
    """One post record, possibly a retweet of another user's post."""

    id: str
    author_id: str
    created_at: int  # epoch milliseconds UTC
    text: str
    retweet_of_author: str | None = None
    retweet_of_tweet: str | None = None
    urls: tuple[str, ...] = ()
    hashtags: tuple[str, ...] = ()

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of_author is not None


@dataclass(frozen=True)
class NewsArticle:
    title: str
    genre: str
    published_at: int


@dataclass
class TopicDataset:
    """Tweets matching one (seed, sub-keyword) pair inside a time window.

    Tweets are kept sorted by (created_at, id) ascending; every tweet's text
    contains both keywords and every timestamp lies in
    [window_start, window_end].
    """

    seed_keyword: str
    sub_keyword: str
    window_start: int
    window_end: int
    tweets: list[Tweet]
    genre: str

    @property
    def topic_id(self) -> str:
        return f"{self.seed_keyword}__{self.sub_keyword}__{self.window_start}"

    @property
    def tweet_count(self) -> int:
        return len(self.tweets)

    def validate(self) -> None:
        seed = self.seed_keyword.casefold()
        sub = self.sub_keyword.casefold()
        prev = None
        for tw in self.tweets:
            text = tw.text.casefold()
            if seed not in text or sub not in text:
                raise ValueError(f"tweet {tw.id} does not contain both keywords")
            if not self.window_start <= tw.created_at <= self.window_end:
                raise ValueError(f"tweet {tw.id} outside window")
            key = (tw.created_at, tw.id)
            if prev is not None and key < prev:
                raise ValueError("tweets not sorted by (created_at, id)")
            prev = key

    def with_tweets(self, tweets: Iterable[Tweet]) -> "TopicDataset":
        return replace(self, tweets=sorted(tweets, key=lambda t: (t.created_at, t.id)))


@dataclass
class ParseResult:
    tweets: list[Tweet]
    malformed: int
    bad_samples: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.tweets) + self.malformed


def _coerce_record(rec: dict, schema: dict) -> Tweet:
    def get(name, required=False):
        key = schema.get(name, name)
        val = rec.get(key)
        if required and (val is None or val == ""):
            raise ValueError(f"missing field {key!r}")
        return val

    created = get("created_at", required=True)
    created = int(created)
    if created < 0:
        raise ValueError("created_at is negative")
    rt_author = get("retweet_of_author")
    rt_tweet = get("retweet_of_tweet")
    if (rt_author is None) != (rt_tweet is None):
        raise ValueError("retweet fields must be both present or both absent")
    urls = get("urls") or []
    hashtags = get("hashtags") or []
    if not isinstance(urls, list) or not isinstance(hashtags, list):
        raise ValueError("urls/hashtags must be lists")
    return Tweet(
        id=str(get("id", required=True)),
        author_id=str(get("author_id", required=True)),
        created_at=created,
        text=str(get("text", required=True)),
        retweet_of_author=None if rt_author is None else str(rt_author),
        retweet_of_tweet=None if rt_tweet is None else str(rt_tweet),
        urls=tuple(str(u) for u in urls),
        hashtags=tuple(str(h) for h in hashtags),
    )


def parse_dump(path, schema: dict | None = None) -> ParseResult:
    """Parse a line-delimited JSON dump into Tweets.

    Malformed lines are counted, not fatal; a dump where more than half of
    the non-blank lines fail to parse raises SchemaError with a sample
    offending line.
    """
    schema = dict(DEFAULT_DUMP_SCHEMA, **(schema or {}))
    tweets: list[Tweet] = []
    malformed = 0
    samples: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
                tweets.append(_coerce_record(rec, schema))
            except (ValueError, TypeError):
                malformed += 1
                if len(samples) < 5:
                    samples.append(line[:200])
    total = len(tweets) + malformed
    if total > 0 and malformed * 2 > total:
        raise SchemaError(
            f"{malformed}/{total} lines malformed; first offender: {samples[0]!r}"
        )
    return ParseResult(tweets=tweets, malformed=malformed, bad_samples=samples)


def mine_subkeywords(
    tweets: Sequence[Tweet],
    seed: str,
    k: int,
    tokenizer: Tokenizer = default_tokenizer,
    stopwords: frozenset[str] = frozenset(),
    min_token_len: int = 2,
) -> list[tuple[str, int]]:
    """Top-k most frequent tokens across tweet texts, retweets included.

    The seed keyword, stopwords and tokens shorter than ``min_token_len``
    are excluded. Tokens are counted case-folded. Descending frequency,
    ties broken lexicographically ascending.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seed_cf = seed.casefold()
    stop_cf = {s.casefold() for s in stopwords}
    counts: Counter[str] = Counter()
    for tw in tweets:
        for token in tokenizer(tw.text):
            token = token.casefold()
            if len(token) < min_token_len:
                continue
            if token == seed_cf or token in stop_cf:
                continue
            counts[token] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def slice_topic(
    tweets: Iterable[Tweet],
    seed: str,
    sub: str,
    window_start: int,
    window_end: int,
    genre: str,
) -> TopicDataset:
    """Extract the TopicDataset for one (seed, sub) pair and window."""
    if window_start >= window_end:
        raise ValueError("window_start must precede window_end")
    seed_cf = seed.casefold()
    sub_cf = sub.casefold()
    picked = [
        tw
        for tw in tweets
        if window_start <= tw.created_at <= window_end
        and seed_cf in tw.text.casefold()
        and sub_cf in tw.text.casefold()
    ]
    picked.sort(key=lambda t: (t.created_at, t.id))
    return TopicDataset(
        seed_keyword=seed,
        sub_keyword=sub,
        window_start=window_start,
        window_end=window_end,
        tweets=picked,
        genre=genre,
    )


# --- seed-article selection (Bag-of-Words + KMeans) -------------------------


@dataclass
class SeedChoice:
    """A cluster representative article and the size of its cluster."""

    article: NewsArticle
    cluster_size: int
    cluster_index: int


def _bow_matrix(titles: Sequence[str], tokenizer: Tokenizer) -> sp.csr_matrix:
    vocab: dict[str, int] = {}
    rows, cols, vals = [], [], []
    for i, title in enumerate(titles):
        counts = Counter(tokenizer(title))
        for tok, c in counts.items():
            j = vocab.setdefault(tok, len(vocab))
            rows.append(i)
            cols.append(j)
            vals.append(c)
    n_terms = max(len(vocab), 1)
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)),
        shape=(len(titles), n_terms),
    )
    return mat


def _kmeans_pp_init(x: sp.csr_matrix, sq_norms: np.ndarray, k: int, rng) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = x[first].toarray().ravel()
    d2 = sq_norms - 2.0 * (x @ centers[0]) + centers[0] @ centers[0]
    np.maximum(d2, 0.0, out=d2)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # remaining points coincide with chosen centers; fall back to uniform
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx].toarray().ravel()
        dc = sq_norms - 2.0 * (x @ centers[c]) + centers[c] @ centers[c]
        np.maximum(dc, 0.0, out=dc)
        np.minimum(d2, dc, out=d2)
    return centers


def _lloyd(
    x: sp.csr_matrix,
    k: int,
    rng,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd's iterations with k-means++ init.

    Returns (labels, centers, per-iteration objective). The objective (sum
    of squared distances to assigned centers) is non-increasing.
    """
    sq_norms = np.asarray(x.multiply(x).sum(axis=1)).ravel()
    centers = _kmeans_pp_init(x, sq_norms, k, rng)
    labels = np.zeros(x.shape[0], dtype=np.int64)
    objectives: list[float] = []
    for _ in range(max_iter):
        c_sq = np.einsum("ij,ij->i", centers, centers)
        dist = sq_norms[:, None] - 2.0 * (x @ centers.T) + c_sq[None, :]
        np.maximum(dist, 0.0, out=dist)
        labels = np.argmin(dist, axis=1)
        objectives.append(float(dist[np.arange(x.shape[0]), labels].sum()))
        new_centers = centers.copy()
        for c in range(k):
            members = np.flatnonzero(labels == c)
            if members.size:
                new_centers[c] = np.asarray(x[members].mean(axis=0)).ravel()
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if shift < tol:
            break
    # final assignment against the converged centers
    c_sq = np.einsum("ij,ij->i", centers, centers)
    dist = sq_norms[:, None] - 2.0 * (x @ centers.T) + c_sq[None, :]
    np.maximum(dist, 0.0, out=dist)
    labels = np.argmin(dist, axis=1)
    objectives.append(float(dist[np.arange(x.shape[0]), labels].sum()))
    return labels, centers, objectives


def seed_select(
    corpus: Sequence[NewsArticle],
    k: int,
    tokenizer: Tokenizer = default_tokenizer,
    seed_rng: int = 0,
) -> list[SeedChoice]:
    """Pick k representative articles by KMeans over title Bag-of-Words.

    For each cluster, the article nearest the centroid is returned (ties go
    to the lowest corpus index) together with the cluster size, one
    representative per cluster, ordered by cluster index.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    if k > len(corpus):
        raise ValueError(f"k={k} exceeds corpus size {len(corpus)}")
    rng = np.random.default_rng(seed_rng)
    x = _bow_matrix([a.title for a in corpus], tokenizer)
    labels, centers, objectives = _lloyd(x, k, rng)
    if any(b > a + 1e-9 for a, b in zip(objectives, objectives[1:])):
        raise AssertionError("KMeans objective increased across iterations")
    sq_norms = np.asarray(x.multiply(x).sum(axis=1)).ravel()
    c_sq = np.einsum("ij,ij->i", centers, centers)
    dist = sq_norms[:, None] - 2.0 * (x @ centers.T) + c_sq[None, :]
    choices = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        pool = members if members.size else np.arange(len(corpus))
        best = int(pool[np.argmin(dist[pool, c])])
        choices.append(
            SeedChoice(article=corpus[best], cluster_size=int(members.size), cluster_index=c)
        )
    return choices


# --- topic directory round-trip ---------------------------------------------


def _tweet_to_record(tw: Tweet) -> dict:
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
    return rec


def write_topics(topics: Sequence[TopicDataset], out_dir) -> Path:
    """Serialize topics as per-topic JSONL files plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for topic in topics:
        fname = f"{topic.topic_id}.jsonl"
        with open(out / fname, "w", encoding="utf-8") as fh:
            for tw in topic.tweets:
                fh.write(json.dumps(_tweet_to_record(tw), ensure_ascii=False) + "\n")
        manifest.append(
            {
                "file": fname,
                "seed_keyword": topic.seed_keyword,
                "sub_keyword": topic.sub_keyword,
                "window_start": topic.window_start,
                "window_end": topic.window_end,
                "genre": topic.genre,
                "tweet_count": topic.tweet_count,
            }
        )
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, ensure_ascii=False, sort_keys=True)
    return out / "manifest.json"


def read_topics(topic_dir) -> list[TopicDataset]:
    """Load every topic listed in a directory manifest."""
    topic_dir = Path(topic_dir)
    with open(topic_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    topics = []
    for entry in manifest:
        parsed = parse_dump(topic_dir / entry["file"])
        topics.append(
            TopicDataset(
                seed_keyword=entry["seed_keyword"],
                sub_keyword=entry["sub_keyword"],
                window_start=entry["window_start"],
                window_end=entry["window_end"],
                tweets=parsed.tweets,
                genre=entry["genre"],
            )
        )
    return topics
