"""Topic-level characteristics: usage ratios, vocal minority, feature rows.

These feed both the polarized/non-polarized comparison tables and the
low-resource regressor. The canonical regressor feature set is genre
(one-hot), network size, URL ratio, hashtag ratio and the vocal minority
index; average degree and the subset polarization estimate can be switched
in via ForestParams flags.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .config import ForestParams
from .errors import FeatureError
from .graph import NetworkStats, RetweetNetwork
from .ingest import GENRES, TopicDataset
from .polarization import PolarizationResult


@dataclass
class TopicFeatures:
    genre: str
    network_size: int
    average_degree: float
    url_ratio: float
    hashtag_ratio: float
    vocal_minority_index: float
    tweet_count: int
    naive_phi_hat: float | None = None

    def genre_onehot(self) -> np.ndarray:
        if self.genre not in GENRES:
            raise FeatureError(f"unknown genre {self.genre!r}")
        vec = np.zeros(len(GENRES))
        vec[GENRES.index(self.genre)] = 1.0
        return vec


def url_hashtag_ratios(dataset: TopicDataset) -> tuple[float, float]:
    """Fraction of tweets (retweets included) carrying >=1 URL / hashtag."""
    n = dataset.tweet_count
    if n == 0:
        raise FeatureError("cannot compute ratios for an empty dataset")
    with_url = sum(1 for tw in dataset.tweets if tw.urls)
    with_tag = sum(1 for tw in dataset.tweets if tw.hashtags)
    return with_url / n, with_tag / n


def vocal_minority(dataset: TopicDataset) -> float:
    """Smallest fraction of users whose tweets cover half the volume.

    Users are ranked by authored-tweet count descending (ties by user id
    ascending); the prefix is grown until it holds at least
    ceil(tweet_count / 2) tweets.
    """
    n = dataset.tweet_count
    if n == 0:
        raise FeatureError("cannot compute vocal minority for an empty dataset")
    by_user = Counter(tw.author_id for tw in dataset.tweets)
    ranked = sorted(by_user.items(), key=lambda kv: (-kv[1], kv[0]))
    need = -(-n // 2)  # ceil
    acc = 0
    for prefix, (_, count) in enumerate(ranked, start=1):
        acc += count
        if acc >= need:
            return prefix / len(ranked)
    return 1.0  # unreachable: full prefix always covers everything


def assemble_features(
    dataset: TopicDataset,
    network: RetweetNetwork,
    net_stats: NetworkStats,
    naive_result: PolarizationResult | None = None,
) -> TopicFeatures:
    url_ratio, hashtag_ratio = url_hashtag_ratios(dataset)
    return TopicFeatures(
        genre=dataset.genre,
        network_size=net_stats.node_count,
        average_degree=net_stats.average_degree,
        url_ratio=url_ratio,
        hashtag_ratio=hashtag_ratio,
        vocal_minority_index=vocal_minority(dataset),
        tweet_count=dataset.tweet_count,
        naive_phi_hat=None if naive_result is None else naive_result.phi_hat,
    )


def feature_schema(params: ForestParams | None = None) -> list[str]:
    """Ordered model feature names with the genre one-hot expanded."""
    params = params or ForestParams()
    names = [f"genre={g}" for g in GENRES]
    names += ["network_size", "url_ratio", "hashtag_ratio", "vocal_minority_index"]
    if params.include_average_degree:
        names.append("average_degree")
    if params.include_naive_estimate:
        names.append("naive_phi_hat")
    return names


def to_vector(features: TopicFeatures, params: ForestParams | None = None) -> np.ndarray:
    params = params or ForestParams()
    parts = [features.genre_onehot()]
    parts.append(
        np.array(
            [
                float(features.network_size),
                features.url_ratio,
                features.hashtag_ratio,
                features.vocal_minority_index,
            ]
        )
    )
    if params.include_average_degree:
        parts.append(np.array([features.average_degree]))
    if params.include_naive_estimate:
        if features.naive_phi_hat is None:
            raise FeatureError("naive_phi_hat requested but not populated")
        parts.append(np.array([features.naive_phi_hat]))
    return np.concatenate(parts)


TABLE_COLUMNS = (
    ["topic_id"]
    + [f"genre_{g}" for g in GENRES]
    + [
        "network_size",
        "average_degree",
        "url_ratio",
        "hashtag_ratio",
        "vocal_minority_index",
        "tweet_count",
        "naive_phi_hat",
    ]
)


def table_row(topic_id: str, features: TopicFeatures) -> list:
    onehot = [int(v) for v in features.genre_onehot()]
    return (
        [topic_id]
        + onehot
        + [
            features.network_size,
            features.average_degree,
            features.url_ratio,
            features.hashtag_ratio,
            features.vocal_minority_index,
            features.tweet_count,
            features.naive_phi_hat,
        ]
    )
