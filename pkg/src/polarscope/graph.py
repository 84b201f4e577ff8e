"""Directed retweet network construction and structural statistics.

Edge direction is original author -> retweeter (influence flows with the
information). Repeat retweets increment an edge multiplicity instead of
creating parallel edges; self-retweets are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StatsError
from .ingest import TopicDataset


@dataclass
class RetweetNetwork:
    """Simple directed graph over users with per-edge multiplicities.

    ``src``/``dst``/``mult`` are parallel arrays over distinct directed
    pairs, ordered by first appearance; ``user_ids[i]`` is the external id
    of node index i.
    """

    user_ids: list[str]
    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray
    topic_ref: str = ""
    rewire_swaps: int | None = None  # set on null-model copies

    @property
    def node_count(self) -> int:
        return len(self.user_ids)

    @property
    def edge_count(self) -> int:
        return int(self.src.shape[0])

    @property
    def total_multiplicity(self) -> int:
        return int(self.mult.sum())

    def index_of(self, user_id: str) -> int:
        try:
            return self._index[user_id]
        except AttributeError:
            self._index = {u: i for i, u in enumerate(self.user_ids)}
            return self._index[user_id]


@dataclass(frozen=True)
class NetworkStats:
    node_count: int
    edge_count: int
    average_degree: float


def _empty_network(topic_ref: str) -> RetweetNetwork:
    return RetweetNetwork(
        user_ids=[],
        src=np.empty(0, dtype=np.int64),
        dst=np.empty(0, dtype=np.int64),
        mult=np.empty(0, dtype=np.int64),
        topic_ref=topic_ref,
    )


def build_network(dataset: TopicDataset) -> RetweetNetwork:
    """Build the retweet influence network for one topic.

    Only retweet records contribute; each adds the original author and the
    retweeter as nodes (in that order of first appearance) and an edge
    author -> retweeter. Self-retweets are dropped.
    """
    index: dict[str, int] = {}
    user_ids: list[str] = []
    edges: dict[tuple[int, int], int] = {}

    def node(uid: str) -> int:
        i = index.get(uid)
        if i is None:
            i = len(user_ids)
            index[uid] = i
            user_ids.append(uid)
        return i

    for tw in dataset.tweets:
        if tw.retweet_of_author is None:
            continue
        if tw.retweet_of_author == tw.author_id:
            continue
        s = node(tw.retweet_of_author)
        t = node(tw.author_id)
        edges[(s, t)] = edges.get((s, t), 0) + 1

    if not edges:
        return _empty_network(dataset.topic_id)
    pairs = list(edges)  # insertion order == first appearance
    src = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
    dst = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
    mult = np.fromiter((edges[p] for p in pairs), dtype=np.int64, count=len(pairs))
    return RetweetNetwork(
        user_ids=user_ids, src=src, dst=dst, mult=mult, topic_ref=dataset.topic_id
    )


def stats(network: RetweetNetwork) -> NetworkStats:
    """Node/edge counts and average degree (distinct directed pairs)."""
    if network.node_count == 0:
        raise StatsError("network is empty; filter with viable() first")
    return NetworkStats(
        node_count=network.node_count,
        edge_count=network.edge_count,
        average_degree=network.edge_count / network.node_count,
    )


def viable(network: RetweetNetwork, min_nodes: int = 50, min_edges: int = 50) -> bool:
    """True iff the network clears both size thresholds."""
    return network.node_count >= min_nodes and network.edge_count >= min_edges


def degree_sequences(network: RetweetNetwork) -> tuple[np.ndarray, np.ndarray]:
    """(out_degrees, in_degrees) over distinct directed pairs."""
    n = network.node_count
    out_deg = np.bincount(network.src, minlength=n)
    in_deg = np.bincount(network.dst, minlength=n)
    return out_deg, in_deg


def write_edgelist(network: RetweetNetwork, edge_path, nodemap_path) -> None:
    """Export as "source_id<TAB>target_id<TAB>multiplicity" plus a node map."""
    with open(edge_path, "w", encoding="utf-8") as fh:
        for s, t, m in zip(network.src, network.dst, network.mult):
            fh.write(f"{network.user_ids[s]}\t{network.user_ids[t]}\t{m}\n")
    with open(nodemap_path, "w", encoding="utf-8") as fh:
        for i, uid in enumerate(network.user_ids):
            fh.write(f"{i}\t{uid}\n")


def read_edgelist(edge_path, nodemap_path, topic_ref: str = "") -> RetweetNetwork:
    """Import the write_edgelist() format."""
    user_ids: list[str] = []
    with open(nodemap_path, encoding="utf-8") as fh:
        for line in fh:
            i_str, uid = line.rstrip("\n").split("\t")
            assert int(i_str) == len(user_ids), "node map indices must be dense"
            user_ids.append(uid)
    index = {u: i for i, u in enumerate(user_ids)}
    src, dst, mult = [], [], []
    with open(edge_path, encoding="utf-8") as fh:
        for line in fh:
            s, t, m = line.rstrip("\n").split("\t")
            src.append(index[s])
            dst.append(index[t])
            mult.append(int(m))
    return RetweetNetwork(
        user_ids=user_ids,
        src=np.asarray(src, dtype=np.int64),
        dst=np.asarray(dst, dtype=np.int64),
        mult=np.asarray(mult, dtype=np.int64),
        topic_ref=topic_ref,
    )


def from_edges(
    edges: list[tuple[str, str]] | list[tuple[str, str, int]],
    topic_ref: str = "",
) -> RetweetNetwork:
    """Convenience constructor from (source, target[, multiplicity]) tuples."""
    index: dict[str, int] = {}
    user_ids: list[str] = []
    acc: dict[tuple[int, int], int] = {}

    def node(uid: str) -> int:
        i = index.get(uid)
        if i is None:
            i = len(user_ids)
            index[uid] = i
            user_ids.append(uid)
        return i

    for e in edges:
        s, t = node(e[0]), node(e[1])
        m = e[2] if len(e) == 3 else 1
        if s == t:
            continue
        acc[(s, t)] = acc.get((s, t), 0) + m
    if not acc:
        return _empty_network(topic_ref)
    pairs = list(acc)
    return RetweetNetwork(
        user_ids=user_ids,
        src=np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs)),
        dst=np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs)),
        mult=np.fromiter((acc[p] for p in pairs), dtype=np.int64, count=len(pairs)),
        topic_ref=topic_ref,
    )
