import numpy as np
import pytest

from polarscope.graph import from_edges
from polarscope.ingest import Tweet, TopicDataset

HOUR = 3_600_000
WINDOW = 12 * HOUR


def tweet(i, author, t=0, text="seed sub", rt_author=None, rt_tweet=None, urls=(), tags=()):
    if rt_author is not None and rt_tweet is None:
        rt_tweet = f"orig-{rt_author}"
    return Tweet(
        id=f"tw{i}",
        author_id=author,
        created_at=t,
        text=text,
        retweet_of_author=rt_author,
        retweet_of_tweet=rt_tweet,
        urls=tuple(urls),
        hashtags=tuple(tags),
    )


def topic(tweets, seed="seed", sub="sub", start=0, end=WINDOW, genre="Social"):
    return TopicDataset(
        seed_keyword=seed,
        sub_keyword=sub,
        window_start=start,
        window_end=end,
        tweets=sorted(tweets, key=lambda t: (t.created_at, t.id)),
        genre=genre,
    )


def two_cliques(size=10, cross_edges=((0, 0),), directed_both_ways=True):
    """Two directed cliques of `size` nodes plus the given cross links
    (pairs of intra-clique indices, left clique -> right clique)."""
    edges = []
    for base in (0, size):
        for i in range(size):
            for j in range(size):
                if i != j:
                    edges.append((f"u{base + i}", f"u{base + j}"))
                    if not directed_both_ways:
                        break
    for a, b in cross_edges:
        edges.append((f"u{a}", f"u{size + b}"))
    return from_edges(edges)


def random_directed_network(n, n_edges, rng):
    """Random simple directed graph as a RetweetNetwork (no self loops)."""
    n_edges = min(n_edges, n * (n - 1) // 2)
    edges = set()
    while len(edges) < n_edges:
        a = int(rng.integers(n))
        b = int(rng.integers(n))
        if a != b:
            edges.add((a, b))
    # make sure every node appears so node_count == n
    net_edges = [(f"n{a}", f"n{b}") for a, b in sorted(edges)]
    present = {u for e in net_edges for u in e}
    spare = [f"n{i}" for i in range(n) if f"n{i}" not in present]
    for i, u in enumerate(spare):
        net_edges.append((u, f"n{(i + 1) % n}" if f"n{(i + 1) % n}" != u else "n0"))
    return from_edges(net_edges)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
