import numpy as np
import pytest

from polarscope.config import ForestParams
from polarscope.errors import FeatureError
from polarscope.features import (
    TopicFeatures,
    assemble_features,
    feature_schema,
    to_vector,
    url_hashtag_ratios,
    vocal_minority,
)
from polarscope.graph import build_network, stats
from polarscope.ingest import GENRES

from conftest import topic, tweet


class TestRatios:
    def test_hand_counted(self):
        ds = topic(
            [
                tweet(0, "a", t=0, urls=["u"]),
                tweet(1, "b", t=1, tags=["#x"]),
                tweet(2, "c", t=2, tags=["#y"]),
                tweet(3, "d", t=3),
            ]
        )
        assert url_hashtag_ratios(ds) == (0.25, 0.5)

    def test_none(self):
        ds = topic([tweet(i, "a", t=i) for i in range(3)])
        assert url_hashtag_ratios(ds) == (0.0, 0.0)

    def test_all(self):
        ds = topic([tweet(i, "a", t=i, urls=["u"], tags=["#t"]) for i in range(3)])
        assert url_hashtag_ratios(ds) == (1.0, 1.0)

    def test_empty_raises(self):
        with pytest.raises(FeatureError):
            url_hashtag_ratios(topic([]))

    def test_reorder_invariant(self, rng):
        tweets = [
            tweet(i, "a", t=int(rng.integers(100)), urls=["u"] if rng.random() < 0.3 else [])
            for i in range(40)
        ]
        a = url_hashtag_ratios(topic(tweets))
        b = url_hashtag_ratios(topic(list(reversed(tweets))))
        assert a == b


class TestVocalMinority:
    def test_one_dominant_author(self):
        tweets = [tweet(i, "loud", t=i) for i in range(50)]
        tweets += [tweet(50 + i, f"quiet{i % 9}", t=100 + i) for i in range(50)]
        assert vocal_minority(topic(tweets)) == pytest.approx(0.1)

    def test_uniform_activity(self):
        for n in (4, 5, 9):
            tweets = [tweet(i, f"u{i}", t=i) for i in range(n)]
            assert vocal_minority(topic(tweets)) == pytest.approx(-(-n // 2) / n)

    def test_facebook_style_concentration(self):
        # 7% of 100 users produce 50% of 1000 posts
        tweets = []
        i = 0
        for u in range(7):
            for _ in range(72):  # 7 * 72 = 504 >= 500
                tweets.append(tweet(i, f"top{u}", t=i))
                i += 1
        per_rest = (1000 - i) // 93
        for u in range(93):
            for _ in range(per_rest):
                tweets.append(tweet(i, f"rest{u:02d}", t=i))
                i += 1
        while i < 1000:
            tweets.append(tweet(i, f"rest{i % 93:02d}", t=i))
            i += 1
        assert vocal_minority(topic(tweets)) == pytest.approx(0.07)

    def test_duplication_invariant(self, rng):
        tweets = [tweet(i, f"u{int(rng.integers(10))}", t=i) for i in range(30)]
        ds = topic(tweets)
        doubled = tweets + [
            tweet(1000 + i, tw.author_id, t=1000 + i) for i, tw in enumerate(tweets)
        ]
        assert vocal_minority(topic(doubled)) == pytest.approx(vocal_minority(ds))

    def test_concentration_monotone(self, rng):
        """Moving a tweet from the least to the most active user never
        increases the index, as long as the donor keeps at least one tweet
        (emptying a user shrinks the distinct-author denominator, which can
        raise the ratio)."""
        for _ in range(20):
            counts = rng.integers(2, 10, size=8)
            tweets = []
            i = 0
            for u, c in enumerate(counts):
                for _ in range(c):
                    tweets.append(tweet(i, f"u{u}", t=i))
                    i += 1
            before = vocal_minority(topic(tweets))
            order = np.argsort(counts)
            lo, hi = order[0], order[-1]
            moved = []
            dropped = False
            for tw in tweets:
                if tw.author_id == f"u{lo}" and not dropped:
                    dropped = True
                    moved.append(tweet(2000, f"u{hi}", t=2000))
                else:
                    moved.append(tw)
            after = vocal_minority(topic(moved))
            assert after <= before + 1e-12

    def test_empty_raises(self):
        with pytest.raises(FeatureError):
            vocal_minority(topic([]))


class TestAssemble:
    def make_topic(self):
        tweets = [tweet(0, "A", t=0, urls=["u"])]
        tweets += [tweet(1 + i, f"B{i}", t=1 + i, rt_author="A", tags=["#x"]) for i in range(3)]
        return topic(tweets, genre="Business")

    def test_full_row(self):
        ds = self.make_topic()
        net = build_network(ds)
        tf = assemble_features(ds, net, stats(net))
        assert tf.genre == "Business"
        assert tf.network_size == net.node_count == 4
        assert tf.average_degree == pytest.approx(3 / 4)
        assert tf.url_ratio == 0.25
        assert tf.hashtag_ratio == 0.75
        assert tf.tweet_count == 4
        assert tf.naive_phi_hat is None
        onehot = tf.genre_onehot()
        assert onehot.sum() == 1.0
        assert onehot[GENRES.index("Business")] == 1.0

    def test_naive_slot_populated_iff_given(self):
        from polarscope.polarization import PolarizationResult

        ds = self.make_topic()
        net = build_network(ds)
        res = PolarizationResult(
            phi=0.5, null_scores=[0.1], null_mean=0.1, phi_hat=0.4, is_polarized=True
        )
        tf = assemble_features(ds, net, stats(net), naive_result=res)
        assert tf.naive_phi_hat == pytest.approx(0.4)

    def test_unknown_genre_rejected(self):
        tf = TopicFeatures(
            genre="Nope",
            network_size=1,
            average_degree=0.0,
            url_ratio=0.0,
            hashtag_ratio=0.0,
            vocal_minority_index=1.0,
            tweet_count=1,
        )
        with pytest.raises(FeatureError):
            tf.genre_onehot()


class TestSchema:
    def test_canonical_schema_is_papers_five(self):
        names = feature_schema()
        assert names == [f"genre={g}" for g in GENRES] + [
            "network_size",
            "url_ratio",
            "hashtag_ratio",
            "vocal_minority_index",
        ]

    def test_optional_features_appended(self):
        params = ForestParams(include_average_degree=True, include_naive_estimate=True)
        names = feature_schema(params)
        assert names[-2:] == ["average_degree", "naive_phi_hat"]

    def test_vector_matches_schema(self):
        tf = TopicFeatures(
            genre="Sports",
            network_size=120,
            average_degree=2.5,
            url_ratio=0.25,
            hashtag_ratio=0.5,
            vocal_minority_index=0.1,
            tweet_count=500,
        )
        vec = to_vector(tf)
        assert vec.shape[0] == len(feature_schema())
        assert vec[GENRES.index("Sports")] == 1.0
        assert vec[8] == 120.0
