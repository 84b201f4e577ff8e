import json

import numpy as np
import pytest

from polarscope.errors import SchemaError
from polarscope.ingest import (
    NewsArticle,
    default_tokenizer,
    mine_subkeywords,
    parse_dump,
    read_topics,
    seed_select,
    slice_topic,
    write_topics,
)

from conftest import WINDOW, topic, tweet


def record(i, text="hello world", created_at=1000, **extra):
    rec = {
        "id": f"t{i}",
        "author_id": f"u{i}",
        "created_at": created_at,
        "text": text,
    }
    rec.update(extra)
    return rec


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestParseDump:
    def test_three_valid_lines(self, tmp_path):
        p = write_lines(tmp_path / "d.jsonl", [json.dumps(record(i)) for i in range(3)])
        result = parse_dump(p)
        assert len(result.tweets) == 3
        assert result.malformed == 0

    def test_truncated_line_counted_not_fatal(self, tmp_path):
        lines = [json.dumps(record(0)), json.dumps(record(1)), '{"id": "t2", "auth']
        p = write_lines(tmp_path / "d.jsonl", lines)
        result = parse_dump(p)
        assert len(result.tweets) == 2
        assert result.malformed == 1
        assert result.bad_samples

    def test_majority_malformed_raises_schema_error(self, tmp_path):
        lines = [json.dumps(record(0)), "not json", "also not json"]
        p = write_lines(tmp_path / "d.jsonl", lines)
        with pytest.raises(SchemaError):
            parse_dump(p)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_dump(tmp_path / "missing.jsonl")

    def test_inconsistent_retweet_fields_are_malformed(self, tmp_path):
        bad = record(0, retweet_of_author="u9")  # no retweet_of_tweet
        ok = record(1, retweet_of_author="u9", retweet_of_tweet="t9")
        p = write_lines(tmp_path / "d.jsonl", [json.dumps(bad), json.dumps(ok), json.dumps(record(2))])
        result = parse_dump(p)
        assert result.malformed == 1
        assert result.tweets[0].retweet_of_author == "u9"

    def test_schema_mapping(self, tmp_path):
        rec = {"tid": "a", "user": "u", "ts": 5, "body": "text here"}
        p = write_lines(tmp_path / "d.jsonl", [json.dumps(rec)])
        result = parse_dump(
            p, {"id": "tid", "author_id": "user", "created_at": "ts", "text": "body"}
        )
        assert result.tweets[0].id == "a"
        assert result.tweets[0].created_at == 5

    def test_fixture_roundtrip_1000_records(self, tmp_path):
        rng = np.random.default_rng(7)
        records = []
        for i in range(1000):
            rec = record(i, text=f"msg {i}", created_at=int(rng.integers(0, WINDOW)))
            if i % 3 == 0:
                rec["retweet_of_author"] = f"u{int(rng.integers(1000))}"
                rec["retweet_of_tweet"] = f"t{int(rng.integers(1000))}"
            if i % 5 == 0:
                rec["urls"] = [f"https://e/{i}"]
            if i % 7 == 0:
                rec["hashtags"] = [f"#h{i % 11}"]
            records.append(rec)
        p = write_lines(tmp_path / "d.jsonl", [json.dumps(r) for r in records])
        result = parse_dump(p)
        assert len(result.tweets) == 1000
        assert result.malformed == 0
        for rec, tw in zip(records, result.tweets):
            assert tw.id == rec["id"]
            assert tw.author_id == rec["author_id"]
            assert tw.created_at == rec["created_at"]
            assert tw.text == rec["text"]
            assert tw.retweet_of_author == rec.get("retweet_of_author")
            assert tw.retweet_of_tweet == rec.get("retweet_of_tweet")
            assert list(tw.urls) == rec.get("urls", [])
            assert list(tw.hashtags) == rec.get("hashtags", [])


class TestMineSubkeywords:
    def test_hand_counted_frequencies(self):
        tweets = [tweet(0, "a", text="a b b"), tweet(1, "b", text="b c")]
        got = mine_subkeywords(
            tweets, "a", k=2, tokenizer=str.split, stopwords=frozenset(), min_token_len=1
        )
        assert got == [("b", 3), ("c", 1)]

    def test_k_caps_result_length(self):
        tweets = [tweet(i, "a", text=" ".join(f"tok{j}" for j in range(15))) for i in range(3)]
        got = mine_subkeywords(tweets, "seedless", k=10)
        assert len(got) == 10

    def test_all_stopwords_filtered(self):
        tweets = [tweet(0, "a", text="the and or")]
        got = mine_subkeywords(tweets, "x", k=5, stopwords=frozenset({"the", "and", "or"}))
        assert got == []

    def test_seed_and_short_tokens_excluded(self):
        tweets = [tweet(0, "a", text="Seed seed xx y xx")]
        got = mine_subkeywords(tweets, "SEED", k=5, min_token_len=2)
        assert got == [("xx", 2)]

    def test_frequencies_non_increasing_and_tokens_present(self, rng):
        words = [f"w{i}" for i in range(20)]
        tweets = [
            tweet(i, "a", text=" ".join(rng.choice(words, size=8))) for i in range(30)
        ]
        got = mine_subkeywords(tweets, "nope", k=10)
        freqs = [f for _, f in got]
        assert freqs == sorted(freqs, reverse=True)
        corpus = " ".join(tw.text for tw in tweets)
        assert all(tok in corpus for tok, _ in got)

    def test_empty_tweets(self):
        assert mine_subkeywords([], "s", k=3) == []


class TestSliceTopic:
    def test_hand_filtered(self):
        tweets = [
            tweet(0, "a", t=10, text="seed sub yes"),
            tweet(1, "b", t=20, text="seed only"),
            tweet(2, "c", t=30, text="sub and seed"),
            tweet(3, "d", t=40, text="SEED SUB caps"),
            tweet(4, "e", t=99_999_999_999, text="seed sub late"),
        ]
        ds = slice_topic(tweets, "seed", "sub", 0, 1000, "Social")
        assert [tw.id for tw in ds.tweets] == ["tw0", "tw2", "tw3"]
        ds.validate()

    def test_sub_equal_seed(self):
        tweets = [tweet(i, "a", t=i, text="seed text") for i in range(4)]
        ds = slice_topic(tweets, "seed", "seed", 0, 100, "Life")
        assert ds.tweet_count == 4

    def test_window_excludes_all(self):
        tweets = [tweet(i, "a", t=1000 + i, text="seed sub") for i in range(4)]
        ds = slice_topic(tweets, "seed", "sub", 0, 10, "Life")
        assert ds.tweet_count == 0

    def test_idempotent(self):
        tweets = [tweet(i, "a", t=i * 7 % 50, text="seed sub etc") for i in range(9)]
        ds1 = slice_topic(tweets, "seed", "sub", 0, 100, "Social")
        ds2 = slice_topic(ds1.tweets, "seed", "sub", 0, 100, "Social")
        assert ds1 == ds2


class TestTopicRoundtrip:
    def test_write_read(self, tmp_path):
        t1 = topic([tweet(0, "a", t=5), tweet(1, "b", t=9, rt_author="a")])
        t2 = topic([tweet(2, "c", t=3, urls=["https://x"], tags=["#z"])], sub="sub2")
        write_topics([t1, t2], tmp_path / "topics")
        back = read_topics(tmp_path / "topics")
        assert [t.topic_id for t in back] == [t1.topic_id, t2.topic_id]
        assert back[0].tweets == t1.tweets
        assert back[1].tweets == t2.tweets
        assert back[1].genre == t2.genre


class TestSeedSelect:
    def test_separable_groups_get_one_representative_each(self):
        corpus = []
        for g, words in enumerate(["apple pie tasty", "rocket launch space", "stock market cash"]):
            for i in range(10):
                corpus.append(NewsArticle(title=words, genre="Social", published_at=i))
        picks = seed_select(corpus, k=3, seed_rng=42)
        titles = sorted(c.article.title for c in picks)
        assert titles == ["apple pie tasty", "rocket launch space", "stock market cash"]
        assert all(c.cluster_size == 10 for c in picks)

    def test_k_equals_corpus_size(self):
        corpus = [NewsArticle(title=f"unique title {i} token{i}", genre="Life", published_at=i) for i in range(6)]
        picks = seed_select(corpus, k=6, seed_rng=0)
        assert len(picks) == 6
        assert sorted(c.article.title for c in picks) == sorted(a.title for a in corpus)
        assert all(c.cluster_size == 1 for c in picks)

    def test_k_too_large(self):
        corpus = [NewsArticle(title="t", genre="Life", published_at=0)]
        with pytest.raises(ValueError):
            seed_select(corpus, k=2)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        corpus = [
            NewsArticle(
                title=" ".join(f"w{int(x)}" for x in rng.integers(0, 40, size=6)),
                genre="Life",
                published_at=i,
            )
            for i in range(60)
        ]
        a = seed_select(corpus, k=5, seed_rng=11)
        b = seed_select(corpus, k=5, seed_rng=11)
        assert [c.article for c in a] == [c.article for c in b]

    @pytest.mark.slow
    def test_paper_scale_shape(self):
        rng = np.random.default_rng(9)
        vocab = [f"term{i}" for i in range(2000)]
        corpus = [
            NewsArticle(
                title=" ".join(rng.choice(vocab, size=7)),
                genre="Social",
                published_at=i,
            )
            for i in range(17_620)
        ]
        picks = seed_select(corpus, k=100, seed_rng=1)
        assert len(picks) == 100
        assert sum(c.cluster_size for c in picks) == 17_620


def test_default_tokenizer_unicode():
    assert default_tokenizer("Hello, world! #tag") == ["hello", "world", "tag"]
