"""Command-line pipeline: ingest, score, characterize, evaluate, train, predict.

Every command is deterministic given config + seed and rewrites its outputs
byte-identically; all inter-stage data flows through CSV/JSONL files in the
configured output directory.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import features as feats
from . import model as forest
from . import sampler
from .config import RunConfig, derive_seed
from .errors import ConfigError, PolarscopeError, SchemaError
from .graph import build_network, stats, viable
from .ingest import (
    TopicDataset,
    default_tokenizer,
    load_stopwords,
    mine_subkeywords,
    parse_dump,
    read_topics,
    slice_topic,
    write_topics,
)
from .polarization import from_params
from .tables import parse_cell, read_csv, write_csv

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

SCORE_COLUMNS = [
    "topic_id",
    "nodes",
    "edges",
    "phi",
    "null_mean",
    "null_std",
    "phi_hat",
    "is_polarized",
    "seed",
]


# --- ingest ------------------------------------------------------------------


def cmd_ingest(cfg: RunConfig) -> int:
    if not cfg.dump_path:
        raise ConfigError("dump_path is required for ingest")
    if not cfg.seed_topics:
        raise ConfigError("seed_topics is required for ingest")
    result = parse_dump(cfg.dump_path, cfg.dump_schema)
    stopwords = load_stopwords(cfg.stopwords_path) if cfg.stopwords_path else frozenset()

    # one pass over the dump: group tweets under each seed keyword/window
    folded = [(tw, tw.text.casefold()) for tw in result.tweets]
    topics: list[TopicDataset] = []
    for st in cfg.seed_topics:
        seed_cf = st.keyword.casefold()
        w0 = st.window_start
        w1 = st.window_start + cfg.window_ms
        group = [tw for tw, text in folded if seed_cf in text and w0 <= tw.created_at <= w1]
        subs = mine_subkeywords(
            group,
            st.keyword,
            cfg.subkeyword_k,
            default_tokenizer,
            stopwords,
            cfg.min_token_len,
        )
        for sub, _freq in subs:
            topics.append(slice_topic(group, st.keyword, sub, w0, w1, st.genre))
    out = Path(cfg.output_dir) / "topics"
    manifest = write_topics(topics, out)
    print(
        f"ingest: {len(result.tweets)} tweets ({result.malformed} malformed), "
        f"{len(topics)} topics -> {manifest}"
    )
    return EXIT_OK


# --- score -------------------------------------------------------------------


def _score_one(args):
    topic, cfg_dict = args
    cfg = RunConfig.from_dict(cfg_dict)
    network = build_network(topic)
    if not viable(network, cfg.min_nodes, cfg.min_edges):
        return None
    seed = derive_seed(cfg.seed, "score", topic.topic_id)
    res = from_params(network, cfg.polarization, cfg.partition, seed)
    return [
        topic.topic_id,
        network.node_count,
        network.edge_count,
        res.phi,
        res.null_mean,
        res.null_std,
        res.phi_hat,
        res.is_polarized,
        seed,
    ]


def _parallel_map(fn, items, jobs):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=1))


def cmd_score(cfg: RunConfig) -> int:
    topics = read_topics(Path(cfg.output_dir) / "topics")
    rows = _parallel_map(_score_one, [(t, cfg.to_dict()) for t in topics], cfg.jobs)
    kept = [r for r in rows if r is not None]
    skipped = len(rows) - len(kept)
    write_csv(Path(cfg.output_dir) / "scores.csv", SCORE_COLUMNS, kept, cfg.config_hash())

    edges = np.arange(-1.0, 1.0 + 1e-9, 0.02)
    counts = np.histogram([float(r[6]) for r in kept], bins=edges)[0] if kept else np.zeros(len(edges) - 1, dtype=int)
    hist_rows = [
        [round(edges[i], 2), round(edges[i + 1], 2), int(counts[i])]
        for i in range(len(counts))
    ]
    write_csv(
        Path(cfg.output_dir) / "histogram.csv",
        ["bin_left", "bin_right", "count"],
        hist_rows,
        cfg.config_hash(),
    )
    if skipped:
        print(f"score: skipped {skipped} non-viable networks")
    print(f"score: wrote {len(kept)} rows")
    if not kept:
        print("score: warning: no viable networks", file=sys.stderr)
    return EXIT_OK


# --- characterize ------------------------------------------------------------


def cmd_characterize(cfg: RunConfig) -> int:
    topics = {t.topic_id: t for t in read_topics(Path(cfg.output_dir) / "topics")}
    _, score_rows = read_csv(Path(cfg.output_dir) / "scores.csv")
    feat_rows = []
    genre_acc: dict[str, list[int]] = {}
    for row in score_rows:
        topic = topics[row["topic_id"]]
        network = build_network(topic)
        tf = feats.assemble_features(topic, network, stats(network))
        feat_rows.append(feats.table_row(topic.topic_id, tf))
        acc = genre_acc.setdefault(topic.genre, [0, 0])
        acc[0] += 1
        acc[1] += 1 if row["is_polarized"] == "true" else 0
    write_csv(
        Path(cfg.output_dir) / "features.csv",
        feats.TABLE_COLUMNS,
        feat_rows,
        cfg.config_hash(),
    )
    genre_rows = [
        [g, n, p, p / n] for g, (n, p) in sorted(genre_acc.items()) if n > 0
    ]
    write_csv(
        Path(cfg.output_dir) / "genre_polarization.csv",
        ["genre", "n_topics", "n_polarized", "polarized_ratio"],
        genre_rows,
        cfg.config_hash(),
    )
    print(f"characterize: wrote {len(feat_rows)} feature rows")
    return EXIT_OK


# --- evaluate ----------------------------------------------------------------


def subset_features(subset: TopicDataset) -> feats.TopicFeatures:
    """Features of a sampled subset; empty networks yield size 0."""
    network = build_network(subset)
    if network.node_count:
        st = stats(network)
        size, degree = st.node_count, st.average_degree
    else:
        size, degree = 0, 0.0
    url_ratio, hashtag_ratio = feats.url_hashtag_ratios(subset)
    return feats.TopicFeatures(
        genre=subset.genre,
        network_size=size,
        average_degree=degree,
        url_ratio=url_ratio,
        hashtag_ratio=hashtag_ratio,
        vocal_minority_index=feats.vocal_minority(subset),
        tweet_count=subset.tweet_count,
    )


def _naive_task(args):
    topic, k, trial, cfg_dict = args
    cfg = RunConfig.from_dict(cfg_dict)
    spec = sampler.SampleSpec(
        k=k, m=cfg.sampling.m, rng_seed=sampler.sample_seed(cfg.seed, k, trial, topic.topic_id)
    )
    subset = sampler.draw_sample(topic, spec)
    level = sampler.hour_level(subset) if subset.tweet_count else None
    res = sampler.naive_estimate(
        subset,
        cfg.polarization,
        cfg.partition,
        cfg.min_nodes,
        cfg.min_edges,
        derive_seed(cfg.seed, "naive", k, trial, topic.topic_id),
    )
    return topic.topic_id, k, trial, level, None if res is None else res.phi_hat


def _read_truth(cfg: RunConfig) -> dict[str, float]:
    _, score_rows = read_csv(Path(cfg.output_dir) / "scores.csv")
    return {r["topic_id"]: float(r["phi_hat"]) for r in score_rows}


def naive_observations(cfg: RunConfig, topics, truth, k_values) -> list[sampler.Observation]:
    tasks = [
        (topic, k, trial, cfg.to_dict())
        for k in k_values
        for trial in range(cfg.sampling.trials)
        for topic in topics
    ]
    raw = _parallel_map(_naive_task, tasks, cfg.jobs)
    return [
        sampler.Observation(
            topic_id=tid, k=k, trial=trial, hour_level=level, estimate=est, truth=truth[tid]
        )
        for tid, k, trial, level, est in raw
    ]


def ml_observations(cfg: RunConfig, topics, truth, k_values) -> list[sampler.Observation]:
    """Out-of-fold forest predictions from subset features, per k.

    Folds are grouped by topic so the repeated trials of one topic never
    appear on both sides of a fold split.
    """
    obs: list[sampler.Observation] = []
    for k in k_values:
        rows = []
        for trial in range(cfg.sampling.trials):
            for topic in topics:
                spec = sampler.SampleSpec(
                    k=k,
                    m=cfg.sampling.m,
                    rng_seed=sampler.sample_seed(cfg.seed, k, trial, topic.topic_id),
                )
                subset = sampler.draw_sample(topic, spec)
                if subset.tweet_count == 0:
                    obs.append(
                        sampler.Observation(
                            topic_id=topic.topic_id,
                            k=k,
                            trial=trial,
                            hour_level=None,
                            estimate=None,
                            truth=truth[topic.topic_id],
                        )
                    )
                    continue
                rows.append(
                    (
                        topic.topic_id,
                        trial,
                        sampler.hour_level(subset),
                        feats.to_vector(subset_features(subset), cfg.forest),
                    )
                )
        if not rows:
            continue
        x = np.array([r[3] for r in rows])
        y = np.array([truth[r[0]] for r in rows])
        groups = [r[0] for r in rows]
        cv = forest.cross_validate(
            x,
            y,
            folds=10,
            params=cfg.forest,
            rng_seed=derive_seed(cfg.seed, "ml-eval", k),
            threshold=cfg.polarization.threshold,
            groups=groups,
        )
        for (tid, trial, level, _), pred in zip(rows, cv.oof_predictions):
            obs.append(
                sampler.Observation(
                    topic_id=tid,
                    k=k,
                    trial=trial,
                    hour_level=level,
                    estimate=float(pred),
                    truth=truth[tid],
                )
            )
    return obs


def write_eval_outputs(cfg: RunConfig, mode: str, report: sampler.EvalReport, k_values) -> None:
    out = Path(cfg.output_dir)
    level_cols = [f"hour_{h}" for h in range(sampler.HOUR_LEVELS)]
    for metric in ("precision", "recall", "counts"):
        rows = []
        for k in k_values:
            row = [k]
            for h in range(sampler.HOUR_LEVELS):
                cell = report.cell(k, h)
                if cell is None:
                    row.append(None)
                elif metric == "precision":
                    row.append(cell.precision)
                elif metric == "recall":
                    row.append(cell.recall)
                else:
                    row.append(cell.n_topics)
            rows.append(row)
        write_csv(
            out / f"eval_{mode}_{metric}.csv", ["k"] + level_cols, rows, cfg.config_hash()
        )
    write_csv(
        out / f"eval_{mode}_summary.csv",
        ["k", "n_observations", "n_not_estimable", "precision", "recall", "f_score", "r2"],
        [
            [s.k, s.n_observations, s.n_not_estimable, s.precision, s.recall, s.f_score, s.r2]
            for s in report.summaries
        ],
        cfg.config_hash(),
    )
    write_csv(
        out / f"eval_{mode}_scatter.csv",
        ["k", "trial", "topic_id", "estimate", "truth"],
        [
            [o.k, o.trial, o.topic_id, o.estimate, o.truth]
            for o in report.observations
        ],
        cfg.config_hash(),
    )


def cmd_evaluate(cfg: RunConfig, mode: str) -> int:
    topics = read_topics(Path(cfg.output_dir) / "topics")
    truth = _read_truth(cfg)
    topics = [t for t in topics if t.topic_id in truth]
    k_values = cfg.sampling.k_values
    if mode == "naive":
        obs = naive_observations(cfg, topics, truth, k_values)
    elif mode == "ml":
        obs = ml_observations(cfg, topics, truth, k_values)
    elif mode == "oracle":
        obs = sampler.collect_observations(
            topics,
            truth,
            lambda subset, k, trial: truth[subset.topic_id],
            k_values,
            cfg.sampling.trials,
            cfg.sampling.m,
            cfg.seed,
        )
    else:
        raise ConfigError(f"unknown evaluate mode {mode!r}")
    report = sampler.aggregate(
        obs, cfg.polarization.threshold, k_values, cfg.sampling.trials
    )
    write_eval_outputs(cfg, mode, report, k_values)
    for s in report.summaries:
        print(
            f"evaluate[{mode}] k={s.k}: precision={s.precision} recall={s.recall} "
            f"f={s.f_score} r2={s.r2}"
        )
    return EXIT_OK


# --- train / predict ---------------------------------------------------------


def _features_from_row(row: dict) -> feats.TopicFeatures:
    from .ingest import GENRES

    genre = next((g for g in GENRES if row[f"genre_{g}"] == "1"), None)
    if genre is None:
        raise ConfigError(f"feature row {row.get('topic_id')} has no active genre")
    naive = row.get("naive_phi_hat", "")
    return feats.TopicFeatures(
        genre=genre,
        network_size=int(row["network_size"]),
        average_degree=float(row["average_degree"]),
        url_ratio=float(row["url_ratio"]),
        hashtag_ratio=float(row["hashtag_ratio"]),
        vocal_minority_index=float(row["vocal_minority_index"]),
        tweet_count=int(row["tweet_count"]),
        naive_phi_hat=parse_cell(naive),
    )


def cmd_train(cfg: RunConfig) -> int:
    _, feat_rows = read_csv(Path(cfg.output_dir) / "features.csv")
    truth = _read_truth(cfg)
    rows = [
        (_features_from_row(r), truth[r["topic_id"]])
        for r in feat_rows
        if r["topic_id"] in truth
    ]
    model = forest.fit(rows, cfg.forest, derive_seed(cfg.seed, "train"))
    path = Path(cfg.output_dir) / "model.json"
    path.write_text(model.to_json(), encoding="utf-8")
    print(f"train: {len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_predict(cfg: RunConfig, model_path: str, features_path: str, out_path: str) -> int:
    model = forest.ForestModel.from_json(Path(model_path).read_text(encoding="utf-8"))
    _, feat_rows = read_csv(features_path)
    rows = []
    for r in feat_rows:
        tf = _features_from_row(r)
        pred = forest.predict(model, tf)
        rows.append([r["topic_id"], pred, pred > cfg.polarization.threshold])
    write_csv(out_path, ["topic_id", "prediction", "is_polarized"], rows, cfg.config_hash())
    print(f"predict: wrote {len(rows)} predictions -> {out_path}")
    return EXIT_OK


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarscope",
        description="Short-term retweet-network polarization pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "score", "characterize", "evaluate", "train", "predict"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers")
        if name == "evaluate":
            p.add_argument("--mode", choices=["naive", "ml", "oracle"], default="naive")
        if name == "predict":
            p.add_argument("--model", required=True)
            p.add_argument("--features", required=True)
            p.add_argument("--out", required=True)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.command == "ingest":
        return cmd_ingest(cfg)
    if args.command == "score":
        return cmd_score(cfg)
    if args.command == "characterize":
        return cmd_characterize(cfg)
    if args.command == "evaluate":
        return cmd_evaluate(cfg, args.mode)
    if args.command == "train":
        return cmd_train(cfg)
    if args.command == "predict":
        return cmd_predict(cfg, args.model, args.features, args.out)
    raise ConfigError(f"unknown command {args.command}")


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ConfigError, SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PolarscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
