"""Low-resource sampling protocol, naive estimation and evaluation matrices.

A sample draws k random time points in the topic window and collects the m
most recent tweets at each point (deduplicated union). Estimates are
binarized at the polarization threshold and aggregated into
(k x hour-level) precision/recall matrices plus overall scalars.
"""

from __future__ import annotations

import bisect as _bisect
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import PartitionParams, PolarizationParams, derive_seed
from .errors import FeatureError
from .graph import build_network, viable
from .ingest import TopicDataset
from .model import binary_metrics, r2_score
from .polarization import PolarizationResult, from_params

HOUR_LEVELS = 12


@dataclass(frozen=True)
class SampleSpec:
    k: int
    m: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be >= 1")


def sample_at(dataset: TopicDataset, points, m: int) -> TopicDataset:
    """At each time point take the m most recent tweets; union-deduped."""
    times = [tw.created_at for tw in dataset.tweets]
    picked: dict[str, object] = {}
    for point in points:
        hi = _bisect.bisect_right(times, int(point))
        for tw in dataset.tweets[max(0, hi - m) : hi]:
            picked[tw.id] = tw
    return dataset.with_tweets(picked.values())


def draw_sample(dataset: TopicDataset, spec: SampleSpec) -> TopicDataset:
    """k uniform time points, m most recent tweets at each, union-deduped."""
    rng = np.random.default_rng(spec.rng_seed)
    points = rng.integers(dataset.window_start, dataset.window_end + 1, size=spec.k)
    return sample_at(dataset, points, spec.m)


def hour_level(subset: TopicDataset) -> int:
    """Distinct one-hour buckets of the window touched, minus one (0..11)."""
    if subset.tweet_count == 0:
        raise FeatureError("hour level undefined for an empty subset")
    span = subset.window_end - subset.window_start
    buckets = set()
    for tw in subset.tweets:
        b = (tw.created_at - subset.window_start) * HOUR_LEVELS // span
        buckets.add(min(HOUR_LEVELS - 1, int(b)))
    return len(buckets) - 1


def naive_estimate(
    subset: TopicDataset,
    pol: PolarizationParams,
    partition_params: PartitionParams,
    min_nodes: int,
    min_edges: int,
    seed_rng: int,
) -> PolarizationResult | None:
    """Score the subset as if it were the full data; None when the subset
    network is not viable (reported as not-estimable, scored not-polarized)."""
    network = build_network(subset)
    if not viable(network, min_nodes, min_edges):
        return None
    return from_params(network, pol, partition_params, seed_rng)


# --- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    """One (topic, trial) estimate at a given k."""

    topic_id: str
    k: int
    trial: int
    hour_level: int | None  # None for empty subsets (excluded from matrices)
    estimate: float | None  # None = not estimable (scored as not polarized)
    truth: float


@dataclass(frozen=True)
class EvalCell:
    k: int
    hour_level: int
    n_topics: float  # mean per trial; rows sum to the corpus size
    precision: float | None
    recall: float | None
    f_score: float | None
    r2: float | None


@dataclass(frozen=True)
class EvalSummary:
    k: int
    n_observations: int
    n_not_estimable: int
    precision: float | None
    recall: float | None
    f_score: float | None
    r2: float | None


@dataclass
class EvalReport:
    cells: list[EvalCell]
    summaries: list[EvalSummary]
    per_trial_recall: dict[tuple[int, int], float | None]
    per_trial_precision: dict[tuple[int, int], float | None]
    observations: list[Observation]

    def cell(self, k: int, level: int) -> EvalCell | None:
        for c in self.cells:
            if c.k == k and c.hour_level == level:
                return c
        return None

    def summary(self, k: int) -> EvalSummary:
        for s in self.summaries:
            if s.k == k:
                return s
        raise KeyError(k)


# estimator(subset, k, trial) -> estimated phi_hat, or None when not estimable
Estimator = Callable[[TopicDataset, int, int], "float | None"]


def sample_seed(master_seed: int, k: int, trial: int, topic_id: str) -> int:
    return derive_seed(master_seed, "sample", k, trial, topic_id)


def collect_observations(
    topics: Sequence[TopicDataset],
    ground_truth: dict[str, float],
    estimator: Estimator,
    k_values: Sequence[int],
    trials: int,
    m: int,
    seed: int,
) -> list[Observation]:
    """Draw every (k, trial, topic) subset and run the estimator on it."""
    obs = []
    for k in k_values:
        for trial in range(trials):
            for topic in topics:
                spec = SampleSpec(k=k, m=m, rng_seed=sample_seed(seed, k, trial, topic.topic_id))
                subset = draw_sample(topic, spec)
                level = hour_level(subset) if subset.tweet_count else None
                obs.append(
                    Observation(
                        topic_id=topic.topic_id,
                        k=k,
                        trial=trial,
                        hour_level=level,
                        estimate=estimator(subset, k, trial),
                        truth=ground_truth[topic.topic_id],
                    )
                )
    return obs


def _est_value(o: Observation) -> float:
    # not-estimable subsets are scored as not polarized (estimate 0)
    return 0.0 if o.estimate is None else o.estimate


def aggregate(
    observations: Sequence[Observation],
    threshold: float,
    k_values: Sequence[int],
    trials: int,
) -> EvalReport:
    """Build the (k x hour-level) matrices and the per-k summaries."""
    cells: list[EvalCell] = []
    summaries: list[EvalSummary] = []
    per_trial_recall: dict[tuple[int, int], float | None] = {}
    per_trial_precision: dict[tuple[int, int], float | None] = {}
    for k in k_values:
        at_k = [o for o in observations if o.k == k]
        for level in range(HOUR_LEVELS):
            in_cell = [o for o in at_k if o.hour_level == level]
            if not in_cell:
                continue
            y_true = np.array([o.truth for o in in_cell])
            y_pred = np.array([_est_value(o) for o in in_cell])
            p, r, f = binary_metrics(y_true, y_pred, threshold)
            cells.append(
                EvalCell(
                    k=k,
                    hour_level=level,
                    n_topics=len(in_cell) / trials,
                    precision=p,
                    recall=r,
                    f_score=f,
                    r2=r2_score(y_true, y_pred),
                )
            )
        y_true = np.array([o.truth for o in at_k])
        y_pred = np.array([_est_value(o) for o in at_k])
        p, r, f = binary_metrics(y_true, y_pred, threshold)
        summaries.append(
            EvalSummary(
                k=k,
                n_observations=len(at_k),
                n_not_estimable=sum(1 for o in at_k if o.estimate is None),
                precision=p,
                recall=r,
                f_score=f,
                r2=r2_score(y_true, y_pred),
            )
        )
        for trial in range(trials):
            in_trial = [o for o in at_k if o.trial == trial]
            if not in_trial:
                continue
            y_true = np.array([o.truth for o in in_trial])
            y_pred = np.array([_est_value(o) for o in in_trial])
            p, r, _ = binary_metrics(y_true, y_pred, threshold)
            per_trial_recall[(k, trial)] = r
            per_trial_precision[(k, trial)] = p
    return EvalReport(
        cells=cells,
        summaries=summaries,
        per_trial_recall=per_trial_recall,
        per_trial_precision=per_trial_precision,
        observations=list(observations),
    )


def evaluate(
    topics: Sequence[TopicDataset],
    ground_truth: dict[str, float],
    estimator: Estimator,
    k_values: Sequence[int] = (10, 20, 40, 80, 160, 320),
    trials: int = 10,
    threshold: float = 0.04,
    m: int = 100,
    seed: int = 0,
) -> EvalReport:
    """Sample every topic at every (k, trial), estimate, and aggregate."""
    missing = [t.topic_id for t in topics if t.topic_id not in ground_truth]
    if missing:
        raise ValueError(f"ground truth missing for topics: {missing[:3]}")
    obs = collect_observations(topics, ground_truth, estimator, k_values, trials, m, seed)
    return aggregate(obs, threshold, k_values, trials)
