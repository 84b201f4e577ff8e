"""Random-forest regressor (from-scratch CART) for polarization prediction.

Trees split on variance reduction over a random feature subset per node;
the forest averages tree predictions. Everything is deterministic for a
fixed seed, including the serialized model bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ForestParams, derive_seed
from .errors import PredictionError, TrainingError
from .features import TopicFeatures, feature_schema, to_vector

MODEL_FORMAT = "polarscope-forest"
MODEL_VERSION = 1


@dataclass
class RegressionTree:
    """CART regression tree in flat-array form.

    ``feature[i] < 0`` marks a leaf with prediction ``value[i]``; internal
    nodes send ``x[feature] <= threshold`` left, else right.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict_one(self, x: np.ndarray) -> float:
        i = 0
        while self.feature[i] >= 0:
            if x[self.feature[i]] <= self.threshold[i]:
                i = self.left[i]
            else:
                i = self.right[i]
        return float(self.value[i])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(row) for row in x])


def _best_split(x_col: np.ndarray, y: np.ndarray, min_leaf: int):
    """Exhaustive best split of one feature by SSE reduction.

    Returns (sse_after, threshold) or None when no split satisfies the
    leaf-size constraint or none strictly reduces the SSE.
    """
    order = np.argsort(x_col, kind="stable")
    xs = x_col[order]
    ys = y[order]
    n = ys.shape[0]
    csum = np.cumsum(ys)
    csq = np.cumsum(ys * ys)
    total_sum = csum[-1]
    total_sq = csq[-1]
    # candidate split after position i (1-based prefix length)
    sizes = np.arange(1, n)
    valid = (sizes >= min_leaf) & ((n - sizes) >= min_leaf) & (xs[:-1] < xs[1:])
    if not np.any(valid):
        return None
    lsum = csum[:-1]
    lsq = csq[:-1]
    sse_l = lsq - lsum * lsum / sizes
    rsum = total_sum - lsum
    rsq = total_sq - lsq
    sse_r = rsq - rsum * rsum / (n - sizes)
    sse = np.where(valid, sse_l + sse_r, np.inf)
    best = int(np.argmin(sse))
    parent_sse = total_sq - total_sum * total_sum / n
    if not sse[best] < parent_sse:
        return None
    thr = (xs[best] + xs[best + 1]) / 2.0  # midpoint of the gap
    return float(sse[best]), thr


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: int | None,
    min_leaf: int,
    mtry: int,
) -> RegressionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    p = x.shape[1]
    stack = [(new_node(), np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        value[node] = float(ys.mean())
        if idx.shape[0] < 2 * min_leaf or np.all(ys == ys[0]):
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        cand = rng.permutation(p)[:mtry]
        best = None
        for f in cand:
            res = _best_split(x[idx, f], ys, min_leaf)
            if res is None:
                continue
            if best is None or res[0] < best[0]:
                best = (res[0], int(f), res[1])
        if best is None:
            continue
        _, f, thr = best
        go_left = x[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        l_node = new_node()
        r_node = new_node()
        left[node] = l_node
        right[node] = r_node
        # push right first so the left subtree is grown first (stable layout)
        stack.append((r_node, idx[~go_left], depth + 1))
        stack.append((l_node, idx[go_left], depth + 1))
    return RegressionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
    )


@dataclass
class ForestModel:
    trees: list[RegressionTree]
    schema: list[str]
    params: ForestParams = field(default_factory=ForestParams)
    rng_seed: int = 0

    def predict_matrix(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != len(self.schema):
            raise PredictionError(
                f"expected {len(self.schema)} features, got {x.shape[1]}"
            )
        acc = np.zeros(x.shape[0])
        for tree in self.trees:
            acc += tree.predict(x)
        return acc / len(self.trees)

    def to_json(self) -> str:
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "feature_schema": self.schema,
            "rng_seed": self.rng_seed,
            "params": {
                "trees": self.params.trees,
                "min_samples_leaf": self.params.min_samples_leaf,
                "max_depth": self.params.max_depth,
                "features_per_split": self.params.features_per_split,
                "bootstrap": self.params.bootstrap,
                "include_average_degree": self.params.include_average_degree,
                "include_naive_estimate": self.params.include_naive_estimate,
            },
            "trees_data": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in self.trees
            ],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ForestModel":
        payload = json.loads(text)
        if payload.get("format") != MODEL_FORMAT:
            raise PredictionError("not a polarscope forest file")
        if payload.get("version") != MODEL_VERSION:
            raise PredictionError(f"unsupported model version {payload.get('version')}")
        params = ForestParams(**payload["params"])
        trees = [
            RegressionTree(
                feature=np.asarray(t["feature"], dtype=np.int64),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int64),
                right=np.asarray(t["right"], dtype=np.int64),
                value=np.asarray(t["value"], dtype=np.float64),
            )
            for t in payload["trees_data"]
        ]
        return cls(
            trees=trees,
            schema=list(payload["feature_schema"]),
            params=params,
            rng_seed=payload["rng_seed"],
        )


def fit_matrix(
    x: np.ndarray,
    y: np.ndarray,
    params: ForestParams | None = None,
    rng_seed: int = 0,
    schema: list[str] | None = None,
    min_rows: int = 20,
) -> ForestModel:
    """Train a forest on a prepared matrix; deterministic given rng_seed."""
    params = params or ForestParams()
    if x.shape[0] < min_rows:
        raise TrainingError(f"need >= {min_rows} rows, got {x.shape[0]}")
    if np.any(~np.isfinite(y)):
        raise TrainingError("targets contain non-finite values")
    p = x.shape[1]
    mtry = params.features_per_split or max(1, math.ceil(p / 3))
    mtry = min(mtry, p)
    trees = []
    n = x.shape[0]
    for t in range(params.trees):
        rng = np.random.default_rng(derive_seed(rng_seed, "tree", t))
        if params.bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(
            _grow_tree(x[idx], y[idx], rng, params.max_depth, params.min_samples_leaf, mtry)
        )
    return ForestModel(
        trees=trees,
        schema=schema if schema is not None else [f"f{i}" for i in range(p)],
        params=params,
        rng_seed=rng_seed,
    )


def fit(
    rows: list[tuple[TopicFeatures, float]],
    params: ForestParams | None = None,
    rng_seed: int = 0,
) -> ForestModel:
    """Train from (TopicFeatures, target phi_hat) rows."""
    params = params or ForestParams()
    schema = feature_schema(params)
    x = np.array([to_vector(f, params) for f, _ in rows]) if rows else np.empty((0, len(schema)))
    y = np.array([t for _, t in rows], dtype=np.float64)
    return fit_matrix(x, y, params, rng_seed, schema=schema)


def predict(model: ForestModel, features: TopicFeatures) -> float:
    vec = to_vector(features, model.params)
    if vec.shape[0] != len(model.schema):
        raise PredictionError(
            f"feature vector length {vec.shape[0]} does not match schema "
            f"({len(model.schema)})"
        )
    return float(model.predict_matrix(vec[None, :])[0])


# --- cross-validation --------------------------------------------------------


def r2_score(y_true: np.ndarray, y_pred: np.ndarray) -> float | None:
    if y_true.shape[0] < 2:
        return None
    ss_tot = float(((y_true - y_true.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return None
    ss_res = float(((y_true - y_pred) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def binary_metrics(
    y_true: np.ndarray, y_pred: np.ndarray, threshold: float
) -> tuple[float | None, float | None, float | None]:
    """(precision, recall, f_score) after binarizing at threshold.

    Undefined values (no positive predictions / no true positives) are
    None, never 0.
    """
    pred_pos = y_pred > threshold
    true_pos = y_true > threshold
    tp = int(np.sum(pred_pos & true_pos))
    fp = int(np.sum(pred_pos & ~true_pos))
    fn = int(np.sum(~pred_pos & true_pos))
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f_score = None
    else:
        f_score = 2 * precision * recall / (precision + recall)
    return precision, recall, f_score


@dataclass
class FoldResult:
    fold: int
    precision: float | None
    recall: float | None
    f_score: float | None
    r2: float | None


@dataclass
class CVResult:
    folds: list[FoldResult]
    pooled_precision: float | None
    pooled_recall: float | None
    pooled_f: float | None
    pooled_r2: float | None
    oof_predictions: np.ndarray  # aligned with the input rows


def fold_assignment(
    n: int,
    folds: int,
    rng_seed: int = 0,
    groups: list | None = None,
) -> np.ndarray:
    """Deterministic seeded fold labels; group-aware when groups given.

    With groups, all rows of one group land in the same fold, which keeps
    repeated samples of one topic out of each other's training sets.
    """
    rng = np.random.default_rng(derive_seed(rng_seed, "folds"))
    labels = np.empty(n, dtype=np.int64)
    if groups is None:
        perm = rng.permutation(n)
        for pos, row in enumerate(perm):
            labels[row] = pos % folds
        return labels
    uniq = sorted(set(groups))
    perm = rng.permutation(len(uniq))
    gfold = {uniq[g]: int(perm_pos % folds) for perm_pos, g in enumerate(perm)}
    for i, g in enumerate(groups):
        labels[i] = gfold[g]
    return labels


def cross_validate(
    x: np.ndarray,
    y: np.ndarray,
    folds: int = 10,
    params: ForestParams | None = None,
    rng_seed: int = 0,
    threshold: float = 0.04,
    groups: list | None = None,
    min_rows: int = 20,
) -> CVResult:
    """K-fold CV with pooled out-of-fold scoring."""
    n = x.shape[0]
    if folds > n:
        raise TrainingError(f"folds={folds} exceeds row count {n}")
    labels = fold_assignment(n, folds, rng_seed, groups)
    oof = np.full(n, np.nan)
    fold_results = []
    for f in range(folds):
        val = labels == f
        train = ~val
        if not np.any(val):
            continue
        model = fit_matrix(
            x[train], y[train], params, derive_seed(rng_seed, "cv", f), min_rows=min(min_rows, int(train.sum()))
        )
        preds = model.predict_matrix(x[val])
        oof[val] = preds
        p, r, fs = binary_metrics(y[val], preds, threshold)
        fold_results.append(
            FoldResult(fold=f, precision=p, recall=r, f_score=fs, r2=r2_score(y[val], preds))
        )
    p, r, fs = binary_metrics(y, oof, threshold)
    return CVResult(
        folds=fold_results,
        pooled_precision=p,
        pooled_recall=r,
        pooled_f=fs,
        pooled_r2=r2_score(y, oof),
        oof_predictions=oof,
    )
