"""Adaptive E-I polarization score and its null-model normalization.

The raw score compares directed link densities within the two blocks of a
bisection against the cross-block densities. The normalized score subtracts
the mean score of degree-preserving randomized copies (each repartitioned
with the same algorithm), correcting for what size and degree distribution
alone would produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import swap_edges
from .config import PartitionParams, PolarizationParams, derive_seed
from .errors import PartitionError, UndefinedScoreError
from .graph import RetweetNetwork, degree_sequences
from .partition import Bisection, bisect


@dataclass
class PolarizationResult:
    phi: float
    null_scores: list[float]
    null_mean: float
    phi_hat: float
    is_polarized: bool
    bisection: Bisection | None = field(default=None, repr=False)

    @property
    def null_std(self) -> float:
        if not self.null_scores:
            return 0.0
        return float(np.std(self.null_scores))


def adaptive_ei(network: RetweetNetwork, bisection: Bisection) -> float:
    """Density-contrast polarization score in [-1, 1].

    Within-block density for block X is e_XX / (|X| (|X|-1)); cross-block
    density is e_XY / (|X| |Y|), all on distinct directed edges. Singleton
    blocks have within-density 0.
    """
    side = bisection.assignment
    if side.shape[0] != network.node_count:
        raise ValueError("bisection does not match network")
    n_b = int(side.sum())
    n_a = network.node_count - n_b
    if n_a == 0 or n_b == 0:
        raise ValueError("both blocks must be non-empty")
    pair_class = side[network.src] * 2 + side[network.dst]
    counts = np.bincount(pair_class, minlength=4)
    e_aa, e_ab, e_ba, e_bb = (int(c) for c in counts)
    sigma_aa = e_aa / (n_a * (n_a - 1)) if n_a > 1 else 0.0
    sigma_bb = e_bb / (n_b * (n_b - 1)) if n_b > 1 else 0.0
    sigma_ab = e_ab / (n_a * n_b)
    sigma_ba = e_ba / (n_a * n_b)
    denom = sigma_aa + sigma_bb + sigma_ab + sigma_ba
    if denom == 0.0:
        raise UndefinedScoreError("all four block densities are zero")
    return (sigma_aa + sigma_bb - sigma_ab - sigma_ba) / denom


def rewire_null(
    network: RetweetNetwork,
    seed_rng: int = 0,
    swap_passes: int = 10,
    joint_degree: bool = False,
) -> RetweetNetwork:
    """Degree-preserving randomization by directed double-edge swaps.

    Attempts ``swap_passes * |E|`` swaps on distinct-pair edges; in- and
    out-degrees of every node are preserved exactly and multiplicities
    reset to 1. Graphs where no swap is ever valid come back as an
    identical copy with ``rewire_swaps == 0``.
    """
    n = network.node_count
    src = network.src.copy()
    dst = network.dst.copy()
    n_edges = src.shape[0]
    if n_edges < 2:
        return RetweetNetwork(
            user_ids=list(network.user_ids),
            src=src,
            dst=dst,
            mult=np.ones(n_edges, dtype=np.int64),
            topic_ref=network.topic_ref,
            rewire_swaps=0,
        )
    rng = np.random.default_rng(seed_rng)
    attempts = swap_passes * n_edges
    ei = rng.integers(0, n_edges, size=attempts)
    ej = rng.integers(0, n_edges, size=attempts)
    if joint_degree:
        out_deg, in_deg = degree_sequences(network)
        # class id per node: nodes are swap-compatible iff same (in, out)
        keys = in_deg.astype(np.int64) * (out_deg.max() + 1) + out_deg
        _, cls = np.unique(keys, return_inverse=True)
        cls = cls.astype(np.int64)
    else:
        cls = np.zeros(n, dtype=np.int64)
    swaps = int(swap_edges(src, dst, n, ei, ej, cls, joint_degree))
    return RetweetNetwork(
        user_ids=list(network.user_ids),
        src=src,
        dst=dst,
        mult=np.ones(n_edges, dtype=np.int64),
        topic_ref=network.topic_ref,
        rewire_swaps=swaps,
    )


def normalized_score(
    network: RetweetNetwork,
    samples: int = 50,
    threshold: float = 0.04,
    seed_rng: int = 0,
    partition_params: PartitionParams | None = None,
    swap_passes: int = 10,
    joint_degree: bool = False,
) -> PolarizationResult:
    """Bisect, score, and normalize against repartitioned null samples.

    Deterministic given ``seed_rng``: every rewiring and repartitioning
    seed is derived positionally, so parallel execution of the null
    samples cannot change the result. ``samples=0`` degenerates to
    ``phi_hat == phi``.
    """
    partition_params = partition_params or PartitionParams()
    # Null copies carry multiplicity 1, so the original is partitioned on
    # distinct pairs as well: the normalization is only unbiased when the
    # original and the randomized copies go through the *identical*
    # partitioning treatment (repeat-retweet weights would otherwise shift
    # the original's score against the nulls on swap-invariant structures).
    stripped = RetweetNetwork(
        user_ids=network.user_ids,
        src=network.src,
        dst=network.dst,
        mult=np.ones(network.edge_count, dtype=np.int64),
        topic_ref=network.topic_ref,
    )
    base = bisect(stripped, derive_seed(seed_rng, "base-partition"), partition_params)
    phi = adaptive_ei(network, base)
    null_scores: list[float] = []
    for s in range(samples):
        rewired = rewire_null(
            network,
            seed_rng=derive_seed(seed_rng, "rewire", s),
            swap_passes=swap_passes,
            joint_degree=joint_degree,
        )
        try:
            null_bisection = bisect(
                rewired, derive_seed(seed_rng, "null-partition", s), partition_params
            )
        except PartitionError:
            # degrees are preserved, so this cannot trigger for viable input
            raise
        null_scores.append(adaptive_ei(rewired, null_bisection))
    null_mean = float(np.mean(null_scores)) if null_scores else 0.0
    phi_hat = phi - null_mean
    return PolarizationResult(
        phi=phi,
        null_scores=null_scores,
        null_mean=null_mean,
        phi_hat=phi_hat,
        is_polarized=phi_hat > threshold,
        bisection=base,
    )


def from_params(
    network: RetweetNetwork,
    pol: PolarizationParams,
    partition_params: PartitionParams,
    seed_rng: int,
) -> PolarizationResult:
    """normalized_score() driven by config dataclasses."""
    return normalized_score(
        network,
        samples=pol.null_samples,
        threshold=pol.threshold,
        seed_rng=seed_rng,
        partition_params=partition_params,
        swap_passes=pol.swap_passes,
        joint_degree=pol.joint_degree,
    )
