import numpy as np
import pytest

from polarscope._kernels import cut_weight, fm_refine
from polarscope.errors import ConsistencyError, PartitionError
from polarscope.graph import from_edges
from polarscope.partition import Bisection, bisect, cut_quality, symmetrize, write_partition

from conftest import random_directed_network, two_cliques


def brute_cut(network, side):
    """Independent cut recount on the symmetrized weights."""
    seen = {}
    for s, t, m in zip(network.src, network.dst, network.mult):
        key = (min(s, t), max(s, t))
        seen[key] = seen.get(key, 0) + int(m)
    return sum(w for (a, b), w in seen.items() if side[a] != side[b])


class TestBisect:
    def test_two_cliques_unique_min_cut(self):
        net = two_cliques(10)
        b = bisect(net, seed_rng=5)
        assert b.cut_weight == 1
        assert b.block_sizes == (10, 10)
        left = {net.user_ids[i] for i in range(20) if b.assignment[i] == b.assignment[0]}
        assert left in ({f"u{i}" for i in range(10)}, {f"u{i}" for i in range(10, 20)})

    def test_single_edge(self):
        b = bisect(from_edges([("A", "B")]), seed_rng=0)
        assert b.block_sizes == (1, 1)
        assert b.cut_weight == 1

    def test_too_small_raises(self):
        with pytest.raises(PartitionError):
            bisect(from_edges([]), seed_rng=0)

    def test_balance_bound_on_random_graphs(self):
        rng = np.random.default_rng(99)
        for trial in range(100):
            n = int(rng.integers(2, 120))
            m = int(rng.integers(1, max(2, 3 * n)))
            net = random_directed_network(n, min(m, n * (n - 1) // 2), rng)
            b = bisect(net, seed_rng=trial)
            n_actual = net.node_count
            assert b.balance <= 0.7 + 1.0 / n_actual + 1e-12
            assert 0 < b.block_sizes[0] < n_actual
            assert b.cut_weight == brute_cut(net, b.assignment)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        net = random_directed_network(80, 200, rng)
        b1 = bisect(net, seed_rng=17)
        b2 = bisect(net, seed_rng=17)
        assert np.array_equal(b1.assignment, b2.assignment)
        assert b1.cut_weight == b2.cut_weight

    def test_planted_two_clique_recovery_rate(self):
        """Planted structure: two 30-cliques, sparse cross edges."""
        rng = np.random.default_rng(7)
        hits = 0
        runs = 20
        for run in range(runs):
            cross = [(int(rng.integers(30)), int(rng.integers(30))) for _ in range(3)]
            net = two_cliques(30, cross_edges=tuple(cross))
            b = bisect(net, seed_rng=run)
            blocks = [b.assignment[net.index_of(f"u{i}")] for i in range(30)]
            other = [b.assignment[net.index_of(f"u{30 + i}")] for i in range(30)]
            if len(set(blocks)) == 1 and len(set(other)) == 1 and blocks[0] != other[0]:
                hits += 1
        assert hits >= runs - 1

    def test_disconnected_components_packed_whole(self):
        # 4 cliques of size 5, no cross edges: zero-cut bisection exists
        edges = []
        for c in range(4):
            for i in range(5):
                for j in range(5):
                    if i != j:
                        edges.append((f"c{c}n{i}", f"c{c}n{j}"))
        net = from_edges(edges)
        b = bisect(net, seed_rng=3)
        assert b.cut_weight == 0
        assert b.block_sizes == (10, 10)
        # components never split
        for c in range(4):
            sides = {b.assignment[net.index_of(f"c{c}n{i}")] for i in range(5)}
            assert len(sides) == 1

    def test_giant_component_with_satellites(self):
        # one 40-clique (67% of nodes) + 20 isolated-pair satellites
        edges = []
        for i in range(40):
            for j in range(40):
                if i != j:
                    edges.append((f"g{i}", f"g{j}"))
        for s in range(10):
            edges.append((f"s{s}a", f"s{s}b"))
        net = from_edges(edges)
        b = bisect(net, seed_rng=1)
        assert b.balance <= 0.7 + 1.0 / 60 + 1e-12


class TestFMInvariants:
    def test_fm_pass_never_increases_cut(self, rng):
        for trial in range(25):
            net = random_directed_network(int(rng.integers(8, 60)), int(rng.integers(8, 150)), rng)
            indptr, indices, w = symmetrize(net)
            n = net.node_count
            side = (rng.random(n) < 0.5).astype(np.int8)
            if side.sum() in (0, n):
                side[0] = 1 - side[0]
            cap = min(n - 1, (7 * n + 10) // 10)
            node_wt = np.ones(n, dtype=np.int64)
            prev = cut_weight(indptr, indices, w, side)
            for _ in range(6):
                cur = fm_refine(indptr, indices, w, node_wt, side, cap, 1)
                assert cur <= prev
                assert cur == cut_weight(indptr, indices, w, side)
                prev = cur

    def test_fm_respects_balance_every_state(self, rng):
        # cap chosen tight: every intermediate assignment must satisfy it,
        # which we can only observe at pass boundaries; run single moves by
        # limiting passes and recomputing.
        net = random_directed_network(40, 120, rng)
        indptr, indices, w = symmetrize(net)
        n = net.node_count
        cap = min(n - 1, (7 * n + 10) // 10)
        side = np.zeros(n, dtype=np.int8)
        side[: n // 2] = 1
        node_wt = np.ones(n, dtype=np.int64)
        for _ in range(8):
            fm_refine(indptr, indices, w, node_wt, side, cap, 1)
            big = max(side.sum(), n - side.sum())
            assert big <= cap


class TestCutQuality:
    def test_disconnected_two_cliques_zero(self):
        net = two_cliques(6, cross_edges=())
        b = bisect(net, seed_rng=0)
        cut, norm = cut_quality(net, b)
        assert cut == 0
        assert norm == 0.0

    def test_complete_bipartite_all_crossing(self):
        edges = [(f"a{i}", f"b{j}") for i in range(4) for j in range(4)]
        net = from_edges(edges)
        side = np.array([0 if u.startswith("a") else 1 for u in net.user_ids], dtype=np.int8)
        b = Bisection(assignment=side, block_sizes=(4, 4), cut_weight=16, balance=0.5)
        cut, norm = cut_quality(net, b)
        assert cut == 16
        assert norm == 1.0

    def test_three_community_recount(self, rng):
        edges = []
        for c in range(3):
            for i in range(6):
                for j in range(6):
                    if i != j and rng.random() < 0.8:
                        edges.append((f"c{c}n{i}", f"c{c}n{j}"))
        for _ in range(10):
            a, b_ = int(rng.integers(3)), int(rng.integers(3))
            if a != b_:
                edges.append((f"c{a}n{int(rng.integers(6))}", f"c{b_}n{int(rng.integers(6))}"))
        net = from_edges(edges)
        b = bisect(net, seed_rng=2)
        cut, _ = cut_quality(net, b)
        assert cut == brute_cut(net, b.assignment)
        assert cut == b.cut_weight

    def test_dangling_assignment_raises(self):
        net = two_cliques(4)
        b = bisect(net, seed_rng=0)
        short = Bisection(
            assignment=b.assignment[:-1],
            block_sizes=b.block_sizes,
            cut_weight=b.cut_weight,
            balance=b.balance,
        )
        with pytest.raises(ConsistencyError):
            cut_quality(net, short)


def test_write_partition(tmp_path):
    net = two_cliques(4)
    b = bisect(net, seed_rng=0)
    path = tmp_path / "part.tsv"
    write_partition(net, b, path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == net.node_count
    assert all(line.split("\t")[1] in ("A", "B") for line in lines)
