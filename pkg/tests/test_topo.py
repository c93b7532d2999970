import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftgcl.errors import InvalidArgument
from ftgcl.graph import Graph, barbell, erdos_renyi
from ftgcl.topo import (
    WLTable,
    WlHistogram,
    egonet,
    egonets,
    kernel_matrix,
    nystrom_embed,
    sample_walk_subgraph,
    structural_embedding,
    walk_subgraphs,
    wl_histogram,
    wl_kernel,
)


def sub(n, edges):
    return Graph.from_edges(n, edges).induced(range(n))


P3 = sub(3, [(0, 1), (1, 2)])
S3 = sub(4, [(0, 1), (0, 2), (0, 3)])


def canonical(graph):
    """Brute-force canonical adjacency: lexicographically smallest over all relabelings."""
    A = np.zeros((graph.n, graph.n), dtype=np.int8)
    e = graph.arcs()
    A[e[:, 0], e[:, 1]] = 1
    best = None
    for perm in itertools.permutations(range(graph.n)):
        key = A[np.ix_(perm, perm)].tobytes()
        if best is None or key < best:
            best = key
    return graph.n, best


def test_single_node_relabel_chain():
    h = wl_histogram(sub(1, []), t=2, table=WLTable())
    assert sorted(h.counts.values()) == [1, 1, 1]


def test_p3_s3_hand_values():
    # iteration 0: (3) vs (4); iteration 1: (deg1:2, deg2:1) vs (deg1:3, deg3:1)
    table = WLTable()
    hp, hs = wl_histogram(P3, 1, table), wl_histogram(S3, 1, table)
    assert wl_kernel(hp, hp) == 14
    assert wl_kernel(hp, hs) == 18
    assert wl_kernel(hs, hs) == 26


def test_kernel_self_is_squared_norm_and_disjoint_is_zero():
    table = WLTable()
    h = wl_histogram(S3, 2, table)
    assert wl_kernel(h, h) == sum(c * c for c in h.counts.values())
    assert wl_kernel(WlHistogram({0: 2, 1: 1}, 7, 3, 1), WlHistogram({2: 4}, 7, 4, 1)) == 0


def test_kernel_rejects_mixed_tables():
    with pytest.raises(InvalidArgument):
        wl_kernel(wl_histogram(P3, 1, WLTable()), wl_histogram(P3, 1, WLTable()))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 9))
def test_histogram_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    g = erdos_renyi(n, 0.4, seed=seed)
    perm = rng.permutation(n)
    table = WLTable()
    a = wl_histogram(g.induced(range(n)), 3, table)
    b = wl_histogram(g.permute(perm).induced(range(n)), 3, table)
    assert a.counts == b.counts


def test_isolated_walk_is_singleton():
    g = Graph(3, [1], [2], directed=False)
    s = sample_walk_subgraph(g, 0, 5, 4, rng=0)
    assert s.nodes.tolist() == [0] and s.graph.num_edges == 0


def test_walk_closure_on_triangle():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    s = sample_walk_subgraph(g, 0, 30, 10, rng=1)
    assert set(s.nodes.tolist()) <= {0, 1, 2}
    assert s.nodes.tolist() == [0, 1, 2]


def test_single_step_walk_on_path():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    s = sample_walk_subgraph(g, 0, 1, 1, rng=0)
    assert s.nodes.tolist() == [0, 1] and s.graph.num_edges == 1


def test_walks_follow_orientation():
    g = Graph(3, [1, 2], [0, 0], directed=True)  # node 0 is a sink
    assert sample_walk_subgraph(g, 0, 10, 5, rng=0).nodes.tolist() == [0]


def test_walk_subgraphs_use_per_node_streams():
    g = erdos_renyi(12, 0.3, seed=2)
    ss = np.random.SeedSequence(5)
    batch = walk_subgraphs(g, 4, 3, np.random.SeedSequence(5))
    for i, child in enumerate(ss.spawn(g.n)):
        single = sample_walk_subgraph(g, i, 4, 3, rng=np.random.default_rng(child))
        assert single.nodes.tolist() == batch[i].nodes.tolist()


def test_egonet_examples():
    star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    assert egonet(star, 0).nodes.tolist() == [0, 1, 2, 3, 4]
    path = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    e = egonet(path, 0)
    assert e.nodes.tolist() == [0, 1] and e.graph.num_edges == 1
    e = egonet(barbell(6, 2), 0)
    assert e.nodes.tolist() == list(range(6)) and e.graph.num_edges == 15


def test_kernel_matrix_psd_over_walk_subgraphs():
    g = erdos_renyi(30, 0.15, seed=4)
    K = kernel_matrix([wl_histogram(s, 3, table) for table in [WLTable()] for s in walk_subgraphs(g, 10, 5, 0)])
    np.testing.assert_array_equal(K, K.T)
    w = np.linalg.eigvalsh(K)
    assert w.min() >= -1e-8 * w.max()


def test_nystrom_exact_at_full_basis():
    g = erdos_renyi(20, 0.2, seed=1)
    subs = egonets(g)
    table = WLTable()
    K = kernel_matrix([wl_histogram(s, 3, table) for s in subs])
    emb = nystrom_embed(subs, g.n, 3, rng=0)
    assert np.linalg.norm(emb.R @ emb.R.T - K) / np.linalg.norm(K) <= 1e-6


def test_nystrom_rejects_oversized_basis():
    with pytest.raises(InvalidArgument):
        nystrom_embed(egonets(barbell(3, 0)), 7)


def test_nystrom_deterministic():
    g = erdos_renyi(15, 0.3, seed=3)
    a = nystrom_embed(egonets(g), 8, rng=11)
    b = nystrom_embed(egonets(g), 8, rng=11)
    np.testing.assert_array_equal(a.R, b.R)
    np.testing.assert_array_equal(a.basis, b.basis)


def test_barbell_roles_from_isomorphism_oracle():
    g = barbell(6, 2)
    subs = egonets(g)
    classes = {}
    for v, s in enumerate(subs):
        classes.setdefault(canonical(s.graph), []).append(v)
    roles = sorted(classes.values())
    assert roles == [[0, 1, 2, 3, 4, 9, 10, 11, 12, 13], [5, 8], [6, 7]]
    start = time.perf_counter()
    R = nystrom_embed(subs, g.n, 2, rng=0).R
    assert time.perf_counter() - start < 5
    for members in roles:
        for u, v in itertools.combinations(members, 2):
            assert np.array_equal(R[u], R[v])
            cos = R[u] @ R[v] / (np.linalg.norm(R[u]) * np.linalg.norm(R[v]))
            assert abs(cos - 1) <= 1e-9
    reps = [m[0] for m in roles]
    for u, v in itertools.combinations(reps, 2):
        cos = R[u] @ R[v] / (np.linalg.norm(R[u]) * np.linalg.norm(R[v]))
        assert 1 - cos > 1e-3


def test_structural_embedding_caps_basis_and_is_seeded():
    g = erdos_renyi(10, 0.3, seed=0)
    a = structural_embedding(g, m=50, t=2, gamma=3, walk_len=3, seed=4)
    b = structural_embedding(g, m=50, t=2, gamma=3, walk_len=3, seed=4)
    assert a.m == 10 and a.R.shape[0] == 10
    np.testing.assert_array_equal(a.R, b.R)
    with pytest.raises(InvalidArgument):
        structural_embedding(g, extractor="bfs")
