import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftgcl.errors import InvalidArgument, NotFound, SchemaError
from ftgcl.evaluate import edge_homophily
from ftgcl.graph import Dataset, Graph, barbell, erdos_renyi, load_dataset, planted_partition, save_dataset


def write_dir(path, header, edges, features, labels=None):
    path.mkdir(exist_ok=True)
    (path / "edges.tsv").write_text(header + "\n" + "".join(f"{s}\t{t}\n" for s, t in edges))
    (path / "features.csv").write_text("".join(",".join(map(str, r)) + "\n" for r in features))
    if labels is not None:
        (path / "labels.txt").write_text("".join(f"{y}\n" for y in labels))
    return path


def test_undirected_load_is_symmetrized(tmp_path):
    ds = load_dataset(write_dir(tmp_path / "d", "undirected", [(0, 1)], [[1.0], [2.0]]))
    assert ds.graph.in_neighbors(0).tolist() == [1]
    assert ds.graph.out_neighbors(1).tolist() == [0]


def test_directed_load_keeps_orientation(tmp_path):
    ds = load_dataset(write_dir(tmp_path / "d", "directed", [(0, 1)], [[1.0], [2.0]]))
    assert ds.graph.out_neighbors(0).tolist() == [1]
    assert ds.graph.out_neighbors(1).tolist() == []


def test_feature_row_mismatch_is_schema_error(tmp_path):
    d = write_dir(tmp_path / "d", "undirected", [(0, 1)], [[1.0], [2.0], [3.0]], labels=[0, 1])
    with pytest.raises(SchemaError):
        load_dataset(d)


def test_out_of_range_edge_is_schema_error(tmp_path):
    with pytest.raises(SchemaError):
        load_dataset(write_dir(tmp_path / "d", "undirected", [(0, 5)], [[1.0], [2.0]]))


def test_missing_file_is_not_found(tmp_path):
    (tmp_path / "d").mkdir()
    with pytest.raises(NotFound):
        load_dataset(tmp_path / "d")


def test_bad_header_is_schema_error(tmp_path):
    with pytest.raises(SchemaError):
        load_dataset(write_dir(tmp_path / "d", "mixed", [(0, 1)], [[1.0], [2.0]]))


def test_path_round_trip_matches_in_memory(tmp_path):
    edges = [(0, 1), (1, 2), (2, 3), (3, 4)]
    X = np.arange(10, dtype=float).reshape(5, 2) / 7
    ref = Dataset(Graph.from_edges(5, edges), X, np.array([0, 0, 1, 1, 0]), {"train": [0, 1], "test": [3]})
    save_dataset(ref, tmp_path / "d")
    back = load_dataset(tmp_path / "d")
    assert back.graph == ref.graph
    np.testing.assert_array_equal(back.features, ref.features)
    np.testing.assert_array_equal(back.labels, ref.labels)
    assert {k: v.tolist() for k, v in back.splits.items()} == {"train": [0, 1], "test": [3]}


def test_save_of_load_is_fixed_point(tmp_path):
    ds = planted_partition(2, 5, 0.6, 0.1, 3, 0.3, seed=1)
    save_dataset(ds, tmp_path / "a")
    once = load_dataset(tmp_path / "a")
    save_dataset(once, tmp_path / "b")
    for name in ("edges.tsv", "features.csv", "labels.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_self_loops_dropped_and_duplicates_collapsed(caplog):
    g = Graph(3, [0, 0, 1, 2], [0, 1, 0, 1], directed=False)
    assert "self-loop" in caplog.text and "duplicate" in caplog.text
    assert g.num_edges == 2
    assert g.out_neighbors(0).tolist() == [1]


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 15), seed=st.integers(0, 10_000), directed=st.booleans())
def test_graph_invariants(n, seed, directed):
    rng = np.random.default_rng(seed)
    m = rng.integers(0, 3 * n + 1)
    src, dst = rng.integers(0, n, m), rng.integers(0, n, m)
    g = Graph(n, src, dst, directed)
    for v in range(n):
        out = g.out_neighbors(v)
        assert np.all((out >= 0) & (out < n))
        assert np.all(np.diff(out) > 0)  # sorted, no duplicates
        assert v not in out.tolist()
        if not directed:
            assert out.tolist() == g.in_neighbors(v).tolist()
            for u in out.tolist():
                assert v in g.out_neighbors(u).tolist()


def test_barbell_counts():
    g = barbell(6, 2)
    assert g.n == 14 and g.num_edges == 2 * 15 + 3
    g = barbell(3, 0)
    assert g.n == 6 and g.num_edges == 7
    with pytest.raises(InvalidArgument):
        barbell(2, 0)


def test_barbell_explicit_edges():
    expect = {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)}
    assert {tuple(e) for e in barbell(3, 0).edges().tolist()} == expect


def test_planted_partition_examples():
    ds = planted_partition(2, 3, 1.0, 0.0, 2, 0.0, seed=0)
    assert ds.graph.num_edges == 6
    assert edge_homophily(ds.graph, ds.labels) == 1.0
    ds = planted_partition(3, 4, 0.5, 0.1, 5, 0.0, seed=3)
    for c in range(3):
        rows = ds.features[ds.labels == c]
        assert np.all(rows == rows[0])
    a = planted_partition(3, 10, 0.4, 0.05, 6, 1.0, seed=7)
    b = planted_partition(3, 10, 0.4, 0.05, 6, 1.0, seed=7)
    assert a.graph == b.graph
    np.testing.assert_array_equal(a.features, b.features)
    with pytest.raises(InvalidArgument):
        planted_partition(2, 3, 0.1, 0.2, 2, 0.0)


def test_planted_partition_intra_degree_within_binomial_bounds():
    per_class, p_in = 30, 0.2
    degs = []
    for seed in range(20):
        ds = planted_partition(2, per_class, p_in, 0.0, 2, 0.0, seed=seed)
        degs.append(ds.graph.out_degree().mean())
    # mean of 60*20 correlated degrees; sd bound from the edge count binomial
    mean_deg = np.mean(degs)
    expect = (per_class - 1) * p_in
    pairs = 2 * 20 * per_class * (per_class - 1) / 2
    sd = 2 * np.sqrt(pairs * p_in * (1 - p_in)) / (2 * per_class * 20)
    assert abs(mean_deg - expect) <= 5 * sd


def test_dataset_validation():
    g = erdos_renyi(4, 0.5, seed=0)
    with pytest.raises(SchemaError):
        Dataset(g, np.zeros((3, 2)))
    with pytest.raises(SchemaError):
        Dataset(g, np.zeros((4, 2)), splits={"a": [0, 1], "b": [1]})
    with pytest.raises(SchemaError):
        Dataset(g, np.zeros((4, 2)), splits={"a": [4]})


def test_permute_relabels_edges():
    g = barbell(3, 1)
    perm = np.random.default_rng(0).permutation(g.n)
    h = g.permute(perm)
    old = {tuple(sorted((perm[s], perm[t]))) for s, t in g.edges().tolist()}
    assert old == {tuple(e) for e in h.edges().tolist()}
