import io

import numpy as np
import pytest

from linkwalk.graph import (
    EdgeListError,
    Graph,
    SplitSet,
    build_transition_operator,
    load_edge_list,
    load_graph,
    merge_validation_edges,
    save_graph,
)


def test_load_path_graph():
    g = load_edge_list(io.StringIO("0 1\n1 2\n"))
    assert g.node_count == 3
    assert list(g.degrees) == [1, 2, 1]


def test_load_merges_duplicates_and_drops_self_loops():
    g = load_edge_list(io.StringIO("0 1\n1 0\n0 0\n"))
    assert g.node_count == 2
    assert g.edge_count == 1
    assert g.has_edge(0, 1) and g.has_edge(1, 0)


def test_load_comment_and_comma_delimiters():
    g = load_edge_list(io.StringIO("# header\n0,1\n1,2\n"))
    assert g.edge_count == 2


def test_load_third_column_ignored():
    g = load_edge_list(io.StringIO("0 1 3.5\n1 2 0.25\n"))
    assert g.edge_count == 2


def test_load_one_indexed():
    g = load_edge_list(io.StringIO("1 2\n2 3\n"), one_indexed=True)
    assert g.node_count == 3 and g.has_edge(0, 1)


def test_load_errors_report_line_numbers():
    with pytest.raises(EdgeListError, match="line 2"):
        load_edge_list(io.StringIO("0 1\nbogus\n"))
    with pytest.raises(EdgeListError, match="negative"):
        load_edge_list(io.StringIO("-1 2\n"))
    with pytest.raises(EdgeListError, match="empty"):
        load_edge_list(io.StringIO(""))


def test_graph_invariants_random():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        mask = np.triu(rng.random((n, n)) < 0.3, 1)
        edges = np.argwhere(mask)
        if not len(edges):
            continue
        g = Graph.from_edges(edges, node_count=n)
        assert np.array_equal(g.degrees, np.diff(g.csr_offsets))
        for u in range(n):
            row = g.neighbors(u)
            assert np.all(np.diff(row) > 0)  # sorted, no duplicates
            assert u not in row
            for v in row:
                assert g.has_edge(v, u)  # symmetry


def test_merge_validation_edges(path3):
    splits = SplitSet([(0, 1)], [(1, 2)], [(0, 2)])
    base = Graph.from_edges(splits.train_edges, node_count=3)
    merged = merge_validation_edges(base, splits)
    assert merged.has_edge(0, 1) and merged.has_edge(1, 2)
    assert not merged.has_edge(0, 2)  # test edges never merged


def test_merge_validation_empty_is_identity():
    splits = SplitSet([(0, 1)], np.zeros((0, 2)), [(1, 2)])
    base = Graph.from_edges([(0, 1)], node_count=3)
    assert merge_validation_edges(base, splits) == base


def test_merge_validation_dedup():
    splits = SplitSet([(0, 1)], np.zeros((0, 2)), np.zeros((0, 2)))
    base = Graph.from_edges([(0, 1)], node_count=2)
    merged = merge_validation_edges(base, SplitSet([(0, 1)], np.zeros((0, 2)),
                                                   np.zeros((0, 2))))
    assert merged.edge_count == 1


def test_splitset_rejects_overlap():
    with pytest.raises(ValueError, match="more than one split"):
        SplitSet([(0, 1)], [(1, 0)], [])


def test_operator_triangle_uniform(triangle):
    op = build_transition_operator(triangle)
    dense = op.dense()
    expected = np.full((3, 3), 0.5) - 0.5 * np.eye(3)
    assert np.allclose(dense, expected, atol=1e-15)


def test_operator_path_uniform(path3):
    op = build_transition_operator(path3)
    dense = op.dense()
    assert dense[0, 1] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert dense[1, 2] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert dense[0, 2] == 0.0 and dense[0, 0] == 0.0


def test_operator_path_inverse_degree(path3):
    op = build_transition_operator(path3, "inverse-degree")
    dense = op.dense()
    # weighted adjacency row sums are 1/2, 2, 1/2
    assert dense[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert dense[1, 0] == pytest.approx(1.0, abs=1e-15)


def test_operator_inverse_log_degree_guard():
    # intermediate node of degree 1 contributes zero weight
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3)])
    op = build_transition_operator(g, "inverse-log-degree")
    dense = op.dense()
    # columns for degree-1 nodes 0 and 3 are zero-weighted
    assert dense[1, 0] == 0.0 and dense[2, 3] == 0.0
    assert dense[1, 2] > 0.0


def test_operator_symmetry_uniform_bit_exact():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 50))
        mask = np.triu(rng.random((n, n)) < 0.3, 1)
        edges = np.argwhere(mask)
        if not len(edges):
            continue
        op = build_transition_operator(Graph.from_edges(edges, node_count=n))
        dense = op.dense()
        assert np.array_equal(dense, dense.T)


def test_operator_spectral_radius_uniform():
    rng = np.random.default_rng(11)
    for _ in range(5):
        n = int(rng.integers(4, 128))
        mask = np.triu(rng.random((n, n)) < 0.2, 1)
        edges = np.argwhere(mask)
        if not len(edges):
            continue
        op = build_transition_operator(Graph.from_edges(edges, node_count=n))
        vals = np.linalg.eigvalsh(op.dense())
        assert np.max(np.abs(vals)) <= 1 + 1e-9


def test_row_stochastic_conjugacy():
    rng = np.random.default_rng(13)
    n = 40
    mask = np.triu(rng.random((n, n)) < 0.2, 1)
    g = Graph.from_edges(np.argwhere(mask), node_count=n)
    op = build_transition_operator(g)
    d = g.degrees.astype(float)
    live = d > 0
    sqrt_d = np.sqrt(d, where=live, out=np.zeros_like(d))
    inv_sqrt = np.divide(1.0, sqrt_d, where=live, out=np.zeros_like(d))
    # D^{-1/2} P D^{1/2} is the row-stochastic random-walk matrix D^{-1} A
    ones = np.where(live, 1.0, 0.0)
    out = inv_sqrt * (op.apply(sqrt_d * ones))
    assert np.allclose(out[live], 1.0, atol=1e-12)


def test_isolated_node_zero_row():
    g = Graph.from_edges([(0, 1)], node_count=3)
    op = build_transition_operator(g)
    dense = op.dense()
    assert np.all(dense[2] == 0.0) and np.all(dense[:, 2] == 0.0)


def test_serialize_roundtrip(tmp_path):
    g = Graph.from_edges([(0, 1), (1, 2), (2, 4)], node_count=6)
    path = tmp_path / "graph.bin"
    save_graph(g, path)
    g2 = load_graph(path)
    assert g2 == g
    # load-serialize-load idempotence
    path2 = tmp_path / "graph2.bin"
    save_graph(g2, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_serialize_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x00" * 32)
    with pytest.raises(ValueError, match="magic"):
        load_graph(path)


def test_relabel_edges_dense_ids():
    from linkwalk.graph import relabel_edges
    dense, idmap = relabel_edges([(31, 7), (7, 100)])
    assert idmap == {7: 0, 31: 1, 100: 2}
    assert dense.tolist() == [[1, 0], [0, 2]]
