import numpy as np
import pytest

from rbpart.graph import Hypergraph, WeightedGraph
from rbpart.io import (
    ParseError,
    load_fixed,
    load_graph,
    load_hypergraph,
    read_partition,
    save_graph,
    save_hypergraph,
    write_partition,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_two_edge_list(tmp_path):
    g = load_graph(write(tmp_path, "g.txt", "3 2 1\n1 2 4\n2 3 1.5\n"))
    assert g.n == 3 and g.num_edges == 2
    assert g.edges() == [(0, 1, 4.0), (1, 2, 1.5)]
    np.testing.assert_array_equal(g.vertex_weights, np.ones((3, 1)))


def test_vertex_weight_block(tmp_path):
    g = load_graph(write(tmp_path, "g.txt", "2 1 2\n1 2 1\n3 4\n5 6\n"))
    np.testing.assert_array_equal(g.vertex_weights, [[3, 4], [5, 6]])


def test_malformed_weight_names_line(tmp_path):
    p = write(tmp_path, "g.txt", "3 2 1\n1 2 4\n2 3 abc\n")
    with pytest.raises(ParseError) as err:
        load_graph(p)
    assert err.value.line == 3
    assert ":3:" in str(err.value)


def test_duplicate_edge_points_at_first_line(tmp_path):
    p = write(tmp_path, "g.txt", "3 2 1\n1 2 4\n2 1 1\n")
    with pytest.raises(ParseError, match="first seen on line 2"):
        load_graph(p)


@pytest.mark.parametrize(
    "text",
    ["", "3 1\n", "2 1 1\n1 3 1\n", "2 1 1\n1 1 1\n", "2 1 1\n1 2 -1\n", "2 1 1\n1 2 1\n1\n", "2 1 1\n1 2 1\n1\n1\n7\n"],
)
def test_edge_list_errors(tmp_path, text):
    with pytest.raises(ParseError):
        load_graph(write(tmp_path, "g.txt", text))


def test_graph_round_trip(tmp_path):
    g = WeightedGraph.from_edges(4, [(0, 1, 2.0), (2, 3, 0.5), (1, 3, 7.0)], np.array([[1, 2], [3, 4], [5, 6], [7, 8]]))
    save_graph(g, tmp_path / "g.txt")
    h = load_graph(tmp_path / "g.txt")
    assert h.edges() == g.edges()
    np.testing.assert_array_equal(h.vertex_weights, g.vertex_weights)


def test_hmetis_single_net(tmp_path):
    h = load_hypergraph(write(tmp_path, "h.hgr", "% comment\n1 3\n1 2 3\n"))
    assert h.n == 3
    assert h.hyperedges == (((0, 1, 2), 1.0),)


def test_hmetis_weighted_formats(tmp_path):
    h = load_hypergraph(write(tmp_path, "h.hgr", "2 3 11\n2 1 2\n5 2 3\n4\n5\n6\n"))
    assert h.hyperedges == (((0, 1), 2.0), ((1, 2), 5.0))
    np.testing.assert_array_equal(h.vertex_weights.ravel(), [4, 5, 6])
    g = load_graph(tmp_path / "h.hgr", format="hmetis")
    assert g.edges() == [(0, 1, 2.0), (1, 2, 5.0)]


def test_hmetis_errors(tmp_path):
    with pytest.raises(ParseError):
        load_hypergraph(write(tmp_path, "a.hgr", "1 3\n1 4\n"))
    with pytest.raises(ParseError):
        load_hypergraph(write(tmp_path, "b.hgr", "1 3 7\n1 2\n"))
    with pytest.raises(ParseError):
        load_hypergraph(write(tmp_path, "c.hgr", "2 3\n1 2\n"))


def test_hypergraph_round_trip(tmp_path):
    h = Hypergraph(4, (((0, 1, 2), 3.0), ((2, 3), 1.0)), np.array([1, 2, 3, 4]))
    save_hypergraph(h, tmp_path / "h.hgr")
    back = load_hypergraph(tmp_path / "h.hgr")
    assert back.hyperedges == h.hyperedges
    np.testing.assert_array_equal(back.vertex_weights, h.vertex_weights)


def test_fix_file(tmp_path):
    fixed = load_fixed(write(tmp_path, "f.fix", "-1\n0\n1\n-1\n"), 4)
    assert fixed.f1 == {1} and fixed.f2 == {2}
    with pytest.raises(ParseError):
        load_fixed(write(tmp_path, "g.fix", "-1\n2\n"), 2)
    with pytest.raises(ParseError):
        load_fixed(write(tmp_path, "h.fix", "-1\n"), 2)


def test_partition_round_trip(tmp_path):
    labels = np.array([0, 2, 1, 1, 0])
    write_partition(labels, tmp_path / "p.txt")
    assert (tmp_path / "p.txt").read_text().splitlines()[1] == "2 3"
    np.testing.assert_array_equal(read_partition(tmp_path / "p.txt", 5), labels)


def test_partition_errors(tmp_path):
    with pytest.raises(ParseError):
        read_partition(write(tmp_path, "a.txt", "1 1\n1 2\n"), 2)
    with pytest.raises(ParseError):
        read_partition(write(tmp_path, "b.txt", "1 0\n2 1\n"), 2)
    with pytest.raises(ValueError):
        read_partition(write(tmp_path, "c.txt", "1 1\n"), 2)
