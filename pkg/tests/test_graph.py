"""Weighted graph input, the induced space, and text round trips."""

import numpy as np
import pytest

import rwtorsion as rw

from _instances import lasso, random_weighted_graph


def test_from_edges_canonicalizes_pairs():
    g = rw.WeightedGraph.from_edges([("b", "a", 2.0), ("a", "a", 1.0)])
    assert g.vertices == ("a", "b")
    assert g.edges[("a", "b")] == 2.0
    assert g.edges[("a", "a")] == 1.0


def test_from_edges_rejects_duplicates_in_either_order():
    with pytest.raises(rw.DuplicateEdge):
        rw.WeightedGraph.from_edges([("a", "b", 1.0), ("a", "b", 2.0)])
    with pytest.raises(rw.DuplicateEdge):
        rw.WeightedGraph.from_edges([("a", "b", 1.0), ("b", "a", 2.0)])


def test_from_edges_rejects_nonpositive_weight():
    for w in (0.0, -1.0):
        with pytest.raises(rw.NonpositiveWeight):
            rw.WeightedGraph.from_edges([("a", "b", w)])


def test_explicit_vertex_list_must_cover_edges():
    with pytest.raises(rw.UnknownState):
        rw.WeightedGraph.from_edges([("a", "b", 1.0)], vertices=["a"])
    with pytest.raises(rw.DuplicateEdge):
        rw.WeightedGraph.from_edges([("a", "b", 1.0)], vertices=["a", "b", "b"])


def test_isolated_vertex_rejected_by_reduction():
    g = rw.WeightedGraph.from_edges([("a", "b", 1.0)], vertices=["a", "b", "c"])
    with pytest.raises(rw.IsolatedVertex):
        rw.from_weighted_graph(g)


def test_degree_counts_loop_once():
    g = rw.WeightedGraph.from_edges([("x", "x", 1.5), ("x", "y", 2.0)])
    assert g.degree("x") == pytest.approx(3.5)
    assert g.degree("y") == pytest.approx(2.0)


def test_induced_space_weights_are_degrees():
    sp = lasso(1.0, 1.0)
    assert sp.nu_of(["x"]) == pytest.approx(2.0)
    assert sp.nu_of(["y"]) == pytest.approx(1.0)
    # jump probabilities are weight over degree
    i, j = sp.state_index("x"), sp.state_index("y")
    assert sp.kernel[i, i] == pytest.approx(0.5)
    assert sp.kernel[i, j] == pytest.approx(0.5)
    assert sp.kernel[j, i] == pytest.approx(1.0)


def test_induced_space_reversible_to_roundoff():
    rng = np.random.default_rng(17)
    for _ in range(25):
        g = random_weighted_graph(rng, n_max=30)
        sp = rw.from_weighted_graph(g)
        report = rw.check_reversibility(sp, tol=1e-13)
        assert report.passed


def test_serialize_parse_round_trip():
    rng = np.random.default_rng(23)
    for _ in range(10):
        g = random_weighted_graph(rng, n_max=20)
        h = rw.parse_graph_file(rw.serialize_graph(g))
        assert h.vertices == g.vertices
        assert h.edges == g.edges


def test_parse_graph_comments_and_blanks():
    g = rw.parse_graph_file("# lasso\n\nx x 1.0\nx y 1.0   # anchor edge\n")
    assert g.vertices == ("x", "y")
    assert g.edges[("x", "x")] == 1.0


def test_parse_graph_reports_line_numbers():
    with pytest.raises(rw.ParseError) as exc:
        rw.parse_graph_file("a b 1.0\na b\n")
    assert exc.value.line == 2

    with pytest.raises(rw.ParseError) as exc:
        rw.parse_graph_file("a b not_a_number\n")
    assert exc.value.line == 1
    assert "weight" in exc.value.reason


def test_parse_graph_duplicate_and_nonpositive():
    with pytest.raises(rw.DuplicateEdge):
        rw.parse_graph_file("a b 1.0\nb a 2.0\n")
    with pytest.raises(rw.NonpositiveWeight):
        rw.parse_graph_file("a b 0.0\n")


def test_parse_domain_text():
    sp = lasso(1.0, 1.0)
    omega = rw.parse_domain_file("# domain\ny x\nx\n", sp)
    assert omega == ("x", "y")


def test_parse_domain_errors():
    sp = lasso(1.0, 1.0)
    with pytest.raises(rw.UnknownState):
        rw.parse_domain_file("x zz\n", sp)
    with pytest.raises(rw.EmptyDomain):
        rw.parse_domain_file("# nothing here\n", sp)
