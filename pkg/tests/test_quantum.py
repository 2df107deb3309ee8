"""Metric graph torsion via the weighted-graph reduction.

Independent closed forms used here:

* a subdivided interval of total length L with both endpoints held at
  zero has rigidity L^3/12 and interior profile x (L - x) / 2;
* a star with k unit legs has rigidity k/3;
* a star with legs l_1..l_k and a center loop l_0 has rigidity
  (1/12) sum l_i^3 + (2 l_0 + sum l_i)^2 / (4 sum (1/l_i)),
  and the perimeter-based lower bound is attained exactly on stars.
"""

import math

import numpy as np
import pytest

import rwtorsion as rw


def _star(lengths, loop=None):
    edges = [("v", f"leaf{i}", l) for i, l in enumerate(lengths)]
    loops = [("v", loop)] if loop else []
    return rw.metric_graph(edges, loops=loops)


def _star_formula(lengths, loop=0.0):
    cubes = sum(l**3 for l in lengths) + loop**3
    legs = sum(lengths)
    return cubes / 12.0 + (2.0 * loop + legs) ** 2 / (4.0 * sum(1.0 / l for l in lengths))


def test_unit_three_star():
    res = rw.quantum_torsion(_star([1.0, 1.0, 1.0]))
    assert res.value == pytest.approx(1.0, rel=1e-12)
    assert res.cube_term == pytest.approx(0.25)
    assert res.vertex_term == pytest.approx(0.75, rel=1e-12)
    assert res.vertex_values["v"] == pytest.approx(0.5, rel=1e-12)
    assert res.vertex_values["leaf0"] == 0.0
    assert res.c >= 1 and res.c & (res.c - 1) == 0


def test_unit_star_family():
    for k in (2, 3, 5, 8):
        res = rw.quantum_torsion(_star([1.0] * k))
        assert res.value == pytest.approx(k / 3.0, rel=1e-10)


def test_star_with_center_loop_closed_form():
    res = rw.quantum_torsion(_star([1.0, 2.0, 3.0], loop=0.5))
    assert res.value == pytest.approx(10235.0 / 1056.0, rel=1e-12)


def test_random_stars_match_the_formula():
    rng = np.random.default_rng(88)
    for _ in range(6):
        lengths = list(rng.uniform(0.3, 2.5, size=rng.integers(2, 6)))
        loop = float(rng.uniform(0.2, 1.5)) if rng.random() < 0.5 else None
        res = rw.quantum_torsion(_star(lengths, loop=loop))
        expected = _star_formula(lengths, loop or 0.0)
        assert res.value == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize(
    "lengths", [(1.0, 1.0, 1.0), (0.5, 1.25, 0.25), (0.2, 0.9, 1.3, 0.6)]
)
def test_subdivided_interval_recovers_cubic_law(lengths):
    names = ["a"] + [f"m{i}" for i in range(1, len(lengths))] + ["b"]
    edges = [(names[i], names[i + 1], l) for i, l in enumerate(lengths)]
    res = rw.quantum_torsion(rw.metric_graph(edges))
    total = sum(lengths)
    assert res.value == pytest.approx(total**3 / 12.0, rel=1e-10)
    x = 0.0
    for i, l in enumerate(lengths[:-1]):
        x += l
        expected = x * (total - x) / 2.0
        assert res.vertex_values[names[i + 1]] == pytest.approx(expected, rel=1e-10)


def test_lower_bound_is_attained_on_stars_only():
    star = _star([1.0, 2.0, 3.0], loop=0.5)
    assert rw.quantum_lower_bound(star) == pytest.approx(
        rw.quantum_torsion(star).value, rel=1e-9
    )
    path = rw.metric_graph([("a", "m1", 0.5), ("m1", "m2", 1.25), ("m2", "b", 0.25)])
    value = rw.quantum_torsion(path).value
    bound = rw.quantum_lower_bound(path)
    assert bound <= value * (1.0 + 1e-12)
    assert bound < value  # interior profile is not flat, so the bound is strict


def test_reduction_is_c_invariant():
    g = rw.metric_graph(
        [("a", "m", 0.7), ("m", "n", 1.3), ("n", "b", 0.4), ("n", "c", 2.0)]
    )
    reference = rw.quantum_torsion(g)
    for c in (reference.c, 4 * reference.c, 8 * reference.c):
        weighted = rw.reduce_to_rws(g, c)
        space = rw.from_weighted_graph(weighted)
        rig = rw.stress_solve(space, g.neumann).rigidity
        value = g.total_cubes() / 12.0 + rig / (4.0 * c**3)
        assert value == pytest.approx(reference.value, rel=1e-9)


def test_reduced_graph_weight_accounting():
    g = _star([1.0, 2.0, 3.0], loop=0.5)
    c = rw.choose_c(g)
    space = rw.from_weighted_graph(rw.reduce_to_rws(g, c))
    # interior weight is c times incident length with the loop length
    # entering twice (once in the incident sum, once from the pad)
    assert space.nu_of(["v"]) == pytest.approx(c * (6.0 + 2 * 0.5), rel=1e-12)
    for leaf, l in (("leaf0", 1.0), ("leaf1", 2.0), ("leaf2", 3.0)):
        assert space.nu_of([leaf]) == pytest.approx(1.0 / (c * l), rel=1e-12)


def test_reduced_stress_satisfies_the_recursion():
    g = rw.metric_graph(
        [("a", "m", 0.7), ("m", "n", 1.3), ("n", "b", 0.4), ("n", "c", 2.0)]
    )
    res = rw.quantum_torsion(g)
    space = rw.from_weighted_graph(rw.reduce_to_rws(g, res.c))
    dom = rw.make_domain(space, g.neumann)
    f = np.array([res.vertex_values[v] * 2.0 * res.c**2 for v in dom.omega])
    gap = f - 1.0 - dom.sub_kernel.toarray() @ f
    assert np.max(np.abs(gap)) <= 1e-10 * max(1.0, np.max(np.abs(f)))


def test_value_decomposes_over_vertex_profile():
    # T = cubes/12 + (1/2) sum over x of (incident + loop)(x) v(x)
    graphs = [
        _star([1.0, 1.0, 1.0]),
        _star([1.0, 2.0, 3.0], loop=0.5),
        rw.metric_graph(
            [("a", "m", 0.7), ("m", "n", 1.3), ("n", "b", 0.4), ("n", "c", 2.0)]
        ),
    ]
    for g in graphs:
        res = rw.quantum_torsion(g)
        weighted = 0.5 * sum(
            (g.incident_length(v) + g.loops.get(v, 0.0)) * res.vertex_values[v]
            for v in g.vertices
        )
        assert res.value == pytest.approx(g.total_cubes() / 12.0 + weighted, rel=1e-10)


def test_choose_c_keeps_the_padding_margin():
    assert rw.choose_c(_star([1.0, 1.0, 1.0])) == 2
    tiny = _star([0.01, 0.01, 0.01])
    assert rw.choose_c(tiny) == 128
    with pytest.raises(rw.PaddingNegative):
        rw.reduce_to_rws(tiny, 1)


def test_metric_graph_validation():
    with pytest.raises(rw.InputError, match="declare it as one"):
        rw.metric_graph([("a", "a", 1.0), ("a", "b", 1.0)])
    with pytest.raises(rw.DuplicateEdge):
        rw.metric_graph([("a", "b", 1.0), ("b", "a", 2.0), ("b", "c", 1.0)])
    with pytest.raises(rw.DuplicateEdge):
        rw.metric_graph([("a", "b", 1.0), ("b", "c", 1.0)], loops=[("b", 1.0), ("b", 2.0)])
    with pytest.raises(rw.NonpositiveWeight):
        rw.metric_graph([("a", "b", 0.0), ("b", "c", 1.0)])
    with pytest.raises(rw.NonpositiveWeight):
        rw.metric_graph([("a", "b", 1.0), ("b", "c", 1.0)], loops=[("b", -1.0)])
    with pytest.raises(rw.InputError, match="not connected"):
        rw.metric_graph([("a", "b", 1.0), ("b", "c", 1.0), ("x", "y", 1.0)])
    with pytest.raises(rw.InputError, match="at least one edge"):
        rw.metric_graph([])
    with pytest.raises(rw.InputError, match="subdivide"):
        rw.metric_graph([("a", "b", 1.0)])
    with pytest.raises(rw.InputError, match="degree-one"):
        rw.metric_graph([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])


def test_parse_metric_graph_file(tmp_path):
    path = tmp_path / "star.mg"
    path.write_text(
        "# three legs and a loop\n"
        "edge v leaf0 1.0\n"
        "edge v leaf1 2.0\n"
        "edge v leaf2 3.0\n"
        "loop v 0.5\n"
    )
    g = rw.parse_metric_graph_file(str(path))
    assert rw.quantum_torsion(g).value == pytest.approx(10235.0 / 1056.0, rel=1e-12)

    bad = tmp_path / "bad.mg"
    bad.write_text("edge a b 1.0\nedge b c\n")
    with pytest.raises(rw.ParseError) as exc:
        rw.parse_metric_graph_file(str(bad))
    assert exc.value.line == 2

    bad.write_text("edge a b one\n")
    with pytest.raises(rw.ParseError):
        rw.parse_metric_graph_file(str(bad))
