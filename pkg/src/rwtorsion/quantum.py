"""Torsional rigidity of quantum (metric) graphs via random walk reduction.

A metric graph with Dirichlet conditions at its degree-one vertices has a
torsion function on the edges; its integral splits into a sum of per-edge
cubic terms plus a vertex part.  The vertex part is recovered exactly from
a weighted graph G_c whose edge weights are 1 / (c * length) and whose
self-loops pad each interior vertex so that nu matches c times the total
incident length.  The reduction is exact for every admissible c, which
gives a built-in consistency check: the value is recomputed at 2c and must
agree.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping

from .errors import (
    ConsistencyError,
    DuplicateEdge,
    InputError,
    NoConvergence,
    NonpositiveWeight,
    PaddingNegative,
    ParseError,
)
from .geometry import perimeter
from .graph import WeightedGraph, from_weighted_graph
from .torsion import stress_solve

_MARGIN = 0.1  # required relative slack of the self-loop padding
_AGREE_TOL = 1e-9  # relative agreement between the c and 2c evaluations


@dataclasses.dataclass(frozen=True)
class MetricGraph:
    """Finite connected metric graph with at least one degree-one vertex.

    edges maps ordered pairs (u, v) with u < v to positive lengths; loops
    maps a vertex to the length of its self-loop.  A loop contributes 2 to
    the degree, so a Dirichlet (degree-one) vertex never carries one.
    """

    vertices: tuple[str, ...]
    edges: Mapping[tuple[str, str], float]
    loops: Mapping[str, float]

    def degree(self, v: str) -> int:
        d = sum(1 for (a, b) in self.edges if v in (a, b))
        return d + (2 if v in self.loops else 0)

    @property
    def dirichlet(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.degree(v) == 1)

    @property
    def neumann(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.degree(v) != 1)

    def incident_length(self, v: str) -> float:
        """Total length of edges at v, the self-loop counted once."""
        total = sum(l for (a, b), l in self.edges.items() if v in (a, b))
        return total + self.loops.get(v, 0.0)

    def total_cubes(self) -> float:
        return sum(l**3 for l in self.edges.values()) + sum(
            l**3 for l in self.loops.values()
        )


def metric_graph(
    edges: Iterable[tuple[str, str, float]],
    loops: Iterable[tuple[str, float]] = (),
) -> MetricGraph:
    """Validate and canonicalize edge and loop lists into a MetricGraph."""
    edge_map: dict[tuple[str, str], float] = {}
    loop_map: dict[str, float] = {}
    names: set[str] = set()
    for u, v, length in edges:
        if length <= 0:
            raise NonpositiveWeight(f"edge {u}-{v} has nonpositive length {length}")
        if u == v:
            raise InputError(f"edge {u}-{v} is a loop; declare it as one")
        key = (u, v) if u < v else (v, u)
        if key in edge_map:
            raise DuplicateEdge(f"edge {key[0]}-{key[1]} declared twice")
        edge_map[key] = float(length)
        names.update(key)
    for v, length in loops:
        if length <= 0:
            raise NonpositiveWeight(f"loop at {v} has nonpositive length {length}")
        if v in loop_map:
            raise DuplicateEdge(f"loop at {v} declared twice")
        loop_map[v] = float(length)
        names.add(v)

    if not edge_map:
        raise InputError("a metric graph needs at least one edge")
    graph = MetricGraph(tuple(sorted(names)), edge_map, loop_map)

    # Connectivity over the non-loop edges (a loop cannot connect anything).
    seen = {graph.vertices[0]}
    frontier = [graph.vertices[0]]
    while frontier:
        x = frontier.pop()
        for a, b in edge_map:
            if x == a and b not in seen:
                seen.add(b)
                frontier.append(b)
            elif x == b and a not in seen:
                seen.add(a)
                frontier.append(a)
    if len(seen) != len(graph.vertices):
        raise InputError("metric graph is not connected")

    if not graph.dirichlet:
        raise InputError("a metric graph needs at least one degree-one vertex")
    if not graph.neumann:
        raise InputError("a single edge has no interior vertex; subdivide it")
    for a, b in edge_map:
        if graph.degree(a) == 1 and graph.degree(b) == 1:
            raise InputError(f"edge {a}-{b} joins two degree-one vertices")
    return graph


def parse_metric_graph_file(path: str) -> MetricGraph:
    """Read lines of the form 'edge u v length' or 'loop v length'."""
    edges: list[tuple[str, str, float]] = []
    loops: list[tuple[str, float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "edge" and len(parts) == 4:
                    edges.append((parts[1], parts[2], float(parts[3])))
                    continue
                if parts[0] == "loop" and len(parts) == 3:
                    loops.append((parts[1], float(parts[2])))
                    continue
            except ValueError:
                raise ParseError(lineno, f"bad length in {line!r}") from None
            raise ParseError(lineno, f"expected 'edge u v len' or 'loop v len', got {line!r}")
    return metric_graph(edges, loops)


def _padding(graph: MetricGraph, c: float, v: str) -> tuple[float, float]:
    """Incident length sum (scaled by c) and inverse-length sum at v."""
    scaled = c * graph.incident_length(v)
    inverse = sum(
        1.0 / (c * l) for (a, b), l in graph.edges.items() if v in (a, b)
    )
    if v in graph.loops:
        inverse += 1.0 / (c * graph.loops[v])
    return scaled, inverse


def _margin_holds(graph: MetricGraph, c: float) -> bool:
    for v in graph.neumann:
        scaled, inverse = _padding(graph, c, v)
        if scaled - inverse < _MARGIN * scaled:
            return False
    return True


def choose_c(graph: MetricGraph) -> int:
    """Smallest power of two whose padding keeps a 10% margin everywhere."""
    c = 1
    for _ in range(64):
        if _margin_holds(graph, c):
            return c
        c *= 2
    raise NoConvergence("no admissible c up to 2^63; lengths are too extreme")


def reduce_to_rws(graph: MetricGraph, c: float) -> WeightedGraph:
    """Weighted graph G_c: edge weights 1/(c l), interior self-loops padded.

    The padding makes each interior vertex's degree in G_c equal to c times
    its incident length (loop counted once plus the loop's own weight), a
    fact the torsion formula depends on.  Raises PaddingNegative when c is
    too small for that.
    """
    triples: list[tuple[str, str, float]] = []
    for (u, v), l in graph.edges.items():
        triples.append((u, v, 1.0 / (c * l)))
    for v in graph.neumann:
        scaled, inverse = _padding(graph, c, v)
        pad = scaled - inverse
        if pad < 0:
            raise PaddingNegative(
                f"self-weight at {v} would be negative at c={c}; increase c"
            )
        self_weight = pad
        if v in graph.loops:
            loop_len = graph.loops[v]
            self_weight += 1.0 / (c * loop_len) + c * loop_len
        if self_weight > 0:
            triples.append((v, v, self_weight))
    return WeightedGraph.from_edges(triples, vertices=graph.vertices)


@dataclasses.dataclass(frozen=True)
class QuantumTorsionResult:
    value: float
    c: int
    cube_term: float
    vertex_term: float
    vertex_values: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "vertex_values", dict(self.vertex_values))


def _torsion_at(graph: MetricGraph, c: float) -> tuple[float, dict[str, float]]:
    weighted = reduce_to_rws(graph, c)
    space = from_weighted_graph(weighted)
    result = stress_solve(space, graph.neumann)
    cube_term = graph.total_cubes() / 12.0
    value = cube_term + result.rigidity / (4.0 * c**3)
    stresses = result.stress_map()
    vertex_values = {v: stresses[v] / (2.0 * c**2) for v in graph.neumann}
    for v in graph.dirichlet:
        vertex_values[v] = 0.0
    return value, vertex_values


def quantum_torsion(graph: MetricGraph) -> QuantumTorsionResult:
    """Torsional rigidity of the metric graph with Dirichlet leaves.

    Evaluates the reduction at the chosen c and again at 2c; the two must
    agree to 1e-9 relative or a ConsistencyError is raised.
    """
    c = choose_c(graph)
    value, vertex_values = _torsion_at(graph, c)
    check, _ = _torsion_at(graph, 2 * c)
    if abs(value - check) > _AGREE_TOL * max(1.0, abs(value)):
        raise ConsistencyError(
            f"torsion at c={c} is {value!r} but at c={2 * c} is {check!r}"
        )
    cube_term = graph.total_cubes() / 12.0
    return QuantumTorsionResult(
        value=value,
        c=c,
        cube_term=cube_term,
        vertex_term=value - cube_term,
        vertex_values=vertex_values,
    )


def quantum_lower_bound(graph: MetricGraph) -> float:
    """Cheap lower bound: cube term plus nu(V_N)^2 / (4 c^3 P_m(V_N))."""
    c = choose_c(graph)
    weighted = reduce_to_rws(graph, c)
    space = from_weighted_graph(weighted)
    nu_inner = space.nu_of(graph.neumann)
    per = perimeter(space, graph.neumann)
    return graph.total_cubes() / 12.0 + nu_inner**2 / (per * 4.0 * c**3)
