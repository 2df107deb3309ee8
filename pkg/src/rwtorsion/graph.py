"""Weighted graphs and their induced random walk spaces.

A finite weighted graph (positive symmetric edge weights, loops allowed)
induces a reversible random walk space: each vertex carries the weight
nu(x) = d_x = sum of incident edge weights (a loop counted once), and the
walk jumps along edges with probability w_xy / d_x.

Text formats:
  graph file   one edge per line, "<id> <id> <weight>"; '#' starts a comment
  domain file  whitespace-separated vertex identifiers
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping, Sequence

from .errors import (
    DuplicateEdge,
    EmptyDomain,
    IsolatedVertex,
    NonpositiveWeight,
    ParseError,
    UnknownState,
)
from .space import FiniteRWSpace, build_space


def _canonical(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclasses.dataclass(frozen=True)
class WeightedGraph:
    """Vertices and symmetric positive edge weights, in canonical order.

    Edges are keyed by the sorted identifier pair; a key (x, x) is a loop.
    """

    vertices: tuple[str, ...]
    edges: Mapping[tuple[str, str], float]

    @staticmethod
    def from_edges(
        edges: Mapping[tuple[str, str], float] | Iterable[tuple[str, str, float]],
        vertices: Sequence[str] | None = None,
    ) -> "WeightedGraph":
        if isinstance(edges, Mapping):
            triples = [(u, v, w) for (u, v), w in edges.items()]
        else:
            triples = list(edges)
        canon: dict[tuple[str, str], float] = {}
        for u, v, w in triples:
            u, v = str(u), str(v)
            w = float(w)
            if w <= 0:
                raise NonpositiveWeight(f"edge ({u}, {v}) has weight {w}")
            key = _canonical(u, v)
            if key in canon:
                raise DuplicateEdge(f"edge ({key[0]}, {key[1]}) given twice")
            canon[key] = w
        seen = set()
        if vertices is None:
            names = sorted({x for key in canon for x in key})
        else:
            names = sorted(str(v) for v in vertices)
            if len(set(names)) != len(names):
                raise DuplicateEdge("duplicate vertex identifiers")
            seen = {x for key in canon for x in key}
            stray = seen - set(names)
            if stray:
                raise UnknownState(f"edges reference undeclared vertices {sorted(stray)}")
        return WeightedGraph(
            vertices=tuple(names),
            edges=dict(sorted(canon.items())),
        )

    def degree(self, x: str) -> float:
        """Total incident weight at x; a loop contributes its weight once."""
        total = 0.0
        for (u, v), w in self.edges.items():
            if x == u or x == v:
                total += w
        return total


def from_weighted_graph(graph: WeightedGraph) -> FiniteRWSpace:
    """The reversible random walk space induced by a weighted graph."""
    degrees = {x: 0.0 for x in graph.vertices}
    for (u, v), w in graph.edges.items():
        degrees[u] += w
        if v != u:
            degrees[v] += w
    dead = [x for x, d in degrees.items() if d <= 0.0]
    if dead:
        raise IsolatedVertex(f"vertices with no incident edges: {dead}")
    triples = []
    for (u, v), w in graph.edges.items():
        triples.append((u, v, w / degrees[u]))
        if v != u:
            triples.append((v, u, w / degrees[v]))
    return build_space(graph.vertices, degrees, triples)


def parse_graph_file(text: str) -> WeightedGraph:
    """Parse the edge-list format; see the module docstring."""
    triples: list[tuple[str, str, float]] = []
    seen: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected '<id> <id> <weight>', got {raw.strip()!r}")
        u, v, wtext = parts
        try:
            w = float(wtext)
        except ValueError:
            raise ParseError(lineno, f"bad weight {wtext!r}") from None
        if not w > 0:
            raise NonpositiveWeight(f"line {lineno}: edge ({u}, {v}) has weight {w}")
        key = _canonical(u, v)
        if key in seen:
            raise DuplicateEdge(f"line {lineno}: edge ({key[0]}, {key[1]}) given twice")
        seen.add(key)
        triples.append((u, v, w))
    return WeightedGraph.from_edges(triples)


def serialize_graph(graph: WeightedGraph) -> str:
    """Canonical text form: edges sorted by identifier pair."""
    lines = [f"{u} {v} {w!r}" for (u, v), w in sorted(graph.edges.items())]
    return "\n".join(lines) + "\n"


def parse_domain_file(text: str, space: FiniteRWSpace) -> tuple[str, ...]:
    """Parse a whitespace-separated list of state identifiers."""
    names: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        names.extend(line.split())
    if not names:
        raise EmptyDomain("domain file names no states")
    unknown = sorted({x for x in names if x not in space.index})
    if unknown:
        raise UnknownState(f"domain references unknown states {unknown}")
    idx = sorted({space.index[x] for x in names})
    return tuple(space.states[i] for i in idx)
