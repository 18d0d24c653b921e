"""Metric multigraphs: validation, scaling, arcs, walks and distances.

Lengths are kept as scaled positive integers with gcd 1 across the edge
multiset; the scale factor needed to recover the user's original units
travels with the graph. Every undirected edge is viewed as a pair of
opposite arcs of the same length, encoded as ``2*edge_index + direction``
so that ``arc ^ 1`` is the reverse arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from heapq import heappop, heappush
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Invalid graph, walk or operation input."""


@dataclass(frozen=True)
class Edge:
    eid: str
    u: int
    v: int
    length: int


@dataclass(frozen=True)
class EdgeMultiset:
    """User-supplied rational lengths plus their integer scaled form."""

    original: tuple[Fraction, ...]
    scaled: tuple[int, ...]
    factor: Fraction  # original[i] == scaled[i] * factor


def scale_to_integer(lengths: Iterable[Fraction | int | str]) -> EdgeMultiset:
    """Scale positive rational lengths to integers with gcd exactly 1."""
    original = tuple(Fraction(x) for x in lengths)
    if not original:
        raise GraphError("empty edge multiset")
    for x in original:
        if x <= 0:
            raise GraphError(f"non-positive length {x}")
    denom_lcm = math.lcm(*(x.denominator for x in original))
    ints = [x.numerator * (denom_lcm // x.denominator) for x in original]
    g = math.gcd(*ints)
    scaled = tuple(n // g for n in ints)
    return EdgeMultiset(original, scaled, Fraction(g, denom_lcm))


@dataclass(frozen=True)
class MetricGraph:
    """Immutable length-labeled multigraph over dense integer vertex ids.

    ``vertex_names`` maps internal index -> opaque external id. ``scale``
    converts internal integer lengths back to original units.
    """

    vertex_names: tuple[str, ...]
    edges: tuple[Edge, ...]
    scale: Fraction = Fraction(1)
    allow_loops: bool = False

    # -- construction ------------------------------------------------

    @staticmethod
    def build(
        vertices: Sequence[str],
        edges: Sequence[tuple[str, str, str, int]],
        scale: Fraction = Fraction(1),
        allow_loops: bool = False,
    ) -> "MetricGraph":
        """Build and validate from (edge id, u name, v name, int length)."""
        names = tuple(vertices)
        index = {name: i for i, name in enumerate(names)}
        if len(index) != len(names):
            raise GraphError("duplicate vertex id")
        built = []
        for eid, u, v, length in edges:
            if u not in index:
                raise GraphError(f"edge {eid}: dangling endpoint id {u!r}")
            if v not in index:
                raise GraphError(f"edge {eid}: dangling endpoint id {v!r}")
            built.append(Edge(eid, index[u], index[v], length))
        graph = MetricGraph(names, tuple(built), scale, allow_loops)
        problems = validate(graph)
        if problems:
            raise GraphError("; ".join(problems))
        return graph

    @staticmethod
    def from_lengths(
        lengths: Iterable[Fraction | int | str],
        pairs: Sequence[tuple[int, int]],
        allow_loops: bool = False,
    ) -> "MetricGraph":
        """Build from scaled lengths and endpoint index pairs (v0.., e1..)."""
        ms = scale_to_integer(lengths)
        n = max((max(u, v) for u, v in pairs), default=-1) + 1
        names = tuple(f"v{i}" for i in range(n))
        edges = [
            (f"e{i + 1}", names[u], names[v], ms.scaled[i])
            for i, (u, v) in enumerate(pairs)
        ]
        return MetricGraph.build(names, edges, ms.factor, allow_loops)

    # -- basic views ------------------------------------------------

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.vertex_names)}

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.eid: i for i, e in enumerate(self.edges)}

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_names)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def total_length(self) -> int:
        return sum(e.length for e in self.edges)

    @cached_property
    def out_arcs(self) -> tuple[tuple[int, ...], ...]:
        """Arcs leaving each vertex (loops contribute both directions)."""
        out: list[list[int]] = [[] for _ in self.vertex_names]
        for i, e in enumerate(self.edges):
            out[e.u].append(2 * i)
            out[e.v].append(2 * i + 1)
        return tuple(tuple(a) for a in out)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.out_arcs)

    def arc_tail(self, arc: int) -> int:
        e = self.edges[arc >> 1]
        return e.u if arc & 1 == 0 else e.v

    def arc_head(self, arc: int) -> int:
        e = self.edges[arc >> 1]
        return e.v if arc & 1 == 0 else e.u

    def arc_length(self, arc: int) -> int:
        return self.edges[arc >> 1].length

    def arc_token(self, arc: int) -> str:
        eid = self.edges[arc >> 1].eid
        return eid if arc & 1 == 0 else "~" + eid

    def arc_from_token(self, token: str) -> int:
        rev = token.startswith("~")
        eid = token[1:] if rev else token
        if eid not in self.edge_index:
            raise GraphError(f"unknown edge id {eid!r}")
        return 2 * self.edge_index[eid] + (1 if rev else 0)

    def edge_lengths(self) -> tuple[int, ...]:
        return tuple(e.length for e in self.edges)

    def original_length(self, scaled: int) -> Fraction:
        return scaled * self.scale

    # -- traversal helpers -------------------------------------------

    def neighbors(self, v: int) -> list[int]:
        return [self.arc_head(a) for a in self.out_arcs[v]]

    def component_of(self, start: int, skip_edges: frozenset[int] = frozenset()) -> frozenset[int]:
        """Vertices reachable from start, optionally ignoring some edges."""
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for a in self.out_arcs[v]:
                if (a >> 1) in skip_edges:
                    continue
                w = self.arc_head(a)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    def connected_components(self) -> list[frozenset[int]]:
        comps = []
        left = set(range(self.n_vertices))
        while left:
            comp = self.component_of(min(left))
            comps.append(comp)
            left -= comp
        return comps

    def is_connected(self) -> bool:
        return self.n_vertices <= 1 or len(self.component_of(0)) == self.n_vertices


def validate(graph: MetricGraph) -> list[str]:
    """Return the list of violated invariants (empty when valid)."""
    problems = []
    n = graph.n_vertices
    for e in graph.edges:
        if not (0 <= e.u < n) or not (0 <= e.v < n):
            problems.append(f"edge {e.eid}: dangling endpoint index")
        if e.length < 1:
            problems.append(f"edge {e.eid}: non-positive length {e.length}")
        if e.u == e.v and not graph.allow_loops:
            problems.append(f"edge {e.eid}: self-loop")
    seen_ids = set()
    for e in graph.edges:
        if e.eid in seen_ids:
            problems.append(f"duplicate edge id {e.eid}")
        seen_ids.add(e.eid)
    return problems


def shortest_distance(graph: MetricGraph, u: int, v: int) -> int:
    """Length of the shortest u-v walk in scaled units; raises if unreachable."""
    if u == v:
        return 0
    dist = {u: 0}
    heap = [(0, u)]
    while heap:
        d, x = heappop(heap)
        if d > dist.get(x, d):
            continue
        if x == v:
            return d
        for a in graph.out_arcs[x]:
            y = graph.arc_head(a)
            nd = d + graph.arc_length(a)
            if nd < dist.get(y, nd + 1):
                dist[y] = nd
                heappush(heap, (nd, y))
    raise GraphError(
        f"unreachable: {graph.vertex_names[u]} and {graph.vertex_names[v]} "
        "are in different components"
    )


@dataclass(frozen=True)
class Walk:
    """A start vertex plus a chained sequence of arcs (may be empty)."""

    start: int
    arcs: tuple[int, ...] = ()

    def validate(self, graph: MetricGraph) -> None:
        if not (0 <= self.start < graph.n_vertices):
            raise GraphError("walk start out of range")
        at = self.start
        for a in self.arcs:
            if not (0 <= a < 2 * graph.n_edges):
                raise GraphError(f"arc index {a} out of range")
            if graph.arc_tail(a) != at:
                raise GraphError(
                    f"walk does not chain at {graph.vertex_names[at]}: "
                    f"arc {graph.arc_token(a)} starts elsewhere"
                )
            at = graph.arc_head(a)

    def end(self, graph: MetricGraph) -> int:
        return graph.arc_head(self.arcs[-1]) if self.arcs else self.start

    def length(self, graph: MetricGraph) -> int:
        return sum(graph.arc_length(a) for a in self.arcs)

    def vertices(self, graph: MetricGraph) -> list[int]:
        seq = [self.start]
        for a in self.arcs:
            seq.append(graph.arc_head(a))
        return seq

    def tokens(self, graph: MetricGraph) -> list[str]:
        return [graph.arc_token(a) for a in self.arcs]


def walk_from_tokens(graph: MetricGraph, start: str, tokens: Iterable[str]) -> Walk:
    walk = Walk(graph.vertex_index[start], tuple(graph.arc_from_token(t) for t in tokens))
    walk.validate(graph)
    return walk


def walk_from_vertices(graph: MetricGraph, names: Sequence[str]) -> Walk:
    """Build a walk from a vertex-name sequence; ambiguous on parallel edges."""
    idx = [graph.vertex_index[n] for n in names]
    arcs = []
    for u, v in zip(idx, idx[1:]):
        candidates = [a for a in graph.out_arcs[u] if graph.arc_head(a) == v]
        if not candidates:
            raise GraphError(f"no edge between {names[0]}..: {u}->{v}")
        if len({a >> 1 for a in candidates}) > 1:
            raise GraphError("ambiguous step across parallel edges; use arc tokens")
        arcs.append(candidates[0])
    return Walk(idx[0], tuple(arcs))
