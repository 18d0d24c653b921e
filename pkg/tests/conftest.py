"""Shared fixtures and independent oracles.

The brute-force helpers here deliberately avoid the package's own search
machinery: walk lengths come from breadth-first expansion over raw arcs,
partitions from normalizing arbitrary slot->block maps, and isomorphism
from networkx, so every cross-check is two-sided.
"""

from __future__ import annotations

from itertools import product

import networkx as nx
import pytest
from hypothesis import strategies as st

from dpsim import DPSystem, MetricGraph, walk_from_tokens


# -- paper figures -----------------------------------------------------------


@pytest.fixture
def fig3a() -> DPSystem:
    """Pendant unit edge into a (1,2) parallel pair; single point at the leaf."""
    g = MetricGraph.build(
        ["v1", "v2", "v3"],
        [("e1", "v1", "v2", 1), ("e2", "v2", "v3", 1), ("es", "v2", "v3", 2)],
    )
    return DPSystem.from_names(g, ["v1"])


@pytest.fixture
def fig5():
    """Five-cycle with two pendants and the semi-Eulerian v0->v6 walk."""
    g = MetricGraph.build(
        ["v0", "v1", "v2", "v3", "v4", "v5", "v6"],
        [
            ("e01", "v0", "v1", 1),
            ("e12", "v1", "v2", 1),
            ("e23", "v2", "v3", 1),
            ("e34", "v3", "v4", 1),
            ("e45", "v4", "v5", 1),
            ("e51", "v5", "v1", 1),
            ("e26", "v2", "v6", 1),
        ],
    )
    walk = walk_from_tokens(
        g,
        "v0",
        ["e01", "e12", "e23", "e34", "e45", "e51",
         "e12", "e23", "e34", "e45", "e51", "e12", "e26"],
    )
    return g, walk


# -- independent oracles -------------------------------------------------------


def brute_walk_lengths(graph: MetricGraph, sources, horizon: int) -> dict[int, set[int]]:
    """All achievable walk lengths per vertex up to the horizon, by raw BFS."""
    reach: dict[int, set[int]] = {v: set() for v in range(graph.n_vertices)}
    frontier = {(s, 0) for s in sources}
    seen = set(frontier)
    while frontier:
        nxt = set()
        for v, ln in frontier:
            reach[v].add(ln)
            for a in graph.out_arcs[v]:
                state = (graph.arc_head(a), ln + graph.arc_length(a))
                if state[1] <= horizon and state not in seen:
                    seen.add(state)
                    nxt.add(state)
        frontier = nxt
    return reach


def brute_place_saturations(
    graph: MetricGraph, sources, edge: int, horizon: int
) -> dict[int, int | None]:
    """Minimal class walk length per residue-at-u, straight from the definition."""
    e = graph.edges[edge]
    mod = 2 * e.length
    lengths = brute_walk_lengths(graph, sources, horizon)
    out: dict[int, int | None] = {}
    for r in range(mod):
        candidates = [ln for ln in lengths[e.u] if ln % mod == r]
        candidates += [ln for ln in lengths[e.v] if ln % mod == (r + e.length) % mod]
        out[r] = min(candidates) if candidates else None
    return out


def brute_partitions(m: int, allow_loops: bool = False) -> set[tuple[int, ...]]:
    """All set partitions of 2m slots, via normalized arbitrary block maps."""
    slots = 2 * m
    found = set()
    for raw in product(range(slots), repeat=slots):
        remap: dict[int, int] = {}
        norm = []
        for b in raw:
            if b not in remap:
                remap[b] = len(remap)
            norm.append(remap[b])
        if not allow_loops and any(norm[2 * i] == norm[2 * i + 1] for i in range(m)):
            continue
        found.add(tuple(norm))
    return found


def to_networkx(graph: MetricGraph) -> nx.MultiGraph:
    g = nx.MultiGraph()
    g.add_nodes_from(range(graph.n_vertices))
    for e in graph.edges:
        g.add_edge(e.u, e.v, length=e.length)
    return g


def nx_isomorphic(a: MetricGraph, b: MetricGraph) -> bool:
    return nx.is_isomorphic(
        to_networkx(a),
        to_networkx(b),
        edge_match=nx.isomorphism.categorical_multiedge_match("length", None),
    )


# -- hypothesis strategies -----------------------------------------------------


@st.composite
def connected_graphs(draw, max_vertices: int = 5, max_extra: int = 3, max_length: int = 3):
    """Random connected loop-free multigraph: a random tree plus extra edges."""
    n = draw(st.integers(2, max_vertices))
    pairs = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    extra = draw(st.integers(0, max_extra))
    for _ in range(extra):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1))
        if u != v:
            pairs.append((min(u, v), max(u, v)))
    lengths = [draw(st.integers(1, max_length)) for _ in pairs]
    return MetricGraph.from_lengths(lengths, pairs)


@st.composite
def systems(draw, **kwargs):
    graph = draw(connected_graphs(**kwargs))
    v = draw(st.integers(0, graph.n_vertices - 1))
    return DPSystem.make(graph, [v])


@st.composite
def walks(draw, max_steps: int = 8):
    """A random walk on a random graph, by stepping random outgoing arcs."""
    graph = draw(connected_graphs())
    start = draw(st.integers(0, graph.n_vertices - 1))
    arcs = []
    at = start
    for _ in range(draw(st.integers(0, max_steps))):
        outs = graph.out_arcs[at]
        a = outs[draw(st.integers(0, len(outs) - 1))]
        arcs.append(a)
        at = graph.arc_head(a)
    from dpsim import Walk

    return graph, Walk(start, tuple(arcs))
