"""Block/bridge decomposition, bead predicates and canonical labeling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from itertools import permutations, product
from typing import Sequence

from .graph import GraphError, MetricGraph

# Brute-force labeling guard: product of refinement-cell factorials.
_CANON_BUDGET = 2_000_000


@dataclass(frozen=True)
class BlockDecomposition:
    """Biconnected blocks of a multigraph, as edge-index sets."""

    blocks: tuple[frozenset[int], ...]
    block_vertices: tuple[frozenset[int], ...]
    bridges: frozenset[int]
    cycle_blocks: tuple[int, ...]  # indices into blocks that are simple cycles
    cycles_at: tuple[int, ...]  # per vertex: number of cycle blocks containing it


def blocks_bridges(graph: MetricGraph) -> BlockDecomposition:
    """Hopcroft-Tarjan block decomposition, parallel-edge and loop aware.

    A parallel pair forms a two-edge cycle block, not a bridge; a self-loop
    forms its own single-edge cycle block.
    """
    n = graph.n_vertices
    disc = [-1] * n
    low = [0] * n
    timer = 0
    estack: list[int] = []
    blocks: list[frozenset[int]] = []

    loop_edges = [i for i, e in enumerate(graph.edges) if e.u == e.v]
    for i in loop_edges:
        blocks.append(frozenset([i]))

    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(graph.out_arcs[root]))]
        while stack:
            v, pe, it = stack[-1]
            advanced = False
            for a in it:
                ei = a >> 1
                w = graph.arc_head(a)
                if ei == pe or w == v:
                    continue
                if disc[w] == -1:
                    estack.append(ei)
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, ei, iter(graph.out_arcs[w])))
                    advanced = True
                    break
                if disc[w] < disc[v]:
                    estack.append(ei)
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                u, _, _ = stack[-1]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    comp = []
                    while True:
                        e = estack.pop()
                        comp.append(e)
                        if e == pe:
                            break
                    blocks.append(frozenset(comp))

    block_vertices = []
    for blk in blocks:
        verts = set()
        for ei in blk:
            verts.add(graph.edges[ei].u)
            verts.add(graph.edges[ei].v)
        block_vertices.append(frozenset(verts))

    bridges = frozenset(
        next(iter(blk))
        for blk in blocks
        if len(blk) == 1 and graph.edges[next(iter(blk))].u != graph.edges[next(iter(blk))].v
    )

    cycle_blocks = []
    for bi, blk in enumerate(blocks):
        if len(blk) == 1:
            ei = next(iter(blk))
            if graph.edges[ei].u == graph.edges[ei].v:
                cycle_blocks.append(bi)
        elif len(blk) == len(block_vertices[bi]):
            cycle_blocks.append(bi)

    cycles_at = [0] * n
    for bi in cycle_blocks:
        for v in block_vertices[bi]:
            cycles_at[v] += 1

    return BlockDecomposition(
        tuple(blocks),
        tuple(block_vertices),
        bridges,
        tuple(cycle_blocks),
        tuple(cycles_at),
    )


def is_bead(graph: MetricGraph) -> bool:
    """True iff every block is an edge or a simple cycle and cycles are vertex-disjoint."""
    dec = blocks_bridges(graph)
    cycle_set = set(dec.cycle_blocks)
    for bi, blk in enumerate(dec.blocks):
        if len(blk) > 1 and bi not in cycle_set:
            return False
    return all(c <= 1 for c in dec.cycles_at)


def is_bead_broom(graph: MetricGraph, handle: Sequence[str]) -> bool:
    """Bead graph whose handle path has degree <= 2 except at one terminal."""
    if not handle:
        raise GraphError("empty handle")
    idx = []
    for name in handle:
        if name not in graph.vertex_index:
            raise GraphError(f"handle vertex {name!r} not in graph")
        idx.append(graph.vertex_index[name])
    if len(set(idx)) != len(idx):
        raise GraphError("handle is not a path: repeated vertex")
    for u, v in zip(idx, idx[1:]):
        if all(graph.arc_head(a) != v for a in graph.out_arcs[u]):
            raise GraphError("handle is not a path: non-adjacent consecutive vertices")
    if not is_bead(graph):
        return False
    over = [v for v in idx if graph.degrees[v] > 2]
    if not over:
        return True
    return len(over) == 1 and over[0] in (idx[0], idx[-1])


def bead_leaves(graph: MetricGraph) -> frozenset[int]:
    """Leaves plus terminal-cycle vertices away from the cycle's only bridge.

    A cycle with no incident bridge at all (a bare cycle component)
    contributes all of its vertices.
    """
    if not is_bead(graph):
        raise GraphError("bead_leaves requires a bead graph")
    dec = blocks_bridges(graph)
    leaves = {v for v in range(graph.n_vertices) if graph.degrees[v] == 1}
    for bi in dec.cycle_blocks:
        cyc_verts = dec.block_vertices[bi]
        cyc_edges = dec.blocks[bi]
        incident = [
            ei
            for ei in range(graph.n_edges)
            if ei not in cyc_edges
            and (graph.edges[ei].u in cyc_verts or graph.edges[ei].v in cyc_verts)
        ]
        if not incident:
            leaves |= cyc_verts
        elif len(incident) == 1:
            e = graph.edges[incident[0]]
            leaves |= cyc_verts - {e.u, e.v}
    return frozenset(leaves)


def is_tree(graph: MetricGraph) -> bool:
    return graph.is_connected() and graph.n_edges == graph.n_vertices - 1

def is_linear(graph: MetricGraph) -> bool:
    return is_tree(graph) and max(graph.degrees, default=0) <= 2


def spanning_forest(graph: MetricGraph) -> tuple[list[int], list[int]]:
    """BFS forest: (parent vertex per vertex, entering edge per vertex; -1 at roots)."""
    parent = [-1] * graph.n_vertices
    via = [-1] * graph.n_vertices
    seen = [False] * graph.n_vertices
    for root in range(graph.n_vertices):
        if seen[root]:
            continue
        seen[root] = True
        queue = [root]
        while queue:
            v = queue.pop(0)
            for a in graph.out_arcs[v]:
                w = graph.arc_head(a)
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    via[w] = a >> 1
                    queue.append(w)
    return parent, via


def fundamental_cycles(graph: MetricGraph) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """One cycle per non-forest edge: (vertex sequence, edge sequence).

    Edge k of the result joins vertex k and vertex k+1 (mod length).
    Self-loops are skipped.
    """
    parent, via = spanning_forest(graph)
    tree_edges = {e for e in via if e != -1}

    def root_path(v: int) -> list[int]:
        path = [v]
        while parent[path[-1]] != -1:
            path.append(parent[path[-1]])
        return path

    cycles = []
    for ei, e in enumerate(graph.edges):
        if ei in tree_edges or e.u == e.v:
            continue
        pu, pv = root_path(e.u), root_path(e.v)
        anc = {v: i for i, v in enumerate(pu)}
        j = next(i for i, v in enumerate(pv) if v in anc)
        meet = pv[j]
        # e.u .. meet .. e.v, closed by ei
        up = pu[: anc[meet] + 1]
        down = pv[:j]
        verts = up + down[::-1]
        edges = [via[v] for v in up[:-1]] + [via[v] for v in down][::-1] + [ei]
        cycles.append((tuple(verts), tuple(edges)))
    return cycles


def _component_canonical(graph: MetricGraph, verts: list[int]) -> tuple:
    local = {v: i for i, v in enumerate(verts)}
    k = len(verts)
    edges = [
        (local[e.u], local[e.v], e.length)
        for e in graph.edges
        if e.u in local and e.v in local
    ]

    incident: list[list[tuple[int, int]]] = [[] for _ in range(k)]  # (length, other)
    for u, v, ln in edges:
        incident[u].append((ln, v))
        incident[v].append((ln, u))

    colors = [tuple(sorted(ln for ln, _ in incident[v])) for v in range(k)]
    colors = _rank(colors)
    while True:
        sigs = [
            (colors[v], tuple(sorted((ln, colors[w]) for ln, w in incident[v])))
            for v in range(k)
        ]
        new = _rank(sigs)
        if new == colors:
            break
        colors = new

    cells: dict[int, list[int]] = {}
    for v in range(k):
        cells.setdefault(colors[v], []).append(v)
    ordered_cells = [cells[c] for c in sorted(cells)]

    if reduce(lambda acc, c: acc * math.factorial(len(c)), ordered_cells, 1) > _CANON_BUDGET:
        raise GraphError("canonicalization budget exceeded: too many symmetric vertices")

    best = None
    for perms in product(*(permutations(c) for c in ordered_cells)):
        pos: dict[int, int] = {}
        i = 0
        for cell in perms:
            for v in cell:
                pos[v] = i
                i += 1
        labeled = tuple(
            sorted((min(pos[u], pos[v]), max(pos[u], pos[v]), ln) for u, v, ln in edges)
        )
        if best is None or labeled < best:
            best = labeled
    return (k, best)


def _rank(values: list) -> list[int]:
    order = {v: i for i, v in enumerate(sorted(set(values)))}
    return [order[v] for v in values]


def canonical_form(graph: MetricGraph, max_vertices: int = 16) -> bytes:
    """Canonical byte string: equal iff isomorphic as length-labeled multigraphs.

    Color refinement followed by brute-force permutation within refinement
    cells, per connected component; component forms are sorted. Lengths
    compared in scaled units.
    """
    if graph.n_vertices > max_vertices:
        raise GraphError(f"size cap exceeded: {graph.n_vertices} > {max_vertices} vertices")
    parts = sorted(
        _component_canonical(graph, sorted(comp)) for comp in graph.connected_components()
    )
    return repr((graph.n_vertices, parts)).encode("ascii")
