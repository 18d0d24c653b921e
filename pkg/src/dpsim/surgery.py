"""Graph surgery: cycle cutting, greedy Fleury reordering, bead construction,
subgraph relocation and degree reduction, each with machine-checked reports.

None of the transformations trusts its own postconditions: every report
carries before/after simulations and a verdict, so a construction that
fails on some input surfaces as ``violated`` instead of silently lying.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .graph import GraphError, MetricGraph, Walk, shortest_distance
from .places import stabilization_oracle
from .simulate import DPSystem, Timeline, compare_growth, simulate
from .structure import bead_leaves, blocks_bridges, fundamental_cycles, is_bead


@dataclass(frozen=True)
class Multisupport:
    """Arc-entry multiplicities of a walk, with per-edge parity tags."""

    graph: MetricGraph
    arc_counts: tuple[int, ...]

    @property
    def edge_counts(self) -> tuple[int, ...]:
        return tuple(
            self.arc_counts[2 * i] + self.arc_counts[2 * i + 1]
            for i in range(self.graph.n_edges)
        )

    def parity(self, edge: int) -> str:
        return "odd" if self.edge_counts[edge] % 2 else "even"

    def odd_edges(self) -> list[int]:
        return [e for e, c in enumerate(self.edge_counts) if c % 2]

    def reduced_arc_counts(self) -> tuple[int, ...]:
        """One arc for odd edges (majority direction), two for even ones."""
        out = [0] * len(self.arc_counts)
        for e, c in enumerate(self.edge_counts):
            if c == 0:
                continue
            fwd, rev = self.arc_counts[2 * e], self.arc_counts[2 * e + 1]
            if c % 2:
                out[2 * e if fwd >= rev else 2 * e + 1] = 1
            else:
                out[2 * e] = 1
                out[2 * e + 1] = 1
        return tuple(out)


def classify_parity(graph: MetricGraph, walk: Walk) -> Multisupport:
    walk.validate(graph)
    counts = [0] * (2 * graph.n_edges)
    for a in walk.arcs:
        counts[a] += 1
    return Multisupport(graph, tuple(counts))


# -- greedy Fleury reordering ------------------------------------------


def greedy_reorder(graph: MetricGraph, walk: Walk) -> Walk:
    """Reorder a walk to exhaust each edge back and forth on first contact.

    Fleury over the walk's multisupport, preferring (1) another copy of the
    edge just traversed, (2) even-multiplicity edges, (3) lowest edge id,
    skipping any choice that would strand untraversed copies. Start, end,
    length and edge multiplicities are preserved.
    """
    walk.validate(graph)
    if not walk.arcs:
        return walk
    remaining = Counter(a >> 1 for a in walk.arcs)
    parity = {e: c % 2 for e, c in remaining.items()}

    def feasible(at: int) -> bool:
        # all edges with copies left must stay reachable from `at`
        live = {e for e, c in remaining.items() if c}
        if not live:
            return True
        need = set()
        adj: dict[int, list[int]] = {}
        for e in live:
            ed = graph.edges[e]
            need.add(ed.u)
            need.add(ed.v)
            adj.setdefault(ed.u, []).append(ed.v)
            adj.setdefault(ed.v, []).append(ed.u)
        seen = {at}
        stack = [at]
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return need <= seen

    arcs: list[int] = []
    pos = walk.start
    last_edge = -1
    while sum(remaining.values()):
        candidates = sorted(
            {a >> 1 for a in graph.out_arcs[pos] if remaining[a >> 1] > 0},
            key=lambda e: (e != last_edge, parity[e] == 1, e),
        )
        for e in candidates:
            ed = graph.edges[e]
            arc = 2 * e if ed.u == pos else 2 * e + 1
            remaining[e] -= 1
            if feasible(graph.arc_head(arc)):
                arcs.append(arc)
                pos = graph.arc_head(arc)
                last_edge = e
                break
            remaining[e] += 1
        else:
            raise AssertionError("Fleury found no feasible continuation")

    out = Walk(walk.start, tuple(arcs))
    assert out.end(graph) == walk.end(graph)
    assert out.length(graph) == walk.length(graph)
    return out


# -- cycle cutting ------------------------------------------------------


def _fresh_name(graph: MetricGraph, base: str) -> str:
    name = base + "'"
    while name in graph.vertex_index:
        name += "'"
    return name


def _cycle_check(graph: MetricGraph, cycle: Sequence[str]) -> list[int]:
    if len(cycle) < 2:
        raise GraphError("a cycle needs at least two vertices")
    idx = []
    for name in cycle:
        if name not in graph.vertex_index:
            raise GraphError(f"cycle vertex {name!r} not in graph")
        idx.append(graph.vertex_index[name])
    if len(set(idx)) != len(idx):
        raise GraphError("not a cycle: repeated vertex")
    pairs = list(zip(idx, idx[1:] + idx[:1]))
    if len(idx) == 2:
        between = [
            e for e in graph.edges if {graph.vertex_index[n] for n in cycle} == {e.u, e.v}
        ]
        if len(between) < 2:
            raise GraphError("not a cycle: a 2-cycle needs parallel edges")
    else:
        for u, v in pairs:
            if all(graph.arc_head(a) != v for a in graph.out_arcs[u]):
                raise GraphError("not a cycle: consecutive vertices not adjacent")
    return idx


def cut_cycle(
    graph: MetricGraph, cycle: Sequence[str], split_edge: str, split_head: str
) -> MetricGraph:
    """Split a cycle by re-targeting one arc's head to a fresh vertex copy.

    The edge named ``split_edge`` must join two consecutive cycle vertices;
    its endpoint ``split_head`` is duplicated and the edge re-attached to
    the duplicate, leaving the edge-length multiset intact.
    """
    idx = _cycle_check(graph, cycle)
    if split_edge not in graph.edge_index:
        raise GraphError(f"unknown edge id {split_edge!r}")
    e = graph.edges[graph.edge_index[split_edge]]
    pairs = {frozenset(p) for p in zip(idx, idx[1:] + idx[:1])}
    if frozenset((e.u, e.v)) not in pairs:
        raise GraphError(f"edge {split_edge} does not lie on the given cycle")
    if split_head not in graph.vertex_index:
        raise GraphError(f"unknown vertex {split_head!r}")
    head = graph.vertex_index[split_head]
    if head not in (e.u, e.v):
        raise GraphError(f"vertex {split_head} is not an endpoint of {split_edge}")

    fresh = _fresh_name(graph, split_head)
    names = graph.vertex_names + (fresh,)
    edges = []
    for ed in graph.edges:
        if ed.eid == split_edge:
            if ed.u == head:
                edges.append((ed.eid, fresh, graph.vertex_names[ed.v], ed.length))
            else:
                edges.append((ed.eid, graph.vertex_names[ed.u], fresh, ed.length))
        else:
            edges.append((ed.eid, graph.vertex_names[ed.u], graph.vertex_names[ed.v], ed.length))
    return MetricGraph.build(names, tuple(edges), graph.scale, graph.allow_loops)


# -- subgraph relocation -------------------------------------------------


def relocate_subgraph(
    graph: MetricGraph, bridge: str, far: str, attach_to: str
) -> MetricGraph:
    """Detach the component hanging off a bridge and re-hang it elsewhere.

    The bridge keeps its id and length; it ends up joining ``attach_to``
    to the far component, whose internal structure is untouched.
    """
    if bridge not in graph.edge_index:
        raise GraphError(f"unknown edge id {bridge!r}")
    ei = graph.edge_index[bridge]
    if ei not in blocks_bridges(graph).bridges:
        raise GraphError(f"edge {bridge} is not a bridge")
    e = graph.edges[ei]
    for name in (far, attach_to):
        if name not in graph.vertex_index:
            raise GraphError(f"unknown vertex {name!r}")
    far_i = graph.vertex_index[far]
    if far_i not in (e.u, e.v):
        raise GraphError(f"vertex {far} is not an endpoint of {bridge}")
    comp = graph.component_of(far_i, frozenset([ei]))
    attach_i = graph.vertex_index[attach_to]
    if attach_i in comp:
        raise GraphError(
            f"cannot attach inside the moved component (would disconnect at {attach_to})"
        )
    edges = tuple(
        (ed.eid, attach_to if i == ei else graph.vertex_names[ed.u],
         far if i == ei else graph.vertex_names[ed.v], ed.length)
        for i, ed in enumerate(graph.edges)
    )
    return MetricGraph.build(graph.vertex_names, edges, graph.scale, graph.allow_loops)


# -- surgery reports ------------------------------------------------------


@dataclass
class SurgeryReport:
    operation: str
    params: dict
    before: DPSystem
    after: DPSystem
    before_timeline: Timeline
    after_timeline: Timeline
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    walk_in: Walk | None = None
    walk_out: Walk | None = None

    @property
    def verdict(self) -> str:
        return "held" if all(ok for _, ok, _ in self.checks) else "violated"


def cut_cycle_report(
    system: DPSystem, cycle: Sequence[str], split_edge: str, split_head: str
) -> SurgeryReport:
    graph = system.graph
    out_graph = cut_cycle(graph, cycle, split_edge, split_head)
    out = DPSystem.from_names(out_graph, [graph.vertex_names[v] for v in system.points])
    before_tl = simulate(system)
    after_tl = simulate(out)
    growth = compare_growth(after_tl, before_tl)
    checks = [
        (
            "edge multiset preserved",
            sorted(out_graph.edge_lengths()) == sorted(graph.edge_lengths()),
            "",
        ),
        ("vertex count +1", out_graph.n_vertices == graph.n_vertices + 1, ""),
        (
            "growth not increased",
            growth.dominated,
            f"violating ticks: {growth.violations[:5]}" if not growth.dominated else "",
        ),
    ]
    return SurgeryReport(
        "cut-cycle",
        {"cycle": list(cycle), "split_edge": split_edge, "split_head": split_head},
        system,
        out,
        before_tl,
        after_tl,
        checks,
    )


def relocate_report(
    system: DPSystem, bridge: str, far: str, attach_to: str
) -> SurgeryReport:
    graph = system.graph
    out_graph = relocate_subgraph(graph, bridge, far, attach_to)
    out = DPSystem.from_names(out_graph, [graph.vertex_names[v] for v in system.points])
    before_tl = simulate(system)
    after_tl = simulate(out)
    checks = [
        (
            "edge multiset preserved",
            sorted(out_graph.edge_lengths()) == sorted(graph.edge_lengths()),
            "",
        ),
        ("still connected", out_graph.is_connected(), ""),
    ]
    return SurgeryReport(
        "relocate",
        {"bridge": bridge, "far": far, "attach_to": attach_to},
        system,
        out,
        before_tl,
        after_tl,
        checks,
    )


# -- bead construction (the full pipeline) --------------------------------


def _visit_groups(
    graph: MetricGraph, walk: Walk, saturated_edge: int | None = None
) -> dict[int, list[list[tuple[int, int]]]]:
    """Group edge-endpoints at each vertex by the walk's arrive/leave links.

    An endpoint token is (edge index, side), side 0 for the edge's u end.
    Each visit of the walk at a vertex links the endpoint it arrived
    through with the endpoint it left through; connected groups of
    endpoints must stay on one copy of the vertex for the walk to survive
    the splitting. The final arrival additionally links to the saturated
    edge, whose new point the walk exists to deliver. Groups are ordered
    by first touch along the walk.
    """
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    first_touch: dict[tuple[int, int], int] = {}

    def find(x: tuple[int, int]) -> tuple[int, int]:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def touch(tok: tuple[int, int], when: int) -> None:
        if tok not in parent:
            parent[tok] = tok
            first_touch[tok] = when

    def union(a: tuple[int, int], b: tuple[int, int]) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    def head_token(arc: int) -> tuple[int, int]:
        return (arc >> 1, 1 - (arc & 1))  # head side: forward arc ends at v (side 1)

    def tail_token(arc: int) -> tuple[int, int]:
        return (arc >> 1, arc & 1)

    for i, arc in enumerate(walk.arcs):
        touch(tail_token(arc), 2 * i)
        touch(head_token(arc), 2 * i + 1)
        if i + 1 < len(walk.arcs):
            touch(tail_token(walk.arcs[i + 1]), 2 * i + 2)
            union(head_token(arc), tail_token(walk.arcs[i + 1]))

    if walk.arcs and walk.end(graph) == walk.start:
        # a closed tour stays one cycle: its first departure and last arrival
        # share the vertex copy
        union(tail_token(walk.arcs[0]), head_token(walk.arcs[-1]))

    if saturated_edge is not None and walk.arcs:
        end = walk.end(graph)
        e = graph.edges[saturated_edge]
        if end not in (e.u, e.v):
            raise GraphError(
                f"walk ends at {graph.vertex_names[end]}, not on edge {e.eid}"
            )
        tok = (saturated_edge, 0 if e.u == end else 1)
        touch(tok, 2 * len(walk.arcs))
        union(head_token(walk.arcs[-1]), tok)

    groups_at: dict[int, dict[tuple[int, int], list[tuple[int, int]]]] = {}
    for tok in parent:
        e, side = tok
        vert = graph.edges[e].u if side == 0 else graph.edges[e].v
        groups_at.setdefault(vert, {}).setdefault(find(tok), []).append(tok)

    ordered: dict[int, list[list[tuple[int, int]]]] = {}
    for vert, groups in groups_at.items():
        ranked = sorted(
            groups.values(), key=lambda toks: min(first_touch[t] for t in toks)
        )
        ordered[vert] = ranked
    return ordered


def bead_quotient(
    graph: MetricGraph, walk: Walk, saturated_edge: int | None = None
) -> tuple[MetricGraph, dict[str, str], Walk]:
    """Rebuild the graph so the walk survives verbatim but nothing else merges.

    Every vertex splits into one copy per walk-visit group (plus one
    default copy when only untouched endpoints remain); endpoints the walk
    never touches go to the first copy. Cycles the walk only bounces into
    fall apart and crossing patterns linearize, which is exactly the
    cutting-and-splitting of the bead construction.

    ``saturated_edge`` is the edge whose class the walk saturates; its
    endpoint at the walk's end is kept on the end copy, so the arriving
    point still spawns onto it. Cycles made of edges the walk never uses
    are split open afterwards (they only remove walks, never shorten any).
    Returns the new graph, the old-name -> first-copy-name map, and the
    re-threaded walk.
    """
    walk.validate(graph)
    groups = _visit_groups(graph, walk, saturated_edge)

    copy_names: dict[int, list[str]] = {}
    endpoint_copy: dict[tuple[int, int], int] = {}
    for v in range(graph.n_vertices):
        vgroups = groups.get(v, [])
        base = graph.vertex_names[v]
        incident = [
            (i, s)
            for i, e in enumerate(graph.edges)
            for s in ((0,) if e.u == v else ()) + ((1,) if e.v == v else ())
        ]
        untouched = [tok for tok in incident if all(tok not in grp for grp in vgroups)]
        n_copies = max(len(vgroups), 1)
        names = [base] if n_copies == 1 else [f"{base}.{k + 1}" for k in range(n_copies)]
        copy_names[v] = names
        for k, grp in enumerate(vgroups):
            for tok in grp:
                endpoint_copy[tok] = k
        for tok in untouched:
            endpoint_copy[tok] = 0

    all_names = tuple(name for v in range(graph.n_vertices) for name in copy_names[v])
    name_of: dict[tuple[int, int], str] = {}
    for (e, side), k in endpoint_copy.items():
        vert = graph.edges[e].u if side == 0 else graph.edges[e].v
        name_of[(e, side)] = copy_names[vert][k]
    edges = tuple(
        (e.eid, name_of[(i, 0)], name_of[(i, 1)], e.length)
        for i, e in enumerate(graph.edges)
    )
    out = MetricGraph.build(all_names, edges, graph.scale, graph.allow_loops)

    touched = {a >> 1 for a in walk.arcs}
    keep_end = None
    if saturated_edge is not None and walk.arcs:
        end = walk.end(graph)
        e = graph.edges[saturated_edge]
        keep_end = name_of[(saturated_edge, 0 if e.u == end else 1)]
    out = _cut_untouched_cycles(out, touched, saturated_edge, keep_end)

    if walk.arcs:
        first = walk.arcs[0]
        start_name = name_of[(first >> 1, first & 1)]
    else:
        start_name = copy_names[walk.start][0]
    new_walk = Walk(out.vertex_index[start_name], walk.arcs)
    new_walk.validate(out)

    first_copy = {graph.vertex_names[v]: copy_names[v][0] for v in range(graph.n_vertices)}
    return out, first_copy, new_walk


def _detach_endpoint(g: MetricGraph, edge: int, endpoint: int) -> MetricGraph:
    """Re-target one endpoint of an edge to a fresh vertex copy."""
    fresh = _fresh_name(g, g.vertex_names[endpoint])
    edges = []
    for i, ed in enumerate(g.edges):
        u, v = g.vertex_names[ed.u], g.vertex_names[ed.v]
        if i == edge:
            if ed.u == endpoint:
                u = fresh
            else:
                v = fresh
        edges.append((ed.eid, u, v, ed.length))
    return MetricGraph.build(g.vertex_names + (fresh,), tuple(edges), g.scale, g.allow_loops)


def _cut_untouched_cycles(
    graph: MetricGraph,
    touched: set[int],
    saturated_edge: int | None = None,
    keep_end: str | None = None,
) -> MetricGraph:
    """Open every cycle through an edge the walk never uses.

    Detaching such an edge at one endpoint removes walks without creating
    any, so saturations cannot drop and the walk itself is untouched. The
    saturated edge is cut last and only away from ``keep_end``, the copy
    where the walk's final arrival spawns onto it.
    """
    g = graph
    while True:
        on_cycles = {e for _, cycle_edges in fundamental_cycles(g) for e in cycle_edges}
        regular = sorted(e for e in on_cycles if e not in touched and e != saturated_edge)
        if regular:
            target = regular[0]
            g = _detach_endpoint(g, target, g.edges[target].v)
            continue
        if (
            saturated_edge is not None
            and saturated_edge not in touched
            and saturated_edge in on_cycles
        ):
            e = g.edges[saturated_edge]
            away = e.v if g.vertex_names[e.u] == keep_end else e.u
            g = _detach_endpoint(g, saturated_edge, away)
            continue
        return g


def to_bead(system: DPSystem, lst_walk: Walk | None = None) -> SurgeryReport:
    """Lemma-style bead construction driven by a greedy-reordered LST-walk.

    The walk defaults to the oracle's LST witness. Postconditions (output
    is bead, stabilization time not decreased, walk length preserved) are
    verified by simulation, never assumed.
    """
    graph = system.graph
    if len(system.points) != 1:
        raise GraphError("to_bead expects a single initial point")
    v0 = system.points[0]
    oracle = stabilization_oracle(graph, [v0])
    if lst_walk is None:
        lst_walk = oracle.lst_walk
    if lst_walk.start != v0:
        raise GraphError("LST-walk must start at the initial point")

    greedy = greedy_reorder(graph, lst_walk)
    end = greedy.end(graph)
    es = graph.edges[oracle.lst_edge]
    if end in (es.u, es.v):
        saturated = oracle.lst_edge
    else:
        saturated = next(
            i for i, e in enumerate(graph.edges) if end in (e.u, e.v)
        )
    out_graph, _, new_walk = bead_quotient(graph, greedy, saturated)
    out = DPSystem.make(out_graph, [new_walk.start])

    before_tl = simulate(system)
    after_tl = simulate(out)
    checks = [
        ("output is bead", is_bead(out_graph), ""),
        (
            "stabilization time not decreased",
            after_tl.t_s >= before_tl.t_s,
            f"{after_tl.t_s} < {before_tl.t_s}" if after_tl.t_s < before_tl.t_s else "",
        ),
        (
            "walk length preserved",
            new_walk.length(out_graph) == lst_walk.length(graph),
            "",
        ),
        (
            "edge multiset preserved",
            sorted(out_graph.edge_lengths()) == sorted(graph.edge_lengths()),
            "",
        ),
    ]
    return SurgeryReport(
        "to-bead",
        {"walk": lst_walk.tokens(graph)},
        system,
        out,
        before_tl,
        after_tl,
        checks,
        walk_in=lst_walk,
        walk_out=new_walk,
    )


# -- degree reduction ------------------------------------------------------


def _subgraph_without(graph: MetricGraph, drop_vertices: frozenset[int], drop_edge: int) -> MetricGraph:
    keep = [v for v in range(graph.n_vertices) if v not in drop_vertices]
    names = tuple(graph.vertex_names[v] for v in keep)
    edges = tuple(
        (e.eid, graph.vertex_names[e.u], graph.vertex_names[e.v], e.length)
        for i, e in enumerate(graph.edges)
        if i != drop_edge and e.u not in drop_vertices and e.v not in drop_vertices
    )
    return MetricGraph.build(names, edges, graph.scale, graph.allow_loops)


def reduce_degrees(system: DPSystem) -> SurgeryReport:
    """Relocate hanging subgraphs to bead leaves until max degree <= 3.

    Bridges incident to a degree>=4 vertex whose far side holds neither the
    source nor the stabilization edge are moved, lowest edge id first, to a
    bead leaf of the remaining graph on the far side of the stabilization
    edge. Targets are judged with the moved part detached, which is what
    turns a doubly-anchored cycle into a terminal one.
    """
    graph = system.graph
    if len(system.points) != 1:
        raise GraphError("reduce_degrees expects a single initial point")
    if not is_bead(graph):
        raise GraphError("reduce_degrees expects a bead graph")
    v0 = system.points[0]
    v0_name = graph.vertex_names[v0]
    oracle = stabilization_oracle(graph, [v0])
    es_id = graph.edges[oracle.lst_edge].eid

    before_tl = simulate(system)
    moves: list[dict] = []
    failure: str | None = None
    g = graph
    while True:
        degs = g.degrees
        v = next((i for i in range(g.n_vertices) if degs[i] >= 4), None)
        if v is None:
            break
        move = _eligible_move(g, v, es_id, v0_name)
        if move is None:
            failure = f"no eligible relocation for vertex {g.vertex_names[v]}"
            break
        bridge, far, target = move
        g = relocate_subgraph(g, bridge, far, target)
        moves.append({"bridge": bridge, "far": far, "attach_to": target})

    out = DPSystem.from_names(g, [v0_name])
    after_tl = simulate(out)
    checks = [
        ("relocations all found", failure is None, failure or ""),
        ("max degree <= 3", max(g.degrees) <= 3, f"degrees {g.degrees}"),
        (
            "stabilization time not decreased",
            after_tl.t_s >= before_tl.t_s,
            f"{after_tl.t_s} < {before_tl.t_s}" if after_tl.t_s < before_tl.t_s else "",
        ),
        ("output is bead", is_bead(g), ""),
    ]
    return SurgeryReport(
        "reduce-degrees",
        {"moves": moves, "e_s": es_id},
        system,
        out,
        before_tl,
        after_tl,
        checks,
    )


def _eligible_move(
    g: MetricGraph, v: int, es_id: str, v0_name: str
) -> tuple[str, str, str] | None:
    es_idx = g.edge_index[es_id]
    es = g.edges[es_idx]
    v0 = g.vertex_index[v0_name]
    du = shortest_distance(g, v0, es.u)
    dv = shortest_distance(g, v0, es.v)
    vq = es.v if (dv, es.v) >= (du, es.u) else es.u

    bridges = blocks_bridges(g).bridges
    for ei in sorted(bridges, key=lambda i: g.edges[i].eid):
        e = g.edges[ei]
        if v not in (e.u, e.v) or ei == es_idx:
            continue
        far = e.v if e.u == v else e.u
        moved = g.component_of(far, frozenset([ei]))
        if es.u in moved or v0 in moved:
            continue
        main = _subgraph_without(g, moved, ei)
        leaves = bead_leaves(main)
        # stay on the far side of the stabilization edge
        es_main = main.edge_index[es_id]
        vq_side = main.component_of(main.vertex_index[g.vertex_names[vq]], frozenset([es_main]))
        for leaf in sorted(leaves & vq_side):
            name = main.vertex_names[leaf]
            if name != g.vertex_names[v]:
                return e.eid, g.vertex_names[far], name
    return None
