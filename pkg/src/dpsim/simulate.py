"""Exact tick-by-tick evolution of dynamic points with recurrence detection.

With integer lengths and points starting at vertices, every arrival happens
at an integer time, so integer ticks are exact. Counts are sampled after the
events of each tick, i.e. they are the values on the open interval
(t, t+1), which realizes the exclusion of collision instants.

Arc occupancies are bitmasks: bit k on arc a means a point at offset k from
the tail. One tick shifts every mask left; the bit falling off the far end
is an arrival at the arc's head, and each vertex with at least one arrival
spawns offset-0 points on all of its outgoing arcs (fusion: one spawn per
arc no matter how many arrivals).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Sequence

from .graph import GraphError, MetricGraph


@dataclass(frozen=True)
class DPSystem:
    graph: MetricGraph
    points: tuple[int, ...]  # sorted initial-point vertex indices

    @staticmethod
    def make(graph: MetricGraph, points: Iterable[int]) -> "DPSystem":
        pts = tuple(sorted(set(points)))
        if not pts:
            raise GraphError("a DP-system needs at least one initial point")
        for v in pts:
            if not (0 <= v < graph.n_vertices):
                raise GraphError(f"initial point index {v} out of range")
        return DPSystem(graph, pts)

    @staticmethod
    def from_names(graph: MetricGraph, names: Iterable[str]) -> "DPSystem":
        return DPSystem.make(graph, (graph.vertex_index[n] for n in names))

    def point_names(self) -> list[str]:
        return [self.graph.vertex_names[v] for v in self.points]


@dataclass(frozen=True)
class SimState:
    """Occupancy bitmask per arc, indexed like the graph's arcs."""

    masks: tuple[int, ...]

    def offsets(self, arc: int) -> set[int]:
        m = self.masks[arc]
        return {k for k in range(m.bit_length()) if m >> k & 1}

    def count(self) -> int:
        return sum(m.bit_count() for m in self.masks)


def initial_state(system: DPSystem) -> SimState:
    """The tick-0 scatter: each initial point spawns on every outgoing arc."""
    masks = [0] * (2 * system.graph.n_edges)
    for v in system.points:
        for a in system.graph.out_arcs[v]:
            masks[a] |= 1
    return SimState(tuple(masks))


def step(state: SimState, graph: MetricGraph) -> tuple[SimState, dict[int, int]]:
    """Advance one tick; returns the new state and arrivals per vertex."""
    masks = list(state.masks)
    arrivals: dict[int, int] = {}
    for a, m in enumerate(masks):
        if not m:
            continue
        m <<= 1
        top = 1 << graph.arc_length(a)
        if m & top:
            m &= ~top
            head = graph.arc_head(a)
            arrivals[head] = arrivals.get(head, 0) + 1
        masks[a] = m
    for v in arrivals:
        for a in graph.out_arcs[v]:
            masks[a] |= 1
    return SimState(tuple(masks)), arrivals


class SimulationCapError(RuntimeError):
    """max_ticks elapsed before the state recurred; carries the partial record."""

    def __init__(self, timeline: "Timeline"):
        super().__init__(
            f"no state recurrence within {len(timeline.n) - 1} ticks; "
            "timeline is partial"
        )
        self.timeline = timeline


@dataclass
class Timeline:
    """Tick-indexed record of a simulation run.

    ``n[t]`` and ``per_edge[t]`` hold the counts on the interval (t, t+1).
    ``t_s`` is the last tick with a strict increase of ``n`` (0 if none) and
    ``period`` the detected state-recurrence cycle length.
    """

    system: DPSystem
    n: list[int] = field(default_factory=list)
    per_edge: list[tuple[int, ...]] = field(default_factory=list)
    coll: set[int] = field(default_factory=set)
    arrivals_log: list[dict[int, int]] = field(default_factory=list)
    t_s: int = 0
    period: int = 0
    truncated: bool = False

    @property
    def n_stable(self) -> int:
        return self.n[self.t_s]

    def n_at(self, t: int) -> int:
        return self.n[t] if t < len(self.n) else self.n_stable

    def per_edge_at(self, t: int) -> tuple[int, ...]:
        return self.per_edge[t] if t < len(self.per_edge) else self.per_edge[-1]


def default_max_ticks(graph: MetricGraph) -> int:
    return min(4 * (1 << min(2 * graph.total_length, 24)), 10**7)


def simulate(system: DPSystem, max_ticks: int | None = None) -> Timeline:
    """Run until the full state recurs, certifying stabilization and period."""
    graph = system.graph
    if not graph.is_connected():
        raise GraphError("simulate requires a connected graph; split components first")
    if max_ticks is None:
        max_ticks = default_max_ticks(graph)

    cap = 2 * graph.total_length
    tl = Timeline(system)
    state = initial_state(system)
    seen: dict[tuple[int, ...], int] = {}

    def record(tick: int, st: SimState, arrivals: dict[int, int]) -> None:
        per_edge = tuple(
            (st.masks[2 * i].bit_count() + st.masks[2 * i + 1].bit_count())
            for i in range(graph.n_edges)
        )
        total = sum(per_edge)
        assert total <= cap, "point count exceeded arc capacity"
        if tl.n:
            deaths = sum(arrivals.values())
            spawns = sum(len(graph.out_arcs[v]) for v in arrivals)
            assert total - tl.n[-1] == spawns - deaths, "fusion accounting broken"
            assert total >= tl.n[-1], "point count decreased"
        if any(c >= 2 for c in arrivals.values()):
            tl.coll.add(tick)
        tl.n.append(total)
        tl.per_edge.append(per_edge)
        tl.arrivals_log.append(arrivals)

    record(0, state, {})
    seen[state.masks] = 0
    tick = 0
    while True:
        tick += 1
        state, arrivals = step(state, graph)
        record(tick, state, arrivals)
        first = seen.get(state.masks)
        if first is not None:
            tl.period = tick - first
            break
        seen[state.masks] = tick
        if tick >= max_ticks:
            tl.truncated = True
            tl.t_s = _last_increase(tl.n)
            raise SimulationCapError(tl)

    tl.t_s = _last_increase(tl.n)
    assert all(
        tl.n[t] == tl.n[tl.t_s] for t in range(tl.t_s, len(tl.n))
    ), "count not constant across the detected period"
    return tl


def _last_increase(n: Sequence[int]) -> int:
    for t in range(len(n) - 1, 0, -1):
        if n[t] > n[t - 1]:
            return t
    return 0


@dataclass(frozen=True)
class GrowthVerdict:
    dominated: bool
    violations: tuple[tuple[int, int, int], ...]  # (tick, n_a, n_b)


def compare_growth(a: Timeline, b: Timeline) -> GrowthVerdict:
    """Whether a's count is <= b's at every tick (open-interval values)."""
    horizon = max(len(a.n), len(b.n))
    bad = tuple(
        (t, a.n_at(t), b.n_at(t)) for t in range(horizon) if a.n_at(t) > b.n_at(t)
    )
    return GrowthVerdict(not bad, bad)


def split_components(graph: MetricGraph, points: Sequence[int]) -> list[DPSystem]:
    """One DP-system per connected component holding at least one point."""
    systems = []
    for comp in graph.connected_components():
        pts = sorted(set(points) & comp)
        if not pts:
            continue
        verts = sorted(comp)
        names = tuple(graph.vertex_names[v] for v in verts)
        local = {v: i for i, v in enumerate(verts)}
        edges = tuple(
            (e.eid, graph.vertex_names[e.u], graph.vertex_names[e.v], e.length)
            for e in graph.edges
            if e.u in comp
        )
        sub = MetricGraph.build(names, edges, graph.scale, graph.allow_loops)
        systems.append(DPSystem.make(sub, [local[v] for v in pts]))
    return systems


def merged_summary(parts: list[Timeline]) -> tuple[int, int, int]:
    """(t_s, period, stable count) of independently evolving components."""
    t_s = max(tl.t_s for tl in parts)
    period = lcm(*(tl.period for tl in parts))
    return t_s, period, sum(tl.n_stable for tl in parts)
