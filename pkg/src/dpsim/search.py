"""Exhaustive longest-stabilization search, theorem and corollary checks.

The oracle evaluates every placement (fast path); every reported maximum is
re-verified with the simulator (slow path). A disagreement between the two
is a correctness bug and aborts loudly.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .enumeration import EnumOptions, enumerate_graphs
from .graph import EdgeMultiset, GraphError, MetricGraph, scale_to_integer
from .places import stabilization_oracle
from .simulate import DPSystem, compare_growth, simulate
from .structure import canonical_form, is_bead, is_linear, is_tree


class OracleSimMismatch(RuntimeError):
    """The analytical oracle and the simulator disagreed; abort loudly."""


@dataclass(frozen=True)
class WitnessFlags:
    is_bead: bool
    max_degree: int
    point_at_terminal: bool
    is_linear: bool
    is_tree: bool


@dataclass(frozen=True)
class Witness:
    graph: MetricGraph
    points: tuple[int, ...]
    t_s: int  # scaled ticks
    n_stable: int
    flags: WitnessFlags


@dataclass
class SearchResult:
    edges: EdgeMultiset
    max_ts: int  # scaled ticks
    witnesses: list[Witness]
    graphs_enumerated: int
    placements_evaluated: int
    ts_histogram: dict[int, int]

    @property
    def max_ts_original(self) -> Fraction:
        return self.max_ts * self.edges.factor


@dataclass(frozen=True)
class SearchOptions:
    multi_point: bool = False
    jobs: int = 1
    enum: EnumOptions = EnumOptions()


def _placements(graph: MetricGraph, multi_point: bool) -> list[tuple[int, ...]]:
    single = [(v,) for v in range(graph.n_vertices)]
    if not multi_point:
        return single
    if graph.n_vertices > 12:
        raise GraphError("multi-point scan is limited to graphs with <= 12 vertices")
    multi = [
        subset
        for k in range(2, graph.n_vertices + 1)
        for subset in combinations(range(graph.n_vertices), k)
    ]
    return single + multi


def _evaluate(args: tuple[MetricGraph, bool]) -> list[tuple[tuple[int, ...], int, int]]:
    graph, multi_point = args
    out = []
    for points in _placements(graph, multi_point):
        res = stabilization_oracle(graph, points)
        out.append((points, res.t_s, res.n_stable))
    return out


def _flags(graph: MetricGraph, points: tuple[int, ...]) -> WitnessFlags:
    return WitnessFlags(
        is_bead=is_bead(graph),
        max_degree=max(graph.degrees),
        point_at_terminal=len(points) == 1 and graph.degrees[points[0]] == 1,
        is_linear=is_linear(graph),
        is_tree=is_tree(graph),
    )


def _confirm_with_simulator(graph: MetricGraph, points: tuple[int, ...], t_s: int) -> int:
    oracle = stabilization_oracle(graph, points)
    tl = simulate(DPSystem.make(graph, points))
    stable_per_edge = tl.per_edge_at(tl.t_s)
    if tl.t_s != oracle.t_s or stable_per_edge != oracle.per_edge:
        raise OracleSimMismatch(
            f"oracle t_s={oracle.t_s} per_edge={oracle.per_edge} vs "
            f"simulator t_s={tl.t_s} per_edge={stable_per_edge} on "
            f"{[e.eid for e in graph.edges]} points={points}"
        )
    if t_s != tl.t_s:
        raise OracleSimMismatch(f"recorded t_s {t_s} != simulated {tl.t_s}")
    return tl.n_stable


def lstdp_search(
    edges: EdgeMultiset | Sequence, opts: SearchOptions = SearchOptions()
) -> SearchResult:
    """Scan every enumerated graph and placement for the longest t_s."""
    ms = edges if isinstance(edges, EdgeMultiset) else scale_to_integer(edges)
    graphs = list(enumerate_graphs(ms, opts.enum))

    work = [(g, opts.multi_point) for g in graphs]
    if opts.jobs > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            evaluated = list(pool.map(_evaluate, work, chunksize=4))
    else:
        evaluated = [_evaluate(w) for w in work]

    histogram: dict[int, int] = {}
    best = -1
    raw: list[tuple[MetricGraph, tuple[int, ...], int, int]] = []
    placements = 0
    for graph, results in zip(graphs, evaluated):
        for points, t_s, n_stable in results:
            placements += 1
            histogram[t_s] = histogram.get(t_s, 0) + 1
            best = max(best, t_s)
            raw.append((graph, points, t_s, n_stable))

    witnesses = []
    for graph, points, t_s, n_stable in raw:
        if t_s != best:
            continue
        sim_n = _confirm_with_simulator(graph, points, t_s)
        if sim_n != n_stable:
            raise OracleSimMismatch(
                f"stabilized count mismatch: oracle {n_stable} vs simulator {sim_n}"
            )
        witnesses.append(Witness(graph, points, t_s, n_stable, _flags(graph, points)))
    witnesses.sort(key=lambda w: (canonical_form(w.graph), w.points))

    return SearchResult(ms, best, witnesses, len(graphs), placements, histogram)


@dataclass
class TheoremReport:
    result: SearchResult
    verdict: bool
    witness: Witness | None


def verify_theorem(
    edges: EdgeMultiset | Sequence, opts: SearchOptions = SearchOptions()
) -> TheoremReport:
    """Some longest-t_s witness must be bead, degree <= 3, point at a leaf."""
    result = lstdp_search(edges, opts)
    witness = next(
        (
            w
            for w in result.witnesses
            if w.flags.is_bead and w.flags.max_degree <= 3 and w.flags.point_at_terminal
        ),
        None,
    )
    return TheoremReport(result, witness is not None, witness)


# -- linear systems ---------------------------------------------------------


def linear_arrangements(lengths: Sequence[int]) -> list[tuple[int, ...]]:
    """Orderings of the length multiset, deduplicated up to reversal."""
    seen = set()
    out = []
    for perm in sorted(set(permutations(lengths))):
        key = min(perm, tuple(reversed(perm)))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def linear_graph(lengths: Sequence[int], factor: Fraction = Fraction(1)) -> MetricGraph:
    names = tuple(f"v{i}" for i in range(len(lengths) + 1))
    edges = tuple(
        (f"e{i + 1}", names[i], names[i + 1], ln) for i, ln in enumerate(lengths)
    )
    return MetricGraph.build(names, edges, factor)


def best_linear_ts(ms: EdgeMultiset) -> int:
    """Longest t_s over linear arrangements and single-point placements."""
    best = 0
    for arrangement in linear_arrangements(ms.scaled):
        graph = linear_graph(arrangement, ms.factor)
        for v in range(graph.n_vertices):
            best = max(best, stabilization_oracle(graph, [v]).t_s)
    return best


@dataclass
class CorollaryReport:
    system: DPSystem
    dominating: DPSystem | None
    arrangement: tuple[int, ...] | None
    placement: int | None
    placement_class: str | None  # "terminal" or "interior"
    verdict: bool


def verify_corollary(system: DPSystem) -> CorollaryReport:
    """Find a linear system whose growth never exceeds the input's."""
    graph = system.graph
    ms = EdgeMultiset(
        tuple(ln * graph.scale for ln in graph.edge_lengths()),
        tuple(graph.edge_lengths()),
        graph.scale,
    )
    base_tl = simulate(system)
    for arrangement in linear_arrangements(ms.scaled):
        lin = linear_graph(arrangement, ms.factor)
        for v in range(lin.n_vertices):
            cand = DPSystem.make(lin, [v])
            if compare_growth(simulate(cand), base_tl).dominated:
                cls = "terminal" if lin.degrees[v] == 1 else "interior"
                return CorollaryReport(system, cand, arrangement, v, cls, True)
    return CorollaryReport(system, None, None, None, None, False)


@dataclass(frozen=True)
class ConjectureRow:
    lengths: tuple[int, ...]
    max_ts: int
    best_linear: int
    ratio: Fraction
    flagged: bool  # ratio above 2


def conjecture_scan(
    families: Iterable[Sequence], opts: SearchOptions = SearchOptions()
) -> list[ConjectureRow]:
    """max t_s vs best linear t_s per multiset; degenerate 0/0 counts as 1."""
    rows = []
    for family in families:
        ms = family if isinstance(family, EdgeMultiset) else scale_to_integer(family)
        result = lstdp_search(ms, opts)
        lin = best_linear_ts(ms)
        ratio = Fraction(result.max_ts, lin) if lin else Fraction(1)
        rows.append(ConjectureRow(ms.scaled, result.max_ts, lin, ratio, ratio > 2))
    return rows
