"""Command-line front end binding all modules into reproducible runs.

Exit codes: 0 success, 1 a checked property was violated (theorem,
corollary, surgery postcondition), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__, serialize
from .enumeration import EnumOptions, count_partitions, enumerate_graphs
from .graph import GraphError, MetricGraph, scale_to_integer, walk_from_tokens
from .places import stabilization_oracle
from .search import (
    SearchOptions,
    conjecture_scan,
    lstdp_search,
    verify_corollary,
    verify_theorem,
)
from .simulate import (
    DPSystem,
    SimulationCapError,
    Timeline,
    compare_growth,
    merged_summary,
    simulate,
    split_components,
)
from .surgery import (
    cut_cycle_report,
    greedy_reorder,
    reduce_degrees,
    relocate_report,
    to_bead,
)

USAGE_ERROR = 2
VERDICT_ERROR = 1


@dataclass(frozen=True)
class RunConfig:
    """Validated shape of one CLI invocation."""

    command: str
    graph_path: str | None
    edges_inline: bool
    jobs: int
    format: str | None
    output: str | None

    @staticmethod
    def from_args(args: argparse.Namespace) -> "RunConfig":
        cfg = RunConfig(
            command=args.command,
            graph_path=getattr(args, "graph", None),
            edges_inline=bool(getattr(args, "edges", None)),
            jobs=getattr(args, "jobs", 1),
            format=getattr(args, "format", None),
            output=getattr(args, "output", None),
        )
        if cfg.jobs < 1:
            raise GraphError("--jobs must be at least 1")
        if cfg.format is not None and cfg.format not in ("json", "csv", "dot"):
            raise GraphError(f"unknown format {cfg.format!r}")
        if cfg.command == "verify-corollary" and bool(cfg.graph_path) == cfg.edges_inline:
            raise GraphError(
                "verify-corollary needs exactly one input source: --graph or --edges"
            )
        return cfg


def _parse_edges(spec: str) -> list[Fraction]:
    try:
        return [serialize.parse_rational(tok.strip()) for tok in spec.split(",") if tok.strip()]
    except GraphError as exc:
        raise GraphError(f"--edges {spec!r}: {exc}") from None


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_system(args: argparse.Namespace) -> tuple[MetricGraph, list[int]]:
    graph, points = serialize.load_graph(args.graph, getattr(args, "allow_loops", False))
    if getattr(args, "points", None):
        points = [
            graph.vertex_index[name]
            for name in args.points.split(",")
            if name
        ]
    return graph, points


def _simulate_possibly_disconnected(
    graph: MetricGraph, points: list[int], max_ticks: int | None
) -> Timeline:
    if graph.is_connected():
        return simulate(DPSystem.make(graph, points), max_ticks)
    parts = split_components(graph, points)
    if not parts:
        raise GraphError("no connected component holds an initial point")
    tls = [simulate(p, max_ticks) for p in parts]
    t_s, period, _ = merged_summary(tls)
    horizon = t_s + period + 1
    eid_count: dict[str, list[int]] = {}
    for tl in tls:
        for i, e in enumerate(tl.system.graph.edges):
            eid_count[e.eid] = [tl.per_edge_at(t)[i] for t in range(horizon)]
    zero = [0] * horizon
    merged = Timeline(DPSystem.make(graph, points))
    merged.n = [sum(tl.n_at(t) for tl in tls) for t in range(horizon)]
    merged.per_edge = [
        tuple(eid_count.get(e.eid, zero)[t] for e in graph.edges) for t in range(horizon)
    ]
    merged.coll = set().union(*(tl.coll for tl in tls))
    merged.arrivals_log = [{} for _ in range(horizon)]
    merged.t_s = t_s
    merged.period = period
    return merged


# -- subcommands --------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    graph, points = _load_system(args)
    tl = _simulate_possibly_disconnected(graph, points, args.max_ticks)
    if args.format == "json":
        _write(serialize.dumps(serialize.timeline_to_json(tl)), args.output)
    elif args.format == "csv":
        _write(serialize.timeline_csv(tl), args.output)
    elif args.format == "dot":
        _write(serialize.render_dot(graph, points), args.output)
    if args.plot:
        from . import plots

        plots.save_timeline_plot(tl, args.plot)
    return 0


def _cmd_classes(args: argparse.Namespace) -> int:
    graph, points = _load_system(args)
    if not points:
        raise GraphError("classes needs initial points (graph JSON 'points' or --points)")
    res = stabilization_oracle(graph, points)
    data = serialize.places_to_json(graph, res.tables)
    data["t_s"] = serialize.frac_str(res.t_s * graph.scale)
    data["N_stable"] = res.n_stable
    data["lstEdge"] = graph.edges[res.lst_edge].eid
    data["lstWalk"] = res.lst_walk.tokens(graph)
    _write(serialize.dumps(data), args.output)
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    ms = scale_to_integer(_parse_edges(args.edges))
    opts = EnumOptions(
        allow_loops=args.allow_loops,
        connected_only=not args.disconnected,
        max_edges=args.max_edges,
    )
    if args.count_only:
        _write(f"{sum(1 for _ in enumerate_graphs(ms, opts))}\n", args.output)
        return 0
    lines = [
        json.dumps(serialize.graph_to_json(g), sort_keys=True)
        for g in enumerate_graphs(ms, opts)
    ]
    _write("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_count_partitions(args: argparse.Namespace) -> int:
    ms = scale_to_integer(_parse_edges(args.edges))
    opts = EnumOptions(
        allow_loops=args.allow_loops,
        connected_only=not args.disconnected,
        max_edges=args.max_edges,
    )
    _write(f"{count_partitions(ms, opts)}\n", args.output)
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    ms = scale_to_integer(_parse_edges(args.edges))
    opts = SearchOptions(
        multi_point=args.multi_point,
        jobs=args.jobs,
        enum=EnumOptions(allow_loops=args.allow_loops, connected_only=not args.disconnected),
    )
    result = lstdp_search(ms, opts)
    report = serialize.dumps(serialize.search_result_to_json(result))
    if args.report:
        _write(report, args.report)
        print(
            f"max t_s = {serialize.frac_str(result.max_ts_original)} "
            f"({len(result.witnesses)} witnesses, {result.graphs_enumerated} graphs); "
            f"report written to {args.report}"
        )
    else:
        _write(report, args.output)
    if args.plot:
        from . import plots

        plots.save_search_plot(result, args.plot)
    return 0


def _cmd_verify_theorem(args: argparse.Namespace) -> int:
    report = verify_theorem(
        scale_to_integer(_parse_edges(args.edges)),
        SearchOptions(jobs=args.jobs),
    )
    _write(serialize.dumps(serialize.theorem_report_to_json(report)), args.output)
    return 0 if report.verdict else VERDICT_ERROR


def _cmd_verify_corollary(args: argparse.Namespace) -> int:
    if args.graph:
        graph, points = _load_system(args)
        if not points:
            raise GraphError("verify-corollary needs initial points")
        reports = [verify_corollary(DPSystem.make(graph, points))]
    else:
        ms = scale_to_integer(_parse_edges(args.edges))
        rng = random.Random(args.seed)
        pool = [
            (g, v)
            for g in enumerate_graphs(ms, EnumOptions())
            for v in range(g.n_vertices)
        ]
        take = min(args.sample, len(pool))
        reports = [
            verify_corollary(DPSystem.make(g, [v]))
            for g, v in rng.sample(pool, take)
        ]
    payload = {
        "version": __version__,
        "verdict": all(r.verdict for r in reports),
        "reports": [serialize.corollary_report_to_json(r) for r in reports],
    }
    _write(serialize.dumps(payload), args.output)
    return 0 if payload["verdict"] else VERDICT_ERROR


def _cmd_transform(args: argparse.Namespace) -> int:
    graph, points = _load_system(args)

    if args.op == "greedy-walk":
        if not args.walk:
            raise GraphError("--walk is required for greedy-walk")
        start = args.start
        if start is None and points:
            start = graph.vertex_names[points[0]]
        if not start:
            raise GraphError("--start (or graph points) required for greedy-walk")
        walk = walk_from_tokens(graph, start, args.walk.split(","))
        out = greedy_reorder(graph, walk)
        _write(
            serialize.dumps(
                {
                    "version": __version__,
                    "walkIn": walk.tokens(graph),
                    "walkOut": out.tokens(graph),
                    "length": serialize.frac_str(out.length(graph) * graph.scale),
                }
            ),
            args.output,
        )
        return 0

    if not points:
        raise GraphError("transform needs initial points for verification runs")
    system = DPSystem.make(graph, points)
    if args.op == "cut-cycle":
        if not (args.cycle and args.split_edge and args.split_head):
            raise GraphError("cut-cycle needs --cycle, --split-edge and --split-head")
        report = cut_cycle_report(system, args.cycle.split(","), args.split_edge, args.split_head)
    elif args.op == "to-bead":
        walk = None
        if args.walk:
            start = args.start or graph.vertex_names[points[0]]
            walk = walk_from_tokens(graph, start, args.walk.split(","))
        report = to_bead(system, walk)
    elif args.op == "relocate":
        if not (args.bridge and args.far and args.attach_to):
            raise GraphError("relocate needs --bridge, --far and --attach-to")
        report = relocate_report(system, args.bridge, args.far, args.attach_to)
    elif args.op == "reduce-degrees":
        report = reduce_degrees(system)
    else:  # pragma: no cover - argparse restricts choices
        raise GraphError(f"unknown op {args.op}")

    if args.out_graph:
        _write(
            serialize.dumps(
                serialize.graph_to_json(report.after.graph, report.after.points)
            ),
            args.out_graph,
        )
    _write(serialize.dumps(serialize.surgery_report_to_json(report)), args.output)
    return 0 if report.verdict == "held" else VERDICT_ERROR


def _cmd_compare(args: argparse.Namespace) -> int:
    graph_a, points_a = serialize.load_graph(args.graph)
    graph_b, points_b = serialize.load_graph(args.against)
    tl_a = simulate(DPSystem.make(graph_a, points_a), args.max_ticks)
    tl_b = simulate(DPSystem.make(graph_b, points_b), args.max_ticks)
    verdict = compare_growth(tl_a, tl_b)
    _write(
        serialize.dumps(serialize.growth_verdict_to_json(verdict, graph_a.scale)),
        args.output,
    )
    if args.plot:
        from . import plots

        plots.save_compare_plot(tl_a, tl_b, (args.graph, args.against), args.plot)
    return 0


def _cmd_conjecture(args: argparse.Namespace) -> int:
    families = [_parse_edges(s) for s in args.edges or []]
    for m in range(2, (args.unit_max or 1) + 1):
        families.append([Fraction(1)] * m)
    if not families:
        raise GraphError("conjecture-scan needs --edges and/or --unit-max")
    rows = conjecture_scan(families, SearchOptions(jobs=args.jobs))
    if args.format == "csv":
        _write(serialize.conjecture_rows_csv(rows), args.output)
    else:
        _write(serialize.dumps(serialize.conjecture_rows_to_json(rows)), args.output)
    if args.plot:
        from . import plots

        plots.save_conjecture_plot(rows, args.plot)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpsim",
        description="Dynamic-point systems on metric graphs: simulate, analyze, search.",
    )
    parser.add_argument("--version", action="version", version=f"dpsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(
        p: argparse.ArgumentParser,
        formats: tuple[str, ...] = ("json",),
        plot: bool = False,
    ) -> None:
        p.add_argument("-o", "--output", help="output path (default stdout)")
        if formats:
            p.add_argument("--format", choices=formats, default=formats[0])
        if plot:
            p.add_argument("--plot", metavar="PNG", help="also render a figure to PNG")

    p = sub.add_parser("simulate", help="run a system to stabilization")
    p.add_argument("--edges-file", "--graph", dest="graph", required=True,
                   help="graph JSON (vertices, edges, points)")
    p.add_argument("--points", help="comma-separated initial-point vertices (overrides JSON)")
    p.add_argument("--max-ticks", type=int, default=None)
    p.add_argument("--allow-loops", action="store_true")
    common(p, ("csv", "json", "dot"), plot=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("classes", help="walk classes, point-places and saturations")
    p.add_argument("--edges-file", "--graph", dest="graph", required=True)
    p.add_argument("--points", help="override the JSON points")
    common(p, ())
    p.set_defaults(func=_cmd_classes)

    p = sub.add_parser("enumerate", help="all graphs from an edge multiset")
    p.add_argument("--edges", required=True, help="comma-separated lengths, e.g. 1,1,2")
    p.add_argument("--allow-loops", action="store_true")
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--max-edges", type=int, default=7)
    p.add_argument("--count-only", action="store_true")
    common(p, ())
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("count-partitions", help="raw pre-dedup partition count")
    p.add_argument("--edges", required=True)
    p.add_argument("--allow-loops", action="store_true")
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--max-edges", type=int, default=7)
    common(p, ())
    p.set_defaults(func=_cmd_count_partitions)

    p = sub.add_parser("search", help="exhaustive longest-stabilization search")
    p.add_argument("--edges", required=True)
    p.add_argument("--multi-point", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--allow-loops", action="store_true")
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--report", help="write the full report JSON here")
    common(p, (), plot=True)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("verify-theorem", help="bead/degree-3/terminal witness exists")
    p.add_argument("--edges", required=True)
    p.add_argument("--jobs", type=int, default=1)
    common(p, ())
    p.set_defaults(func=_cmd_verify_theorem)

    p = sub.add_parser("verify-corollary", help="a linear system dominates the input")
    p.add_argument("--edges-file", "--graph", dest="graph")
    p.add_argument("--points")
    p.add_argument("--edges", help="sample systems from this multiset instead")
    p.add_argument("--sample", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    common(p, ())
    p.set_defaults(func=_cmd_verify_corollary)

    p = sub.add_parser("transform", help="graph surgery with verified reports")
    p.add_argument("--op", required=True,
                   choices=["cut-cycle", "greedy-walk", "to-bead", "relocate", "reduce-degrees"])
    p.add_argument("--edges-file", "--graph", dest="graph", required=True)
    p.add_argument("--points")
    p.add_argument("--cycle", help="cut-cycle: comma-separated cycle vertices")
    p.add_argument("--split-edge", help="cut-cycle: edge id to re-target")
    p.add_argument("--split-head", help="cut-cycle: endpoint to duplicate")
    p.add_argument("--walk", help="arc tokens, e.g. e2,~e2,e3")
    p.add_argument("--start", help="walk start vertex (defaults to the initial point)")
    p.add_argument("--bridge", help="relocate: bridge edge id")
    p.add_argument("--far", help="relocate: bridge endpoint on the moved side")
    p.add_argument("--attach-to", help="relocate: new anchor vertex")
    p.add_argument("--out-graph", help="write the transformed graph JSON here")
    common(p, ())
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("compare", help="pointwise growth dominance of two systems")
    p.add_argument("--edges-file", "--graph", dest="graph", required=True, help="system A")
    p.add_argument("--against", required=True, help="system B (A <= B is checked)")
    p.add_argument("--max-ticks", type=int, default=None)
    common(p, (), plot=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("conjecture-scan", help="max t_s vs best linear t_s ratios")
    p.add_argument("--edges", action="append", help="repeatable multiset, e.g. --edges 1,1,2")
    p.add_argument("--unit-max", type=int, help="also scan unit multisets m=2..M")
    p.add_argument("--jobs", type=int, default=1)
    common(p, ("json", "csv"), plot=True)
    p.set_defaults(func=_cmd_conjecture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        RunConfig.from_args(args)
        return args.func(args)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SimulationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
