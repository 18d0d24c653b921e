"""JSON/CSV/DOT serialization. Times cross the boundary as exact rationals
in original (unscaled) units; no floating point is ever emitted or parsed.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .graph import GraphError, MetricGraph, scale_to_integer
from .places import EdgePlaces
from .search import ConjectureRow, CorollaryReport, SearchResult, TheoremReport, Witness
from .simulate import GrowthVerdict, Timeline
from .surgery import SurgeryReport


def frac_str(x: Fraction | int) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_rational(value: Any) -> Fraction:
    """Exact parse of '1/2', '0.25', '3' or a JSON integer."""
    if isinstance(value, bool):
        raise GraphError(f"not a length: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # honor the decimal literal the user wrote, via its shortest repr
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise GraphError(f"cannot parse length {value!r}: {exc}") from None
    raise GraphError(f"cannot parse length {value!r}")


# -- graphs -----------------------------------------------------------------


def graph_to_json(graph: MetricGraph, points: Sequence[int] = ()) -> dict:
    return {
        "vertices": list(graph.vertex_names),
        "edges": [
            {
                "id": e.eid,
                "u": graph.vertex_names[e.u],
                "v": graph.vertex_names[e.v],
                "len": frac_str(e.length * graph.scale),
            }
            for e in graph.edges
        ],
        "points": [graph.vertex_names[v] for v in sorted(set(points))],
    }


def graph_from_json(data: dict, allow_loops: bool = False) -> tuple[MetricGraph, list[int]]:
    if not isinstance(data, dict):
        raise GraphError("graph JSON must be an object")
    try:
        vertices = list(data["vertices"])
        raw_edges = list(data["edges"])
    except (KeyError, TypeError) as exc:
        raise GraphError(f"graph JSON missing field: {exc}") from None
    lengths = [parse_rational(e.get("len")) for e in raw_edges]
    ms = scale_to_integer(lengths) if lengths else None
    edges = []
    for i, e in enumerate(raw_edges):
        try:
            edges.append((str(e["id"]), str(e["u"]), str(e["v"]), ms.scaled[i]))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"edge {i}: missing field {exc}") from None
    graph = MetricGraph.build(
        vertices, edges, ms.factor if ms else Fraction(1), allow_loops
    )
    points = []
    for name in data.get("points", []):
        if name not in graph.vertex_index:
            raise GraphError(f"initial point {name!r} is not a vertex")
        points.append(graph.vertex_index[name])
    return graph, points


def load_graph(path: str, allow_loops: bool = False) -> tuple[MetricGraph, list[int]]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: malformed JSON: {exc}") from None
    return graph_from_json(data, allow_loops)


# -- timelines --------------------------------------------------------------


def timeline_rows(tl: Timeline) -> list[dict]:
    graph = tl.system.graph
    last = tl.t_s + tl.period
    rows = []
    for t in range(min(last, len(tl.n) - 1) + 1):
        rows.append(
            {
                "tick": frac_str(t * graph.scale),
                "N": tl.n[t],
                "coll": t in tl.coll,
                "edges": {
                    e.eid: tl.per_edge[t][i] for i, e in enumerate(graph.edges)
                },
            }
        )
    return rows


def timeline_csv(tl: Timeline) -> str:
    graph = tl.system.graph
    header = ["tick", "N", "coll"] + [e.eid for e in graph.edges]
    lines = [",".join(header)]
    for row in timeline_rows(tl):
        lines.append(
            ",".join(
                [row["tick"], str(row["N"]), str(int(row["coll"]))]
                + [str(row["edges"][e.eid]) for e in graph.edges]
            )
        )
    lines.append(f"# t_s={frac_str(tl.t_s * graph.scale)}")
    lines.append(f"# period={frac_str(tl.period * graph.scale)}")
    lines.append(f"# N_stable={tl.n_stable}")
    return "\n".join(lines) + "\n"


def timeline_to_json(tl: Timeline) -> dict:
    graph = tl.system.graph
    return {
        "version": __version__,
        "graph": graph_to_json(graph, tl.system.points),
        "ticks": timeline_rows(tl),
        "t_s": frac_str(tl.t_s * graph.scale),
        "period": frac_str(tl.period * graph.scale),
        "N_stable": tl.n_stable,
        "coll": [frac_str(t * graph.scale) for t in sorted(tl.coll)],
        "truncated": tl.truncated,
    }


# -- place tables -----------------------------------------------------------


def places_to_json(graph: MetricGraph, tables: Sequence[EdgePlaces]) -> dict:
    out = {}
    for tab in tables:
        e = graph.edges[tab.edge]
        entries = []
        for p in tab.places:
            entries.append(
                {
                    "endpointResidue": {"vertex": graph.vertex_names[e.u], "residue": p.residue_u},
                    "pairedResidue": {"vertex": graph.vertex_names[e.v], "residue": p.residue_v},
                    "saturation": None
                    if p.saturation is None
                    else frac_str(p.saturation * graph.scale),
                    "witnessWalk": None if p.witness is None else p.witness.tokens(graph),
                }
            )
        out[e.eid] = entries
    return {"version": __version__, "edges": out}


# -- DOT --------------------------------------------------------------------


def render_dot(
    graph: MetricGraph,
    points: Sequence[int] = (),
    highlight_edges: Sequence[str] = (),
) -> str:
    """Deterministic DOT text: doubled circles for initial points, gray
    emphasis for highlighted edges."""
    pts = set(points)
    hi = set(highlight_edges)
    lines = ["graph G {", "  node [shape=circle];"]
    for i, name in enumerate(graph.vertex_names):
        attrs = ' [shape=doublecircle]' if i in pts else ""
        lines.append(f'  "{name}"{attrs};')
    for e in graph.edges:
        attrs = f'label="len={frac_str(e.length * graph.scale)}"'
        if e.eid in hi:
            attrs += ", color=gray50, penwidth=2.0"
        lines.append(
            f'  "{graph.vertex_names[e.u]}" -- "{graph.vertex_names[e.v]}" [{attrs}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- search and reports -------------------------------------------------------


def witness_to_json(w: Witness) -> dict:
    return {
        "graph": graph_to_json(w.graph, w.points),
        "ts": frac_str(w.t_s * w.graph.scale),
        "nStable": w.n_stable,
        "isBead": w.flags.is_bead,
        "maxDegree": w.flags.max_degree,
        "pointAtTerminal": w.flags.point_at_terminal,
        "isLinear": w.flags.is_linear,
        "isTree": w.flags.is_tree,
    }


def search_result_to_json(result: SearchResult) -> dict:
    return {
        "version": __version__,
        "edges": [frac_str(x) for x in result.edges.original],
        "scaledEdges": list(result.edges.scaled),
        "scaleFactor": frac_str(result.edges.factor),
        "maxTs": frac_str(result.max_ts_original),
        "witnesses": [witness_to_json(w) for w in result.witnesses],
        "stats": {
            "graphsEnumerated": result.graphs_enumerated,
            "placementsEvaluated": result.placements_evaluated,
            "tsHistogram": {
                frac_str(k * result.edges.factor): v
                for k, v in sorted(result.ts_histogram.items())
            },
        },
    }


def theorem_report_to_json(report: TheoremReport) -> dict:
    return {
        "version": __version__,
        "verdict": report.verdict,
        "witness": None if report.witness is None else witness_to_json(report.witness),
        "search": search_result_to_json(report.result),
    }


def corollary_report_to_json(report: CorollaryReport) -> dict:
    graph = report.system.graph
    return {
        "version": __version__,
        "verdict": report.verdict,
        "system": graph_to_json(graph, report.system.points),
        "dominating": None
        if report.dominating is None
        else graph_to_json(report.dominating.graph, report.dominating.points),
        "arrangement": None
        if report.arrangement is None
        else [frac_str(x * graph.scale) for x in report.arrangement],
        "placementClass": report.placement_class,
    }


def growth_verdict_to_json(v: GrowthVerdict, scale: Fraction) -> dict:
    return {
        "version": __version__,
        "dominated": v.dominated,
        "violations": [
            {"tick": frac_str(t * scale), "a": na, "b": nb} for t, na, nb in v.violations
        ],
    }


def surgery_report_to_json(report: SurgeryReport) -> dict:
    return {
        "version": __version__,
        "operation": report.operation,
        "params": report.params,
        "verdict": report.verdict,
        "checks": [
            {"name": name, "ok": ok, "detail": detail}
            for name, ok, detail in report.checks
        ],
        "input": graph_to_json(report.before.graph, report.before.points),
        "output": graph_to_json(report.after.graph, report.after.points),
        "before": timeline_to_json(report.before_timeline),
        "after": timeline_to_json(report.after_timeline),
        "walkIn": None
        if report.walk_in is None
        else report.walk_in.tokens(report.before.graph),
        "walkOut": None
        if report.walk_out is None
        else report.walk_out.tokens(report.after.graph),
    }


def conjecture_rows_to_json(rows: Sequence[ConjectureRow]) -> dict:
    return {
        "version": __version__,
        "rows": [
            {
                "edges": list(r.lengths),
                "maxTs": r.max_ts,
                "bestLinearTs": r.best_linear,
                "ratio": frac_str(r.ratio),
                "flagged": r.flagged,
            }
            for r in rows
        ],
    }


def conjecture_rows_csv(rows: Sequence[ConjectureRow]) -> str:
    lines = ["edges,max_ts,best_linear_ts,ratio,flagged"]
    for r in rows:
        lines.append(
            f"{' '.join(map(str, r.lengths))},{r.max_ts},{r.best_linear},"
            f"{frac_str(r.ratio)},{int(r.flagged)}"
        )
    return "\n".join(lines) + "\n"


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
