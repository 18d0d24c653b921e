"""Report figures rendered to files next to the delimited output."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .search import ConjectureRow, SearchResult
from .simulate import Timeline


def save_timeline_plot(tl: Timeline, path: str) -> str:
    graph = tl.system.graph
    scale = float(graph.scale)
    rows = min(tl.t_s + tl.period, len(tl.n) - 1) + 1
    ts = [t * scale for t in range(rows)]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(ts, tl.n[:rows], where="post", lw=2, label="N(t)")
    for i, e in enumerate(graph.edges):
        ax.step(
            ts,
            [tl.per_edge[t][i] for t in range(rows)],
            where="post",
            lw=0.8,
            alpha=0.6,
            label=e.eid,
        )
    ax.axvline(tl.t_s * scale, color="gray", ls="--", lw=1, label=f"t_s = {tl.t_s * scale:g}")
    for t in sorted(tl.coll):
        if t < rows:
            ax.axvline(t * scale, color="red", ls=":", lw=0.6, alpha=0.4)
    ax.set_xlabel("time (original units)")
    ax.set_ylabel("dynamic points")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_search_plot(result: SearchResult, path: str) -> str:
    hist = dict(sorted(result.ts_histogram.items()))
    scale = float(result.edges.factor)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([k * scale for k in hist], list(hist.values()), width=0.8 * scale or 0.8)
    ax.axvline(result.max_ts * scale, color="red", ls="--", lw=1,
               label=f"max t_s = {result.max_ts * scale:g}")
    ax.set_xlabel("stabilization time")
    ax.set_ylabel("placements")
    ax.set_title(f"E = {{{', '.join(map(str, result.edges.scaled))}}}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_compare_plot(a: Timeline, b: Timeline, labels: tuple[str, str], path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    horizon = max(len(a.n), len(b.n))
    for tl, label, style in ((a, labels[0], "-"), (b, labels[1], "--")):
        scale = float(tl.system.graph.scale)
        ax.step(
            [t * scale for t in range(horizon)],
            [tl.n_at(t) for t in range(horizon)],
            where="post",
            ls=style,
            label=label,
        )
    ax.set_xlabel("time (original units)")
    ax.set_ylabel("dynamic points")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_conjecture_plot(rows: Sequence[ConjectureRow], path: str) -> str:
    labels = ["{" + ",".join(map(str, r.lengths)) + "}" for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(6, len(rows)), 4))
    ax.bar([i - 0.2 for i in x], [r.max_ts for r in rows], width=0.4, label="max t_s")
    ax.bar([i + 0.2 for i in x], [r.best_linear for r in rows], width=0.4,
           label="best linear t_s")
    for i, r in enumerate(rows):
        ax.text(i, max(r.max_ts, r.best_linear) + 0.1, f"{float(r.ratio):.2f}",
                ha="center", fontsize=8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, fontsize=8)
    ax.set_ylabel("stabilization time (scaled ticks)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
