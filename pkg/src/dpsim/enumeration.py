"""Exhaustive generation of multigraphs from an edge multiset.

Each of the 2m endpoint slots of m edges is assigned to a block of a set
partition (blocks become vertices), enumerated as restricted-growth
strings with self-loop pruning during growth. Isomorphic duplicates are
removed with the canonical form, so every length-labeled isomorphism
class is emitted exactly once, in a deterministic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .graph import EdgeMultiset, GraphError, MetricGraph, scale_to_integer
from .structure import canonical_form

MAX_EDGES_DEFAULT = 7


@dataclass(frozen=True)
class EnumOptions:
    allow_loops: bool = False
    connected_only: bool = True
    max_edges: int = MAX_EDGES_DEFAULT


def _as_multiset(edges: EdgeMultiset | Sequence) -> EdgeMultiset:
    if isinstance(edges, EdgeMultiset):
        return edges
    return scale_to_integer(edges)


def _raw_partitions(m: int, allow_loops: bool) -> Iterator[list[int]]:
    """Set partitions of 2m slots as block-id lists, first-appearance numbered.

    Slots 2i and 2i+1 are edge i's endpoints; without loops they may not
    share a block.
    """
    assign = [0] * (2 * m)

    def rec(slot: int, n_blocks: int) -> Iterator[list[int]]:
        if slot == 2 * m:
            yield assign.copy()
            return
        forbidden = -1
        if slot % 2 == 1 and not allow_loops:
            forbidden = assign[slot - 1]
        for b in range(n_blocks + 1):
            if b == forbidden:
                continue
            assign[slot] = b
            yield from rec(slot + 1, n_blocks + (1 if b == n_blocks else 0))

    yield from rec(0, 0)


def _partition_graph(lengths: tuple[int, ...], assign: list[int], factor, allow_loops: bool) -> MetricGraph:
    m = len(lengths)
    n = max(assign) + 1
    names = tuple(f"v{i}" for i in range(n))
    edges = tuple(
        (f"e{i + 1}", names[assign[2 * i]], names[assign[2 * i + 1]], lengths[i])
        for i in range(m)
    )
    return MetricGraph.build(names, edges, factor, allow_loops)


def enumerate_graphs(
    edges: EdgeMultiset | Sequence, opts: EnumOptions = EnumOptions()
) -> Iterator[MetricGraph]:
    """Every multigraph over the multiset, one per isomorphism class."""
    ms = _as_multiset(edges)
    m = len(ms.scaled)
    if m > opts.max_edges:
        raise GraphError(f"edge count {m} exceeds cap {opts.max_edges}")
    lengths = tuple(sorted(ms.scaled))
    seen: set[bytes] = set()
    for assign in _raw_partitions(m, opts.allow_loops):
        graph = _partition_graph(lengths, assign, ms.factor, opts.allow_loops)
        if opts.connected_only and not graph.is_connected():
            continue
        key = canonical_form(graph)
        if key in seen:
            continue
        seen.add(key)
        yield graph


def count_partitions(edges: EdgeMultiset | Sequence, opts: EnumOptions = EnumOptions()) -> int:
    """Raw admissible partitions before isomorphism dedup."""
    ms = _as_multiset(edges)
    m = len(ms.scaled)
    if m > opts.max_edges:
        raise GraphError(f"edge count {m} exceeds cap {opts.max_edges}")
    lengths = tuple(sorted(ms.scaled))
    total = 0
    for assign in _raw_partitions(m, opts.allow_loops):
        if opts.connected_only:
            graph = _partition_graph(lengths, assign, ms.factor, opts.allow_loops)
            if not graph.is_connected():
                continue
        total += 1
    return total
