"""Dynamic-point systems on metric graphs: simulation, oracle, surgery, search."""

__version__ = "0.1.0"

from .graph import (
    Edge,
    EdgeMultiset,
    GraphError,
    MetricGraph,
    Walk,
    scale_to_integer,
    shortest_distance,
    validate,
    walk_from_tokens,
    walk_from_vertices,
)
from .places import OracleResult, Place, place_table, stabilization_oracle
from .simulate import (
    DPSystem,
    SimState,
    SimulationCapError,
    Timeline,
    compare_growth,
    simulate,
    split_components,
    step,
)
from .structure import (
    BlockDecomposition,
    bead_leaves,
    blocks_bridges,
    canonical_form,
    fundamental_cycles,
    is_bead,
    is_bead_broom,
    is_linear,
    is_tree,
)

__all__ = [
    "Edge",
    "EdgeMultiset",
    "GraphError",
    "MetricGraph",
    "Walk",
    "scale_to_integer",
    "shortest_distance",
    "validate",
    "walk_from_tokens",
    "walk_from_vertices",
    "OracleResult",
    "Place",
    "place_table",
    "stabilization_oracle",
    "DPSystem",
    "SimState",
    "SimulationCapError",
    "Timeline",
    "compare_growth",
    "simulate",
    "split_components",
    "step",
    "BlockDecomposition",
    "bead_leaves",
    "blocks_bridges",
    "canonical_form",
    "fundamental_cycles",
    "is_bead",
    "is_bead_broom",
    "is_linear",
    "is_tree",
]
