import pytest
from hypothesis import given, settings

from dpsim import (
    DPSystem,
    GraphError,
    MetricGraph,
    SimulationCapError,
    compare_growth,
    simulate,
    step,
)
from dpsim.simulate import initial_state, merged_summary, split_components

from conftest import systems


def test_single_edge_one_point_bounces_forever():
    # build() keeps the given integer lengths; from_lengths would gcd-normalize
    for length in (1, 2, 5):
        g = MetricGraph.build(["v0", "v1"], [("e1", "v0", "v1", length)])
        tl = simulate(DPSystem.make(g, [0]))
        assert tl.t_s == 0
        assert set(tl.n) == {1}
        assert tl.period == 2 * length


def test_unit_path_from_terminal():
    g = MetricGraph.from_lengths([1, 1, 1, 1], [(0, 1), (1, 2), (2, 3), (3, 4)])
    tl = simulate(DPSystem.make(g, [0]))
    assert tl.t_s == 3
    assert tl.n_stable == 4
    assert tl.n[:5] == [1, 2, 3, 4, 4]


def test_fig3a_values(fig3a):
    tl = simulate(fig3a)
    assert tl.t_s == 4
    assert tl.n_stable == 8


def test_initial_scatter_counts_degree():
    g = MetricGraph.from_lengths([1, 1, 1], [(0, 1), (0, 2), (0, 3)])
    st0 = initial_state(DPSystem.make(g, [0]))
    assert st0.count() == 3


def test_step_advances_without_arrivals():
    g = MetricGraph.build(["v0", "v1"], [("e1", "v0", "v1", 3)])
    st0 = initial_state(DPSystem.make(g, [0]))
    st1, arrivals = step(st0, g)
    assert arrivals == {}
    assert st1.offsets(0) == {1}


def test_step_scattering_at_degree_three():
    # one arrival at a degree-3 vertex: 1 death, 3 spawns, net +2
    g = MetricGraph.from_lengths([1, 1, 1], [(0, 1), (1, 2), (1, 3)])
    st0 = initial_state(DPSystem.make(g, [0]))
    st1, arrivals = step(st0, g)
    assert arrivals == {1: 1}
    assert st1.count() == st0.count() + 2


def test_step_fusion_at_star_center():
    k = 4
    g = MetricGraph.from_lengths([1] * k, [(0, i + 1) for i in range(k)])
    system = DPSystem.make(g, [0])
    tl = simulate(system)
    assert tl.t_s == 0
    assert set(tl.n) == {k}
    assert 2 in tl.coll
    assert tl.arrivals_log[2] == {0: k}


def test_collision_set_matches_simultaneous_arrivals():
    g = MetricGraph.from_lengths([1, 1, 1, 1], [(0, 1), (1, 2), (2, 3), (3, 4)])
    tl = simulate(DPSystem.make(g, [0]))
    for t, arrivals in enumerate(tl.arrivals_log):
        assert (t in tl.coll) == any(c >= 2 for c in arrivals.values())


@settings(max_examples=50, deadline=None)
@given(systems())
def test_monotone_bounded_and_deterministic(system):
    tl1 = simulate(system)
    tl2 = simulate(system)
    assert tl1.n == tl2.n
    assert tl1.coll == tl2.coll
    assert tl1.t_s == tl2.t_s and tl1.period == tl2.period
    for prev, cur in zip(tl1.n, tl1.n[1:]):
        assert prev <= cur
    assert max(tl1.n) <= 2 * system.graph.total_length
    assert all(tl1.n[t] == tl1.n_stable for t in range(tl1.t_s, len(tl1.n)))


@settings(max_examples=25, deadline=None)
@given(systems(max_vertices=4, max_extra=2, max_length=2))
def test_scaling_equivariance(system):
    c = 3
    g = system.graph
    scaled = MetricGraph.build(
        g.vertex_names,
        [(e.eid, g.vertex_names[e.u], g.vertex_names[e.v], e.length * c) for e in g.edges],
    )
    tl = simulate(system)
    tls = simulate(DPSystem.make(scaled, system.points))
    assert tls.t_s == c * tl.t_s
    for t in range(len(tls.n)):
        assert tls.n[t] == tl.n_at(t // c)


def test_compare_growth_reflexive(fig3a):
    tl = simulate(fig3a)
    assert compare_growth(tl, tl).dominated


def test_compare_growth_cut_fig3b_dominated(fig3a):
    tl_a = simulate(fig3a)
    # Fig 3b: the long parallel edge re-targeted to a fresh vertex
    g = MetricGraph.build(
        ["v1", "v2", "v3", "v3x"],
        [("e1", "v1", "v2", 1), ("e2", "v2", "v3", 1), ("es", "v2", "v3x", 2)],
    )
    tl_b = simulate(DPSystem.from_names(g, ["v1"]))
    assert tl_b.t_s == 3 and tl_b.n_stable == 4
    assert compare_growth(tl_b, tl_a).dominated
    assert not compare_growth(tl_a, tl_b).dominated


def test_compare_growth_linear_dominates_under_cyclic():
    # 4 unit edges: the terminal-point path vs the pendant-triangle witness
    lin = MetricGraph.from_lengths([1, 1, 1, 1], [(0, 1), (1, 2), (2, 3), (3, 4)])
    cyc = MetricGraph.from_lengths([1, 1, 1, 1], [(0, 1), (1, 2), (2, 3), (3, 1)])
    tl_lin = simulate(DPSystem.make(lin, [0]))
    tl_cyc = simulate(DPSystem.make(cyc, [0]))
    assert compare_growth(tl_lin, tl_cyc).dominated


def test_simulate_requires_connected():
    g = MetricGraph.build(
        ["a", "b", "c", "d"], [("e1", "a", "b", 1), ("e2", "c", "d", 1)]
    )
    with pytest.raises(GraphError, match="connected"):
        simulate(DPSystem.from_names(g, ["a"]))


def test_split_components_and_merged_summary():
    g = MetricGraph.build(
        ["a", "b", "c", "d", "e"],
        [("e1", "a", "b", 1), ("e2", "c", "d", 1), ("e3", "d", "e", 1)],
    )
    parts = split_components(g, [0, 2])
    assert len(parts) == 2
    tls = [simulate(p) for p in parts]
    t_s, period, n_stable = merged_summary(tls)
    assert t_s == 1  # the 2-edge component stabilizes at 1, the single edge at 0
    assert n_stable == 1 + 2


def test_max_ticks_cap_raises_with_partial_timeline():
    g = MetricGraph.from_lengths([5, 7], [(0, 1), (1, 2)])
    with pytest.raises(SimulationCapError) as err:
        simulate(DPSystem.make(g, [0]), max_ticks=3)
    tl = err.value.timeline
    assert tl.truncated and len(tl.n) == 4
