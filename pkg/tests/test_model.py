from __future__ import annotations

from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgc.instances import build_mixgraph
from qgc.model import (
    GateDurations,
    GateKind,
    GoalSet,
    HardwareGraph,
    MixGraph,
    MixKind,
    Placement,
    ProblemGraph,
    QState,
    RoutingProblem,
    derive_goals,
    distance,
    exact,
    mixgraph_edge,
    same_mixgraph,
    time_to_json,
)


def test_exact_times():
    assert exact(4) == 4 and isinstance(exact(4), int)
    assert exact(4.0) == 4 and isinstance(exact(4.0), int)
    assert exact(0.1) == Fraction(1, 10)
    assert exact("3/2") == Fraction(3, 2)
    with pytest.raises(TypeError):
        exact(True)
    with pytest.raises(ValueError):
        exact(float("nan"))


def test_time_json_forms():
    assert time_to_json(7) == 7
    assert time_to_json(Fraction(8, 2)) == 4
    assert time_to_json(Fraction(1, 3)) == "1/3"
    assert exact(time_to_json(Fraction(5, 7))) == Fraction(5, 7)


@pytest.mark.parametrize("text", ["2_1", "ψ_2_1", "psi_2_1", "s2_1", "ψ2_1"])
def test_qstate_names_parse(text):
    assert QState.parse(text) == QState(2, 1)


@pytest.mark.parametrize("text", ["2", "a_b", "2_1_0", "-1_0", ""])
def test_qstate_bad_names(text):
    with pytest.raises(ValueError):
        QState.parse(text)


def test_problem_graph_validation():
    g = ProblemGraph(3, frozenset({(1, 0), (2, 1)}))
    assert g.edges == {(0, 1), (1, 2)}
    with pytest.raises(ValueError):
        ProblemGraph(3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        ProblemGraph(3, frozenset({(0, 3)}))
    with pytest.raises(ValueError):
        ProblemGraph(0)


def test_mix_graph_shapes():
    assert build_mixgraph("ring", 4).edges == {(0, 1), (1, 2), (2, 3), (0, 3)}
    assert build_mixgraph("line", 3).edges == {(0, 1), (1, 2)}
    with pytest.raises(ValueError):
        MixGraph(3, frozenset({(0, 1)}), MixKind.RING)
    with pytest.raises(ValueError):
        MixGraph(3, frozenset({(0, 2)}), MixKind.LINE)


def test_g1_ring3_goal_counts():
    g = ProblemGraph(4, frozenset({(0, 1), (1, 2), (2, 3), (0, 3)}))
    goals = derive_goals(g, build_mixgraph("ring", 3))
    assert len(goals.ps_goals) == 4 * 3
    assert len(goals.mix_goals) == 4 * 3


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 6),
    k=st.integers(1, 5),
    data=st.data(),
)
def test_goal_counts_match_edge_products(n, k, data):
    all_edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = data.draw(st.sets(st.sampled_from(all_edges)) if all_edges else st.just(set()))
    color_pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
    mix_edges = data.draw(st.sets(st.sampled_from(color_pairs)) if color_pairs else st.just(set()))
    goals = derive_goals(ProblemGraph(n, frozenset(edges)), MixGraph(k, frozenset(mix_edges)))
    assert len(goals.ps_goals) == len(edges) * k
    assert len(goals.mix_goals) == n * len(mix_edges)
    assert not goals.ps_goals & goals.mix_goals
    assert all(a.color == b.color for a, b in goals.ps_goals)
    assert all(a.vertex == b.vertex for a, b in goals.mix_goals)


def test_goalset_rejects_non_canonical_pairs():
    a, b = QState(0, 0), QState(1, 0)
    with pytest.raises(ValueError):
        GoalSet(frozenset({(b, a)}), frozenset())


def test_mix_predicates():
    ring4 = build_mixgraph("ring", 4)
    assert mixgraph_edge(ring4, QState(2, 0), QState(2, 3))
    assert not mixgraph_edge(ring4, QState(2, 0), QState(1, 1))
    assert same_mixgraph(ring4, QState(2, 0), QState(2, 2))
    assert not same_mixgraph(ring4, QState(2, 0), QState(2, 1))
    assert not same_mixgraph(ring4, QState(2, 0), QState(2, 0))


def test_durations_defaults_and_lookup():
    d = GateDurations()
    assert (d.swap, d.move, d.ps, d.swap_ps, d.mix, d.swap_mix) == (4, 4, 3, 4, 1, 1)
    assert d.of(GateKind.SWAP_MIX_AS_SWAP) == d.swap_mix
    assert d.of(GateKind.DONE_PS) == 0
    assert GateDurations.from_json(d.to_json()) == d
    assert GateDurations.from_json({"ps": "5/2"}).ps == Fraction(5, 2)
    with pytest.raises(ValueError):
        GateDurations.from_json({"cz": 2})
    with pytest.raises(ValueError):
        GateDurations(swap=-1)


def test_gate_kind_properties():
    assert {k for k in GateKind if k.exchanges} == {
        GateKind.SWAP,
        GateKind.SWAP_PS,
        GateKind.SWAP_MIX,
        GateKind.SWAP_MIX_AS_SWAP,
    }
    assert not GateKind.MOVE.exchanges


def test_hardware_rejects_disconnected():
    with pytest.raises(ValueError):
        HardwareGraph(4, frozenset({(0, 1), (2, 3)}))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_distances_match_networkx(n, seed):
    g = nx.connected_watts_strogatz_graph(n, 2 if n < 4 else 3, 0.4, seed=seed) if n > 2 else nx.path_graph(n)
    hw = HardwareGraph(n, frozenset(g.edges))
    ref = dict(nx.all_pairs_shortest_path_length(g))
    for a in range(n):
        for b in range(n):
            assert distance(hw, a, b) == ref[a][b]


def test_distance_range_check():
    hw = HardwareGraph(2, frozenset({(0, 1)}))
    with pytest.raises(ValueError):
        distance(hw, 0, 2)


def test_placement_is_injective():
    with pytest.raises(ValueError):
        Placement({QState(0, 0): 1, QState(0, 1): 1})
    p = Placement({QState(0, 0): 3})
    assert p.occupant(3) == QState(0, 0) and p.occupant(2) is None
    assert Placement.from_json(p.to_json()) == p


def test_routing_problem_validation(tiny_grid):
    hw = tiny_grid.hardware
    small = HardwareGraph(3, frozenset({(0, 1), (1, 2)}))
    with pytest.raises(ValueError):
        RoutingProblem.build(tiny_grid.problem_graph, tiny_grid.mix_graph, small, tiny_grid.initial_placement)
    partial = Placement({QState(0, 0): 0})
    with pytest.raises(ValueError):
        RoutingProblem.build(tiny_grid.problem_graph, tiny_grid.mix_graph, hw, partial)
    wrong = GoalSet(frozenset(), frozenset())
    with pytest.raises(ValueError):
        RoutingProblem(tiny_grid.problem_graph, tiny_grid.mix_graph, hw, wrong, tiny_grid.initial_placement)
    assert tiny_grid.qstates == (QState(0, 0), QState(0, 1), QState(1, 0), QState(1, 1))
    assert tiny_grid.ps_partners[QState(0, 0)] == (QState(1, 0),)
