from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgc.bounds import (
    TABLE2_PUBLISHED,
    TABLE2_SHAPES,
    LayoutError,
    bound_report,
    canonical_problem,
    grid_bound,
    grid_construct,
    grid_placement,
    layout_problem,
    line_bound,
    line_construct,
    odd_even_layers,
    worst_case_problem,
)
from qgc.instances import build_graph, build_mixgraph
from qgc.model import GateDurations, GateKind
from qgc.validator import validate


def test_grid_formula_values():
    assert [grid_bound(n, k) for n, k in TABLE2_SHAPES] == [19, 20, 24, 35]
    assert [grid_bound(n, k) for n, k in TABLE2_SHAPES] == [TABLE2_PUBLISHED["grid"][s] for s in TABLE2_SHAPES]


def test_line_formula_values():
    # n*4 + n*k*4 + k*1 with the default durations
    assert [line_bound(n, k) for n, k in TABLE2_SHAPES] == [67, 84, 104, 131]
    assert [TABLE2_PUBLISHED["line"][s] for s in TABLE2_SHAPES] == [64, 80, 100, 128]


def test_formulas_use_exact_arithmetic():
    d = GateDurations(swap_ps=Fraction(7, 2), swap=Fraction(1, 3), swap_mix=Fraction(1, 2))
    assert grid_bound(4, 3, d) == 4 * Fraction(7, 2) + 3 * Fraction(1, 2)
    assert line_bound(4, 3, d) == 14 + 4 + Fraction(3, 2)


@pytest.mark.parametrize("m", range(1, 14))
def test_odd_even_network_meets_every_pair_once(m):
    tokens = list(range(m))
    met = []
    for layer in odd_even_layers(m):
        for a, b in layer:
            assert b == a + 1
            met.append(frozenset((tokens[a], tokens[b])))
            tokens[a], tokens[b] = tokens[b], tokens[a]
    expected = {frozenset((i, j)) for i in range(m) for j in range(i + 1, m)}
    assert set(met) == expected
    assert len(met) == len(expected)
    assert tokens == list(range(m))[::-1]


@pytest.mark.parametrize("layout", ["grid", "line"])
@pytest.mark.parametrize("n", [4, 5, 8])
@pytest.mark.parametrize("k", [3, 4])
def test_constructions_validate_within_formula(layout, n, k):
    r = bound_report(layout, n, k)
    problem = worst_case_problem(layout, n, k)
    report = validate(problem, r.schedule)
    assert report.ok, report.violations[:3]
    assert r.constructive_makespan <= r.formula_value


def test_grid_construction_is_tight_on_complete_instances():
    for n, k in TABLE2_SHAPES:
        assert bound_report("grid", n, k).constructive_makespan == grid_bound(n, k)


def test_constructions_on_benchmark_graphs():
    for layout, construct in (("grid", grid_construct), ("line", line_construct)):
        p = layout_problem(layout, build_graph("G1"), build_mixgraph("ring", 3))
        s = construct(p)
        assert validate(p, s).ok
        bound = (grid_bound if layout == "grid" else line_bound)(4, 3)
        assert s.makespan <= bound
        # pruning drops trailing layers without goal gates
        assert s.makespan <= construct(p, prune=False).makespan


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 5),
    k=st.integers(2, 4),
    layout=st.sampled_from(["grid", "line"]),
    durs=st.tuples(*[st.integers(1, 6)] * 6),
)
def test_constructions_respect_formula_for_any_durations(n, k, layout, durs):
    d = GateDurations(*durs)
    r = bound_report(layout, n, k, d)
    assert validate(worst_case_problem(layout, n, k, d), r.schedule).ok
    assert r.constructive_makespan <= r.formula_value
    assert r.published is None or d == GateDurations()


def test_grid_uses_hybrid_gates_only():
    r = bound_report("grid", 4, 3)
    kinds = {g.kind for g in r.schedule.gates}
    assert kinds <= {GateKind.SWAP_PS, GateKind.SWAP, GateKind.SWAP_MIX, GateKind.SWAP_MIX_AS_SWAP}


def test_layout_mismatch():
    p = layout_problem("grid", build_graph("G1"), build_mixgraph("ring", 3))
    with pytest.raises(LayoutError):
        line_construct(p)
    with pytest.raises(ValueError):
        bound_report("ring", 4, 3)


def test_canonical_problem_resets_placement():
    p = layout_problem("grid", build_graph("G1"), build_mixgraph("line", 3))
    assert canonical_problem(p, "grid").initial_placement == grid_placement(4, 3)


def test_report_labels_and_notes():
    grid = bound_report("grid", 4, 3)
    line = bound_report("line", 4, 3)
    assert grid.label == "4 x 3 Grid" and grid.note == ""
    assert line.published == 64 and "64" in line.note and "67" in line.note
