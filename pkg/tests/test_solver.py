from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgc.bounds import grid_construct, layout_problem
from qgc.instances import (
    InstanceSpec,
    build_graph,
    build_hardware,
    build_mixgraph,
    build_problem,
    qstate_set,
    random_placement,
    table1_specs,
)
from qgc.model import GateDurations, GateKind, ProblemGraph, RoutingProblem
from qgc.solver import SolverConfig, SolverError, exhaustive_solve, run_solver, solve
from qgc.validator import lower_bound, validate


def random_small_problem(rng: random.Random, hw_choices=("grid", "line", "rigetti-12")) -> RoutingProblem:
    n = rng.randint(1, 5)
    k = rng.randint(1, 3)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    graph = ProblemGraph(n, frozenset(edges))
    if k == 1:
        mix = build_mixgraph("custom", 1, [])
    elif k == 2:
        mix = build_mixgraph("line", 2)
    else:
        mix = build_mixgraph(rng.choice(["line", "ring"]), k)
    kind = rng.choice(hw_choices)
    if kind == "rigetti-12" and n * k <= 12:
        hw = build_hardware("rigetti-12")
    else:
        kind = "grid" if kind == "rigetti-12" else kind
        extra = rng.randint(0, 2)
        hw = build_hardware(f"grid-{n}-{k + extra}" if kind == "grid" else f"line-{n * k + extra}-1")
    placement = random_placement(qstate_set(n, k), hw.qubit_count, rng.getrandbits(32))
    return RoutingProblem.build(graph, mix, hw, placement, f"fuzz-{kind}-{n}-{k}")


def test_exhaustive_tiny_grid_is_four(tiny_grid):
    s = exhaustive_solve(tiny_grid)
    assert validate(tiny_grid, s).ok
    assert s.makespan == 4 == lower_bound(tiny_grid)


def test_exhaustive_tiny_line_value(tiny_line):
    # pinned from the exhaustive search; PS pairs start adjacent, one MIX pair is three qubits apart
    s = exhaustive_solve(tiny_line)
    assert validate(tiny_line, s).ok
    assert s.makespan == 9
    assert run_solver(tiny_line, SolverConfig(seed=3, rollouts=100)).makespan == 9


def test_exhaustive_guards(tiny_grid):
    with pytest.raises(ValueError):
        exhaustive_solve(tiny_grid, gate_cap=9)
    big = build_problem(InstanceSpec("G1", "ring", 3, "rigetti-12"), "random", seed=0)
    with pytest.raises(ValueError):
        exhaustive_solve(big)


def test_exhaustive_gate_cap_too_small(tiny_line):
    with pytest.raises(SolverError):
        exhaustive_solve(tiny_line, gate_cap=3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_exhaustive_never_beaten_by_rollouts(seed):
    rng = random.Random(seed)
    n, k = rng.choice([(2, 2), (3, 2), (2, 3), (3, 1), (1, 3)])
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.7]
    mix = build_mixgraph("line", k) if k > 1 else build_mixgraph("custom", 1, [])
    hw = build_hardware(rng.choice([f"grid-{n}-{k}", f"line-{n}-{k}"]))
    placement = random_placement(qstate_set(n, k), hw.qubit_count, seed)
    p = RoutingProblem.build(ProblemGraph(n, frozenset(edges)), mix, hw, placement)
    heuristic = run_solver(p, SolverConfig(seed=seed % 1000, rollouts=60))
    try:
        exact = exhaustive_solve(p, gate_cap=6)
    except SolverError:
        return
    assert validate(p, exact).ok
    assert lower_bound(p) <= exact.makespan
    if len(heuristic.schedule.gates) <= 6:
        assert exact.makespan <= heuristic.makespan


def test_rollouts_match_oracle_on_tiny_grid(tiny_grid):
    spans = [run_solver(tiny_grid, SolverConfig(seed=s, rollouts=100)).makespan for s in range(10)]
    assert spans.count(4) >= 9


def test_deterministic_under_seed():
    p = build_problem(InstanceSpec("G1", "ring", 3, "google-12"), "random", seed=5)
    a = run_solver(p, SolverConfig(seed=7, rollouts=40))
    b = run_solver(p, SolverConfig(seed=7, rollouts=40))
    assert a.schedule == b.schedule and a.history == b.history


@pytest.mark.parametrize("spec", table1_specs(), ids=lambda s: f"{s.hardware_id}-{s.tag}")
def test_benchmark_configs_solve_validly(spec):
    p = build_problem(spec, "random", seed=1)
    r = run_solver(p, SolverConfig(seed=1, rollouts=15))
    assert validate(p, r.schedule).ok
    assert r.makespan >= r.lower_bound == lower_bound(p)
    spans = [span for _, span in r.history]
    assert spans == sorted(spans, reverse=True) and spans[-1] == r.makespan


def test_incumbent_is_never_worsened():
    p = layout_problem("grid", build_graph("G1"), build_mixgraph("ring", 3))
    incumbent = grid_construct(p)
    r = run_solver(p, SolverConfig(seed=0, rollouts=5, incumbent=incumbent))
    assert r.makespan <= incumbent.makespan
    assert r.history[0] == (-1, incumbent.makespan)


def test_invalid_incumbent_is_ignored(tiny_grid):
    from qgc.validator import Schedule

    r = run_solver(tiny_grid, SolverConfig(rollouts=5, incumbent=Schedule()))
    assert r.makespan == 4


def test_no_goals():
    p = RoutingProblem.build(
        ProblemGraph(3), build_mixgraph("custom", 1, []), build_hardware("line-3-1"), random_placement(qstate_set(3, 1), 3, 0)
    )
    r = run_solver(p)
    assert r.makespan == 0 and not r.schedule.gates


def test_fractional_durations_and_empty_qubits():
    d = GateDurations(swap=Fraction(5, 2), move=Fraction(3, 2), ps=Fraction(7, 3), swap_ps=3, mix=Fraction(1, 2), swap_mix=1)
    spec = InstanceSpec("G1", "line", 2, "google-16")
    p = build_problem(spec, "random", seed=2, durations=d)
    r = run_solver(p, SolverConfig(seed=2, rollouts=30))
    assert validate(p, r.schedule).ok
    assert isinstance(r.makespan, (int, Fraction))


def test_move_can_be_disabled():
    # 12 qstates on 16 qubits; seed 5 leaves the occupied qubits connected enough to finish
    p = build_problem(InstanceSpec("G1", "ring", 3, "google-16"), "random", seed=5)
    r = run_solver(p, SolverConfig(seed=0, rollouts=20, use_move=False))
    assert r.moves == 0
    assert validate(p, r.schedule).ok


def test_without_move_stranded_qstates_exhaust_the_budget():
    p = build_problem(InstanceSpec("G1", "ring", 3, "google-16"), "random", seed=0)
    with pytest.raises(SolverError):
        run_solver(p, SolverConfig(seed=0, rollouts=20, use_move=False))


def test_deadline_stops_early():
    p = build_problem(InstanceSpec("G4", "ring", 3, "google-24"), "random", seed=0)
    r = run_solver(p, SolverConfig(seed=0, rollouts=10**6, deadline=0.3))
    assert r.rollouts < 10**6 and validate(p, r.schedule).ok


@pytest.mark.parametrize(
    "kwargs",
    [{"rollouts": 0}, {"deadline": 0}, {"noise": float("nan")}, {"epsilon": float("inf")}],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_random_instances_are_solved_validly(seed):
    p = random_small_problem(random.Random(seed))
    s = solve(p, SolverConfig(seed=seed % 97, rollouts=10))
    r = validate(p, s)
    assert r.ok, r.violations[:3]
    assert s.makespan >= lower_bound(p)
