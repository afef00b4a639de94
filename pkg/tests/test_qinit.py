from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgc.instances import InstanceSpec, build_hardware, build_problem, qstate_set, random_placement
from qgc.model import HardwareGraph, Placement, QState, canon
from qgc.qinit import QiProblem, improve_placement, qi_objective, solve_qi


def _qi(hw_id: str, n: int, k: int, edges, seed: int) -> QiProblem:
    hw = build_hardware(hw_id)
    ps = frozenset(canon(QState(u, c), QState(v, c)) for u, v in edges for c in range(k))
    return QiProblem(hw, ps, random_placement(qstate_set(n, k), hw.qubit_count, seed))


def brute_force_optimum(qi: QiProblem) -> int:
    qs = sorted(qi.start_placement)
    return min(
        qi_objective(qi.hardware, dict(zip(qs, qubits)), qi.ps_goals)
        for qubits in itertools.permutations(range(qi.hardware.qubit_count), len(qs))
    )


def test_objective_counts_distances():
    hw = HardwareGraph(3, frozenset({(0, 1), (1, 2)}))
    a, b = QState(0, 0), QState(1, 0)
    assert qi_objective(hw, {a: 0, b: 2}, [(a, b)]) == 2
    assert qi_objective(hw, {a: 0, b: 1}, [(a, b)]) == 1


@pytest.mark.parametrize("seed", range(5))
def test_reaches_brute_force_optimum_on_small_chips(seed):
    qi = _qi("grid-3-2", 3, 2, [(0, 1), (1, 2), (0, 2)], seed)
    sol = solve_qi(qi, seed=seed, budget=500)
    assert sol.objective == brute_force_optimum(qi)


@settings(max_examples=40, deadline=None)
@given(
    hw_id=st.sampled_from(["rigetti-12", "google-12", "ibm-12", "grid-4-3", "line-4-3"]),
    seed=st.integers(0, 10_000),
    budget=st.integers(1, 60),
)
def test_reported_objective_is_exact_and_never_worse(hw_id, seed, budget):
    qi = _qi(hw_id, 4, 3, [(0, 1), (1, 2), (2, 3), (0, 3)], seed)
    sol = solve_qi(qi, seed=seed, budget=budget)
    assert sol.objective == qi_objective(qi.hardware, sol.final_placement, qi.ps_goals)
    assert sol.start_objective == qi_objective(qi.hardware, qi.start_placement, qi.ps_goals)
    assert sol.objective <= sol.start_objective
    assert sol.objective >= len(qi.ps_goals)
    assert set(sol.final_placement) == set(qi.start_placement)
    assert sol.iterations <= budget


def test_deterministic_under_seed():
    qi = _qi("rigetti-16", 4, 4, [(0, 1), (1, 2), (2, 3), (0, 3)], 3)
    assert solve_qi(qi, seed=11, budget=300) == solve_qi(qi, seed=11, budget=300)


def test_stops_at_floor():
    # one PS pair already adjacent: nothing to improve
    hw = HardwareGraph(2, frozenset({(0, 1)}))
    a, b = QState(0, 0), QState(1, 0)
    sol = solve_qi(QiProblem(hw, frozenset({(a, b)}), Placement({a: 0, b: 1})), budget=50)
    assert sol.objective == 1 and sol.iterations == 0


def test_relaxed_plan_cost_counts_swaps_and_ps():
    qi = _qi("line-4-3", 4, 3, [(0, 1), (1, 2), (2, 3), (0, 3)], 1)
    sol = solve_qi(qi, seed=0, budget=200)
    moved = sum(qi.hardware.distance(qi.start_placement[s], sol.final_placement[s]) for s in qi.start_placement)
    assert sol.relaxed_plan_cost == -(-moved // 2) * qi.swap_cost + len(qi.ps_goals) * 1


def test_budget_must_be_positive():
    qi = _qi("grid-3-2", 3, 2, [(0, 1)], 0)
    with pytest.raises(ValueError):
        solve_qi(qi, budget=0)


def test_improves_most_twelve_qubit_seeds():
    improved = 0
    for seed in range(1, 11):
        p = build_problem(InstanceSpec("G1", "ring", 3, "google-12"), "random", seed=seed)
        sol = improve_placement(p, seed=seed, budget=500)
        improved += sol.objective < sol.start_objective
    assert improved >= 8
