"""Qubit initialization: place qstates so PS partners start close together.

MIX goals are ignored. The search minimizes the summed hardware distance
between PS-goal partners with steepest-descent local search over two move
types (exchange two qstates, or relocate one qstate to an empty qubit) and
seeded perturbation restarts whenever it reaches a local optimum.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable
from dataclasses import dataclass

from .model import HardwareGraph, Placement, QPair, QState, RoutingProblem, Time


@dataclass(frozen=True)
class QiProblem:
    hardware: HardwareGraph
    ps_goals: frozenset[QPair]
    start_placement: Placement
    swap_cost: Time = 4
    swap_ps_cost: Time = 4
    ps_cost: Time = 1

    @classmethod
    def from_routing(cls, problem: RoutingProblem) -> QiProblem:
        d = problem.durations
        return cls(problem.hardware, problem.goals.ps_goals, problem.initial_placement, d.swap, d.swap_ps, 1)

    @property
    def qstates(self) -> tuple[QState, ...]:
        return tuple(self.start_placement)


@dataclass(frozen=True)
class QiSolution:
    final_placement: Placement
    objective: int
    start_objective: int
    # lower estimate of the relaxed plan: every adjacent swap shifts two qstates by one step
    relaxed_plan_cost: Time
    iterations: int


def qi_objective(hardware: HardwareGraph, placement, ps_goals: Iterable[QPair]) -> int:
    dist = hardware.distances
    return sum(dist[placement[a]][placement[b]] for a, b in ps_goals)


def solve_qi(
    qi: QiProblem,
    seed: int = 0,
    budget: int = 1000,
    perturbation: int = 3,
) -> QiSolution:
    """Anytime local search; the result is never worse than the start placement.

    ``budget`` counts search iterations (one applied move or one perturbation
    each). Equal-gain moves are resolved by the lowest (qstate, qubit) pair.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    hw = qi.hardware
    dist = hw.distances
    qstates = sorted(qi.start_placement)
    partners: dict[QState, list[QState]] = {s: [] for s in qstates}
    for a, b in qi.ps_goals:
        partners[a].append(b)
        partners[b].append(a)
    pos = dict(qi.start_placement)
    occ: list[QState | None] = [None] * hw.qubit_count
    for s, q in pos.items():
        occ[q] = s
    rng = random.Random(seed)

    def gain(s: QState, q: int) -> int:
        """Objective change when ``s`` moves to ``q`` (exchanging with any occupant)."""
        src = pos[s]
        t = occ[q]
        delta = 0
        for p in partners[s]:
            if p != t:
                delta += dist[q][pos[p]] - dist[src][pos[p]]
        if t is not None:
            for p in partners[t]:
                if p != s:
                    delta += dist[src][pos[p]] - dist[q][pos[p]]
        return delta

    def apply(s: QState, q: int) -> None:
        src, t = pos[s], occ[q]
        occ[q], occ[src] = s, t
        pos[s] = q
        if t is not None:
            pos[t] = src

    start_obj = current = qi_objective(hw, pos, qi.ps_goals)
    floor = len(qi.ps_goals)
    best, best_pos = current, dict(pos)
    iterations = 0
    while iterations < budget and best > floor:
        move, move_gain = None, 0
        for s in qstates:
            here = pos[s]
            for q in range(hw.qubit_count):
                if q == here:
                    continue
                g = gain(s, q)
                if g < move_gain:
                    move, move_gain = (s, q), g
        iterations += 1
        if move is not None:
            apply(*move)
            current += move_gain
            if current < best:
                best, best_pos = current, dict(pos)
            continue
        # local optimum: restart from a perturbed copy of the best placement
        for s, q in best_pos.items():
            occ[pos[s]] = None
        for s, q in best_pos.items():
            pos[s] = q
            occ[q] = s
        for _ in range(perturbation):
            s = rng.choice(qstates)
            q = rng.randrange(hw.qubit_count)
            if q != pos[s]:
                apply(s, q)
        current = qi_objective(hw, pos, qi.ps_goals)

    final = Placement(best_pos)
    moved = sum(dist[qi.start_placement[s]][final[s]] for s in qstates)
    swaps = math.ceil(moved / 2)
    cost = swaps * qi.swap_cost + len(qi.ps_goals) * min(qi.ps_cost, qi.swap_ps_cost)
    return QiSolution(final, best, start_obj, cost, iterations)


def improve_placement(problem: RoutingProblem, seed: int = 0, budget: int = 1000) -> QiSolution:
    return solve_qi(QiProblem.from_routing(problem), seed=seed, budget=budget)
