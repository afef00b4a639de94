"""Analytic makespan bounds and constructive schedules for grid and line chips.

Both constructions rely on odd-even transposition networks: on ``m`` elements,
``m`` alternating layers of neighbour swaps bring every pair of elements
together exactly once. Layers are timed as-soon-as-possible, which never loses
against lock-step layer timing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instances import grid_hardware, line_hardware
from .model import (
    GateDurations,
    GateKind,
    MixGraph,
    MixKind,
    Placement,
    ProblemGraph,
    QState,
    RoutingProblem,
    Time,
    canon,
    same_mixgraph,
)
from .validator import Schedule, ScheduledGate

# (n, k) shapes of the published comparison and the values printed there
TABLE2_SHAPES = ((4, 3), (4, 4), (5, 4), (8, 3))
TABLE2_PUBLISHED = {
    "grid": {(4, 3): 19, (4, 4): 20, (5, 4): 24, (8, 3): 35},
    "line": {(4, 3): 64, (4, 4): 80, (5, 4): 100, (8, 3): 128},
}


class LayoutError(ValueError):
    """The problem's hardware is not the layout a construction needs."""


def grid_bound(n: int, k: int, durations: GateDurations | None = None) -> Time:
    d = durations or GateDurations()
    return n * d.swap_ps + k * d.swap_mix


def line_bound(n: int, k: int, durations: GateDurations | None = None) -> Time:
    d = durations or GateDurations()
    return n * d.swap_ps + n * k * d.swap + k * d.swap_mix


def odd_even_layers(m: int) -> list[list[tuple[int, int]]]:
    """The ``m`` layers of an odd-even transposition network on positions 0..m-1."""
    return [[(j, j + 1) for j in range(r % 2, m - 1, 2)] for r in range(m)]


def grid_placement(n: int, k: int) -> Placement:
    """Vertex ``i`` with color ``c`` sits in row ``c``, column ``i``."""
    return Placement({QState(i, c): c * n + i for i in range(n) for c in range(k)})


def line_placement(n: int, k: int) -> Placement:
    """Color-major: color ``c`` owns qubits ``c*n .. c*n + n - 1``."""
    return Placement({QState(i, c): c * n + i for i in range(n) for c in range(k)})


class _Builder:
    """ASAP scheduler for a fixed sequence of qubit-pair exchanges."""

    def __init__(self, problem: RoutingProblem, placement: Placement):
        self.problem = problem
        self.d = problem.durations
        self.occ: dict[int, QState] = {q: s for s, q in placement.items()}
        self.free: dict[int, Time] = {}
        self.ps_end: dict[QState, Time] = {s: 0 for s in problem.qstates}
        self.done_ps: set = set()
        self.done_mix: set = set()
        self.gates: list[ScheduledGate] = []

    def classify(self, phase: str, s1: QState, s2: QState) -> GateKind:
        pair = canon(s1, s2)
        if phase == "ps":
            if pair in self.problem.goals.ps_goals and pair not in self.done_ps:
                return GateKind.SWAP_PS
            return GateKind.SWAP if self.d.swap <= self.d.swap_ps else GateKind.SWAP_PS
        if phase == "mix":
            if pair in self.problem.goals.mix_goals and pair not in self.done_mix:
                return GateKind.SWAP_MIX
            if same_mixgraph(self.problem.mix_graph, s1, s2):
                return GateKind.SWAP_MIX_AS_SWAP
        return GateKind.SWAP

    def exchange(self, phase: str, a: int, b: int) -> None:
        s1, s2 = self.occ.get(a), self.occ.get(b)
        if s1 is None and s2 is None:
            return
        if s1 is None or s2 is None:
            raise LayoutError("constructions assume a fully occupied chip")
        kind = self.classify(phase, s1, s2)
        start = max(self.free.get(a, 0), self.free.get(b, 0))
        if kind.mix_phase:
            start = max(start, self.ps_end[s1], self.ps_end[s2])
        dur = self.d.of(kind)
        self.gates.append(ScheduledGate(kind, (s1, s2), start, dur))
        end = start + dur
        self.free[a] = self.free[b] = end
        self.occ[a], self.occ[b] = s2, s1
        pair = canon(s1, s2)
        if kind is GateKind.SWAP_PS and pair in self.problem.goals.ps_goals:
            self.done_ps.add(pair)
            for s in pair:
                self.ps_end[s] = max(self.ps_end[s], end)
        elif kind is GateKind.SWAP_MIX:
            self.done_mix.add(pair)

    def run(self, phase: str, layers: list[list[tuple[int, int]]], prune: bool) -> None:
        if prune:
            layers = layers[: self._last_goal_layer(phase, layers) + 1]
        for layer in layers:
            for a, b in layer:
                self.exchange(phase, a, b)

    def _last_goal_layer(self, phase, layers) -> int:
        occ = dict(self.occ)
        done_ps, done_mix = set(self.done_ps), set(self.done_mix)
        last = -1
        for r, layer in enumerate(layers):
            for a, b in layer:
                s1, s2 = occ.get(a), occ.get(b)
                if s1 is None or s2 is None:
                    continue
                pair = canon(s1, s2)
                if phase == "ps" and pair in self.problem.goals.ps_goals and pair not in done_ps:
                    done_ps.add(pair)
                    last = r
                elif phase == "mix" and pair in self.problem.goals.mix_goals and pair not in done_mix:
                    done_mix.add(pair)
                    last = r
                occ[a], occ[b] = s2, s1
        return last

    def schedule(self) -> Schedule:
        return Schedule(self.gates)


def _shape(problem: RoutingProblem) -> tuple[int, int]:
    return problem.problem_graph.vertex_count, problem.mix_graph.color_count


def grid_construct(problem: RoutingProblem, prune: bool = True) -> Schedule:
    """Constructive schedule on the n x k grid.

    The schedule is relative to :func:`grid_placement`, whatever the problem's
    own initial placement is (see :func:`canonical_problem`).
    """
    n, k = _shape(problem)
    ref = grid_hardware(n, k)
    if problem.hardware.qubit_count != ref.qubit_count or problem.hardware.couplings != ref.couplings:
        raise LayoutError(f"grid construction needs the {n}x{k} grid hardware")
    b = _Builder(problem, grid_placement(n, k))
    rows = [[(c * n + j, c * n + j + 1) for c in range(k) for j, _ in layer] for layer in odd_even_layers(n)]
    b.run("ps", rows, prune)
    cols = [[(c * n + j, (c + 1) * n + j) for j in range(n) for c, _ in layer] for layer in odd_even_layers(k)]
    b.run("mix", cols, prune)
    return b.schedule()


def line_construct(problem: RoutingProblem, prune: bool = True) -> Schedule:
    """Constructive schedule on the path of n*k qubits, relative to :func:`line_placement`."""
    n, k = _shape(problem)
    ref = line_hardware(n, k)
    if problem.hardware.qubit_count != ref.qubit_count or problem.hardware.couplings != ref.couplings:
        raise LayoutError(f"line construction needs the {n * k}-qubit line hardware")
    b = _Builder(problem, line_placement(n, k))
    blocks = [[(c * n + j, c * n + j + 1) for c in range(k) for j, _ in layer] for layer in odd_even_layers(n)]
    b.run("ps", blocks, prune)
    # odd-even transposition sort to vertex-major order
    m = n * k
    for r in range(m):
        swaps = [(j, j + 1) for j in range(r % 2, m - 1, 2) if b.occ[j].vertex > b.occ[j + 1].vertex]
        if not swaps and all(b.occ[j].vertex <= b.occ[j + 1].vertex for j in range(m - 1)):
            break
        for a, c in swaps:
            b.exchange("route", a, c)
    vblocks = [[(i * k + j, i * k + j + 1) for i in range(n) for j, _ in layer] for layer in odd_even_layers(k)]
    b.run("mix", vblocks, prune)
    return b.schedule()


def canonical_problem(problem: RoutingProblem, layout: str) -> RoutingProblem:
    n, k = _shape(problem)
    placement = grid_placement(n, k) if layout == "grid" else line_placement(n, k)
    return problem.with_placement(placement)


def worst_case_problem(layout: str, n: int, k: int, durations: GateDurations | None = None) -> RoutingProblem:
    """Complete graph with complete mix-graph: every network layer carries goal gates."""
    graph = ProblemGraph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))
    mix = MixGraph(k, frozenset((a, b) for a in range(k) for b in range(a + 1, k)), MixKind.CUSTOM)
    hw = (grid_hardware if layout == "grid" else line_hardware)(n, k, durations)
    placement = grid_placement(n, k) if layout == "grid" else line_placement(n, k)
    return RoutingProblem.build(graph, mix, hw, placement, f"{layout}-{n}-{k}/K{n}")


def layout_problem(
    layout: str, graph: ProblemGraph, mix: MixGraph, durations: GateDurations | None = None
) -> RoutingProblem:
    n, k = graph.vertex_count, mix.color_count
    hw = (grid_hardware if layout == "grid" else line_hardware)(n, k, durations)
    placement = grid_placement(n, k) if layout == "grid" else line_placement(n, k)
    return RoutingProblem.build(graph, mix, hw, placement, f"{layout}-{n}-{k}")


@dataclass(frozen=True)
class BoundReport:
    layout: str
    n: int
    k: int
    formula_value: Time
    constructive_makespan: Time
    schedule: Schedule
    published: Time | None = None

    @property
    def label(self) -> str:
        return f"{self.n} x {self.k} {self.layout.capitalize()}"

    @property
    def note(self) -> str:
        if self.published is None or self.published == self.formula_value:
            return ""
        return f"published table value {self.published} differs from formula value {self.formula_value}"


def bound_report(
    layout: str, n: int, k: int, durations: GateDurations | None = None, problem: RoutingProblem | None = None
) -> BoundReport:
    if layout not in ("grid", "line"):
        raise ValueError(f"unknown layout {layout!r}")
    if problem is None:
        problem = worst_case_problem(layout, n, k, durations)
    durations = problem.durations
    if layout == "grid":
        formula, schedule = grid_bound(n, k, durations), grid_construct(problem)
    else:
        formula, schedule = line_bound(n, k, durations), line_construct(problem)
    published = TABLE2_PUBLISHED[layout].get((n, k)) if durations == GateDurations() else None
    return BoundReport(layout, n, k, formula, schedule.makespan, schedule, published)
