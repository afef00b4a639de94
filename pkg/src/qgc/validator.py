"""Schedule replay and legality checking.

A schedule is a list of timed gates. :func:`validate` replays it against a
routing problem and reports every violation it finds instead of raising.

Timing model: a gate occupies the qubits of its operands (plus the target for
MOVE) over the half-open interval ``[start, start + duration)``. Location
effects land at the gate's end, so a gate starting exactly when another one
ends on the same qubit sees the updated locations. Goals count as achieved at
the end of the gate that achieves them; ``ps_completed(s)`` holds from the end
of the last PS goal involving ``s``.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import (
    GateKind,
    Placement,
    QPair,
    QState,
    RoutingProblem,
    Time,
    canon,
    exact,
    mixgraph_edge,
    same_mixgraph,
    time_to_json,
)

RESOURCE_OVERLAP = "RESOURCE_OVERLAP"
NOT_ADJACENT = "NOT_ADJACENT"
ORDERING = "ORDERING"
DUPLICATE_GOAL = "DUPLICATE_GOAL"
NOT_EMPTY = "NOT_EMPTY"
UNKNOWN_OPERAND = "UNKNOWN_OPERAND"
GOAL_UNACHIEVED = "GOAL_UNACHIEVED"
PRECONDITION = "PRECONDITION"
BAD_DURATION = "BAD_DURATION"
BAD_GATE = "BAD_GATE"
CONCURRENT_ADJACENT = "CONCURRENT_ADJACENT"


@dataclass(frozen=True)
class ScheduledGate:
    kind: GateKind
    qstates: tuple[QState, ...]
    start: Time
    duration: Time
    target: int | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        qstates = tuple(self.qstates)
        if len(qstates) == 2:
            # two-qstate gates are symmetric; a fixed operand order keeps schedules comparable
            qstates = canon(*qstates)
        object.__setattr__(self, "qstates", qstates)
        object.__setattr__(self, "start", exact(self.start))
        object.__setattr__(self, "duration", exact(self.duration))
        single = kind in (GateKind.MOVE, GateKind.DONE_PS)
        if len(self.qstates) != (1 if single else 2):
            raise ValueError(f"{kind.value} takes {1 if single else 2} operand(s), got {len(self.qstates)}")
        if (kind is GateKind.MOVE) != (self.target is not None):
            raise ValueError("a target qubit is required for MOVE and only for MOVE")
        if self.duration < 0:
            raise ValueError("negative gate duration")

    @property
    def end(self) -> Time:
        return self.start + self.duration

    def to_json(self) -> dict:
        d = {"kind": self.kind.value, "qstates": [str(s) for s in self.qstates]}
        if self.target is not None:
            d["target"] = self.target
        d["start"] = time_to_json(self.start)
        d["duration"] = time_to_json(self.duration)
        return d

    @classmethod
    def from_json(cls, d: dict) -> ScheduledGate:
        target = d.get("target")
        return cls(
            GateKind(d["kind"]),
            tuple(QState.parse(s) for s in d["qstates"]),
            exact(d["start"]),
            exact(d["duration"]),
            None if target is None else int(target),
        )


@dataclass(frozen=True)
class Schedule:
    gates: tuple[ScheduledGate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    @property
    def makespan(self) -> Time:
        return max((g.end for g in self.gates), default=0)

    def sorted(self) -> Schedule:
        return Schedule(sorted(self.gates, key=lambda g: (g.start, g.kind.value, g.qstates, g.target or -1)))

    def count(self, kind: GateKind) -> int:
        return sum(g.kind is kind for g in self.gates)

    def to_json(self) -> dict:
        return {"gates": [g.to_json() for g in self.gates], "makespan": time_to_json(self.makespan)}

    @classmethod
    def from_json(cls, data: dict) -> Schedule:
        return cls(tuple(ScheduledGate.from_json(g) for g in data.get("gates", ())))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Schedule:
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Violation:
    code: str
    gate: int | None
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "gate": self.gate, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    achieved_ps: frozenset[QPair]
    achieved_mix: frozenset[QPair]
    makespan: Time
    final_placement: Placement | None = None
    # qubits each gate acted on (None for gates that could not be located)
    qubits: tuple[tuple[int, ...] | None, ...] = field(default=(), repr=False)

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "makespan": time_to_json(self.makespan),
            "violations": [v.to_json() for v in self.violations],
            "achieved_ps": len(self.achieved_ps),
            "achieved_mix": len(self.achieved_mix),
        }


def validate(
    problem: RoutingProblem,
    schedule: Schedule,
    *,
    strict_adjacency: bool = False,
    relaxed_swap_mix_as_swap: bool = False,
) -> ValidationReport:
    """Replay ``schedule`` on ``problem`` and collect every violation.

    ``strict_adjacency`` additionally forbids concurrent gates whose qubit sets
    are coupled to each other. ``relaxed_swap_mix_as_swap`` drops the
    ps_completed requirement for SWAP_MIX_AS_SWAP.
    """
    gates = schedule.gates
    hw = problem.hardware
    mix_graph = problem.mix_graph
    known = set(problem.qstates)
    ps_goals = problem.goals.ps_goals
    mix_goals = problem.goals.mix_goals
    violations: list[Violation] = []

    def flag(code: str, i: int | None, msg: str) -> None:
        violations.append(Violation(code, i, msg))

    runnable = []
    for i, g in enumerate(gates):
        if g.duration != problem.durations.of(g.kind):
            flag(BAD_DURATION, i, f"{g.kind.value} lasts {problem.durations.of(g.kind)}, schedule says {g.duration}")
        if g.start < 0:
            flag(BAD_GATE, i, f"negative start time {g.start}")
            continue
        missing = [s for s in g.qstates if s not in known]
        if missing:
            flag(UNKNOWN_OPERAND, i, f"unknown qstate(s) {', '.join(map(str, missing))}")
            continue
        if len(set(g.qstates)) != len(g.qstates):
            flag(BAD_GATE, i, "operands must be distinct")
            continue
        if g.target is not None and not 0 <= g.target < hw.qubit_count:
            flag(BAD_GATE, i, f"MOVE target {g.target} out of range")
            continue
        runnable.append(i)

    # location replay: ends at time t are applied before starts at time t
    loc = dict(problem.initial_placement)
    occ = {q: s for s, q in loc.items()}
    order = sorted(runnable, key=lambda i: (gates[i].start, i))
    pending: list[tuple[Time, int, int]] = []
    effects: dict[int, tuple] = {}
    qubits: list[tuple[int, ...] | None] = [None] * len(gates)

    def apply_end(i: int) -> None:
        eff = effects.pop(i, None)
        if eff is None:
            return
        if eff[0] == "move":
            _, s, src, dst = eff
            occ.pop(src, None)
            occ[dst] = s
            loc[s] = dst
        else:
            _, s1, q1, s2, q2 = eff
            occ[q1], occ[q2] = s2, s1
            loc[s1], loc[s2] = q2, q1

    claimed_ps: dict[QPair, Time] = {}
    claimed_mix: dict[QPair, Time] = {}
    for i in order:
        g = gates[i]
        while pending and pending[0][0] <= g.start:
            _, _, j = heapq.heappop(pending)
            apply_end(j)
        heapq.heappush(pending, (g.end, i, i))
        kind = g.kind
        if kind is GateKind.DONE_PS:
            qubits[i] = ()
            continue
        if kind is GateKind.MOVE:
            (s,) = g.qstates
            src, dst = loc[s], g.target
            qubits[i] = (src, dst)
            if not hw.coupled(src, dst):
                flag(NOT_ADJACENT, i, f"MOVE {s}: qubits {src} and {dst} are not coupled")
                continue
            if occ.get(dst) is not None:
                flag(NOT_EMPTY, i, f"MOVE {s}: target qubit {dst} holds {occ[dst]}")
                continue
            effects[i] = ("move", s, src, dst)
            continue

        s1, s2 = g.qstates
        q1, q2 = loc[s1], loc[s2]
        qubits[i] = (q1, q2)
        if not hw.coupled(q1, q2):
            flag(NOT_ADJACENT, i, f"{kind.value}({s1},{s2}): qubits {q1} and {q2} are not coupled")
            continue
        pair = canon(s1, s2)
        if kind in (GateKind.PS, GateKind.SWAP_PS):
            # the phase gate itself would change the circuit on a non-goal pair
            if pair not in ps_goals:
                flag(PRECONDITION, i, f"{kind.value}({s1},{s2}) is not a PS goal")
            elif pair in claimed_ps:
                flag(DUPLICATE_GOAL, i, f"PS goal ({s1},{s2}) already achieved")
            else:
                claimed_ps[pair] = g.end
        elif kind in (GateKind.MIX, GateKind.SWAP_MIX):
            if not mixgraph_edge(mix_graph, s1, s2):
                flag(PRECONDITION, i, f"{kind.value}({s1},{s2}): colors are not mix-graph neighbours")
            elif pair in claimed_mix:
                flag(DUPLICATE_GOAL, i, f"MIX goal ({s1},{s2}) already achieved")
            else:
                claimed_mix[pair] = g.end
        elif kind is GateKind.SWAP_MIX_AS_SWAP and not same_mixgraph(mix_graph, s1, s2):
            flag(PRECONDITION, i, f"SWAP_MIX_AS_SWAP({s1},{s2}) needs same vertex and non-adjacent colors")
        if kind.exchanges:
            effects[i] = ("swap", s1, q1, s2, q2)
    while pending:
        _, _, j = heapq.heappop(pending)
        apply_end(j)

    # PS-before-MIX ordering, evaluated against achievement end times
    ps_done: dict[QState, Time | None] = {}
    for s in problem.qstates:
        ends = [claimed_ps.get(canon(s, p)) for p in problem.ps_partners[s]]
        ps_done[s] = None if any(e is None for e in ends) else max(ends, default=0)
    for i in order:
        g = gates[i]
        needs = g.kind in (GateKind.MIX, GateKind.SWAP_MIX, GateKind.DONE_PS) or (
            g.kind is GateKind.SWAP_MIX_AS_SWAP and not relaxed_swap_mix_as_swap
        )
        if not needs:
            continue
        late = [s for s in g.qstates if ps_done[s] is None or ps_done[s] > g.start]
        if late:
            flag(ORDERING, i, f"{g.kind.value} at {g.start} before PS phase of {', '.join(map(str, late))} completed")

    _check_overlaps(gates, qubits, hw, strict_adjacency, flag)

    for pair in sorted(ps_goals - claimed_ps.keys()):
        flag(GOAL_UNACHIEVED, None, f"PS goal ({pair[0]},{pair[1]}) never achieved")
    for pair in sorted(mix_goals - claimed_mix.keys()):
        flag(GOAL_UNACHIEVED, None, f"MIX goal ({pair[0]},{pair[1]}) never achieved")

    violations.sort(key=lambda v: (v.gate is None, v.gate if v.gate is not None else 0, v.code, v.message))
    try:
        final = Placement(loc)
    except ValueError:
        final = None
    return ValidationReport(
        ok=not violations,
        violations=tuple(violations),
        achieved_ps=frozenset(claimed_ps),
        achieved_mix=frozenset(claimed_mix),
        makespan=schedule.makespan,
        final_placement=final,
        qubits=tuple(qubits),
    )


def _check_overlaps(gates, qubits, hw, strict_adjacency, flag) -> None:
    by_qubit: dict[int, list[int]] = {}
    for i, qs in enumerate(qubits):
        if qs and gates[i].duration > 0:
            for q in qs:
                by_qubit.setdefault(q, []).append(i)
    reported = set()
    for q, idx in sorted(by_qubit.items()):
        idx.sort(key=lambda i: (gates[i].start, i))
        for a_pos, a in enumerate(idx):
            for b in idx[a_pos + 1:]:
                if gates[b].start >= gates[a].end:
                    break
                key = (a, b)
                if key not in reported:
                    reported.add(key)
                    flag(RESOURCE_OVERLAP, b, f"gates {a} and {b} both use qubit {q} at overlapping times")
    if not strict_adjacency:
        return
    timed = sorted((i for i, qs in enumerate(qubits) if qs and gates[i].duration > 0), key=lambda i: gates[i].start)
    for a_pos, a in enumerate(timed):
        for b in timed[a_pos + 1:]:
            if gates[b].start >= gates[a].end:
                break
            qa, qb = set(qubits[a]), set(qubits[b])
            if qa & qb:
                continue
            if any(hw.coupled(x, y) for x in qa for y in qb):
                flag(CONCURRENT_ADJACENT, b, f"gates {a} and {b} run concurrently on coupled qubits")


def lower_bound(problem: RoutingProblem) -> Time:
    """Per-qstate serial workload bound.

    Gates sharing a qstate cannot overlap, so each qstate needs at least its
    cheapest way to do all of its PS goals plus all of its MIX goals.
    """
    d = problem.durations
    ps_cost = min(d.ps, d.swap_ps)
    mix_cost = min(d.mix, d.swap_mix)
    return max(
        (len(problem.ps_partners[s]) * ps_cost + len(problem.mix_partners[s]) * mix_cost for s in problem.qstates),
        default=0,
    )
