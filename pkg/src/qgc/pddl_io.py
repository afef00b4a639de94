"""PDDL emission for external planners and plan-file parsing.

Two encodings are produced:

* a temporal (PDDL2.1) domain/problem pair for the full routing problem, with
  durative actions grounded per hardware coupling and qstates declared as
  domain constants ``s<vertex>_<color>``;
* a classical pair with action costs for the qubit-initialization relaxation
  (``swap``, ``swap_ps`` and ``ps`` only).

Plan files use the usual temporal-planner line format
``<start>: (<action> <args...>) [<duration>]``; lines starting with ``;`` are
comments.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from .model import GateKind, HardwareGraph, Placement, QState, RoutingProblem, Time, canon, exact
from .qinit import QiProblem
from .validator import Schedule, ScheduledGate, validate

# durative families grounded per coupling, in emission order
PAIR_FAMILIES: tuple[tuple[str, GateKind], ...] = (
    ("ps", GateKind.PS),
    ("mix", GateKind.MIX),
    ("swap", GateKind.SWAP),
    ("swap_ps", GateKind.SWAP_PS),
    ("swap_mix", GateKind.SWAP_MIX),
    ("swap_mix_as_swap", GateKind.SWAP_MIX_AS_SWAP),
)
FAMILY_OF = {kind: name for name, kind in PAIR_FAMILIES} | {GateKind.MOVE: "move", GateKind.DONE_PS: "done_ps"}
ACTION_HEADER = re.compile(
    r"\(:(?:durative-)?action\s+(ps|mix|swap|swap_ps|swap_mix|swap_mix_as_swap|move)_at_q(\d+)_q(\d+)\b"
    r"|\(:action\s+done_ps_(s\d+_\d+)\b"
)

TIME_TOLERANCE = Fraction(1, 10**6)


class PlanParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class PlanDurationWarning(UserWarning):
    """A plan line states a duration that differs from the domain's."""


class IllegalPlanError(ValueError):
    """Replaying a plan reached a state where a step's preconditions fail."""


def object_name(s: QState) -> str:
    return f"s{s.vertex}_{s.color}"


def number(t: Time) -> str:
    """Domain-side number: ``4.0``, ``0.5``; non-terminating rationals get 6 decimals."""
    t = Fraction(t)
    if t.denominator == 1:
        return f"{t.numerator}.0"
    d = Decimal(t.numerator) / Decimal(t.denominator)
    text = format(d, "f")
    return text if len(text.split(".")[1]) <= 6 else format(d, ".6f")


def plan_time(t: Time) -> str:
    """Plan-side number: three decimals when exact, six otherwise."""
    t = Fraction(t)
    d = Decimal(t.numerator) / Decimal(t.denominator)
    return format(d, ".3f") if (t * 1000).denominator == 1 else format(d, ".6f")


def parse_time(text: str) -> Time:
    """Decimal to exact time, snapping to a nearby small-denominator rational."""
    value = Fraction(text)
    snapped = value.limit_denominator(1000)
    if abs(snapped - value) <= TIME_TOLERANCE:
        return exact(snapped)
    return exact(value.limit_denominator(10**6))


@dataclass(frozen=True)
class Grounding:
    """Action name to (kind, qubit a, qubit b) and object name to qstate.

    For ``move_at_q<a>_q<b>`` the qstate travels from ``a`` to ``b``.
    ``done_ps_<obj>`` maps to ``(DONE_PS, None, None)``; its qstate is
    ``done_ps_of[name]``.
    """

    actions: dict[str, tuple[GateKind, int | None, int | None]]
    objects: dict[str, QState]
    durations: dict[str, Time]
    done_ps_of: dict[str, QState] = field(default_factory=dict)

    def object_of(self, name: str) -> QState:
        return self.objects[name]

    def name_of(self, s: QState) -> str:
        name = object_name(s)
        if self.objects.get(name) != s:
            raise KeyError(s)
        return name


@dataclass(frozen=True)
class PddlArtifact:
    domain_text: str
    problem_text: str
    grounding: Grounding
    name: str
    classical: bool = False

    def paths(self, directory: str | Path) -> tuple[Path, Path]:
        stem = f"{self.name}.qi" if self.classical else self.name
        d = Path(directory)
        return d / f"{stem}.domain.pddl", d / f"{stem}.problem.pddl"

    def write(self, directory: str | Path) -> tuple[Path, Path]:
        dom, prob = self.paths(directory)
        dom.parent.mkdir(parents=True, exist_ok=True)
        dom.write_text(self.domain_text)
        prob.write_text(self.problem_text)
        return dom, prob

    def check(self) -> list[str]:
        declared = declared_predicates(self.domain_text)
        return [f"domain: {e}" for e in check_pddl(self.domain_text, declared)] + [
            f"problem: {e}" for e in check_pddl(self.problem_text, declared)
        ]


def _sanitize(label: str) -> str:
    name = re.sub(r"[^a-z0-9_-]+", "-", label.lower()).strip("-")
    return name if name and name[0].isalpha() else f"qgc-{name}".rstrip("-")


def _at(when: str, atom: str) -> str:
    return f"({when} {atom})"


def _location_effects(qa: int, qb: int, exchange: bool) -> list[str]:
    la, lb = f"located_at_q{qa}", f"located_at_q{qb}"
    fx = [_at("at start", f"(not ({la} ?s1))"), _at("at start", f"(not ({lb} ?s2))")]
    if exchange:
        fx += [_at("at end", f"({la} ?s2)"), _at("at end", f"({lb} ?s1)")]
    else:
        fx += [_at("at end", f"({la} ?s1)"), _at("at end", f"({lb} ?s2)")]
    return fx


def _durative(name: str, params: str, duration: Time, conditions: list[str], effects: list[str]) -> str:
    pad_c = "\n" + " " * 17
    pad_e = "\n" + " " * 14
    return (
        f"  (:durative-action {name}\n"
        f"    :parameters ({params})\n"
        f"    :duration (= ?duration {number(duration)})\n"
        f"    :condition (and {pad_c.join(conditions)})\n"
        f"    :effect (and {pad_e.join(effects)}))\n"
    )


def _pair_action(family: str, kind: GateKind, qa: int, qb: int, duration: Time) -> str:
    cond = [_at("at start", f"(located_at_q{qa} ?s1)"), _at("at start", f"(located_at_q{qb} ?s2)")]
    fx = _location_effects(qa, qb, kind.exchanges)
    if kind in (GateKind.PS, GateKind.SWAP_PS):
        cond += [_at("at start", "(edge ?s1 ?s2)"), _at("at start", "(not (psed ?s1 ?s2))")]
        fx += [_at("at end", "(psed ?s1 ?s2)"), _at("at end", "(psed ?s2 ?s1)")]
    elif kind in (GateKind.MIX, GateKind.SWAP_MIX):
        cond += [
            _at("at start", "(ps_completed ?s1)"),
            _at("at start", "(ps_completed ?s2)"),
            _at("at start", "(mixgraph_edge ?s1 ?s2)"),
            _at("at start", "(not (mixed ?s1 ?s2))"),
        ]
        fx += [_at("at end", "(mixed ?s1 ?s2)"), _at("at end", "(mixed ?s2 ?s1)")]
    elif kind is GateKind.SWAP_MIX_AS_SWAP:
        cond += [
            _at("at start", "(ps_completed ?s1)"),
            _at("at start", "(ps_completed ?s2)"),
            _at("at start", "(same_mixgraph ?s1 ?s2)"),
            _at("at start", "(not (mixgraph_edge ?s1 ?s2))"),
        ]
    return _durative(f"{family}_at_q{qa}_q{qb}", "?s1 - qstate ?s2 - qstate", duration, cond, fx)


def _move_action(src: int, dst: int, duration: Time) -> str:
    cond = [_at("at start", f"(located_at_q{src} ?s)"), _at("at start", f"(empty_q{dst})")]
    fx = [
        _at("at start", f"(not (located_at_q{src} ?s))"),
        _at("at start", f"(not (empty_q{dst}))"),
        _at("at end", f"(located_at_q{dst} ?s)"),
        _at("at end", f"(empty_q{src})"),
    ]
    return _durative(f"move_at_q{src}_q{dst}", "?s - qstate", duration, cond, fx)


def _done_ps_action(s: QState, partners) -> str:
    me = object_name(s)
    pre = " ".join(f"(psed {me} {object_name(p)})" for p in partners)
    return (
        f"  (:action done_ps_{me}\n"
        f"    :parameters ()\n"
        f"    :precondition (and {pre})\n"
        f"    :effect (ps_completed {me}))\n"
    ).replace("(and )", "(and)")


def _predicates(qubits: int, temporal: bool) -> str:
    lines = [f"    (located_at_q{q} ?s - qstate)" for q in range(qubits)]
    lines += [f"    (empty_q{q})" for q in range(qubits)]
    pairs = ("psed", "mixed", "edge", "mixgraph_edge", "same_mixgraph") if temporal else ("edge", "psed")
    lines += [f"    ({p} ?s1 - qstate ?s2 - qstate)" for p in pairs]
    if temporal:
        lines.append("    (ps_completed ?s - qstate)")
    return "  (:predicates\n" + "\n".join(lines) + ")\n"


def _both(pred: str, pairs) -> list[str]:
    out = []
    for a, b in sorted(pairs):
        out += [f"({pred} {object_name(a)} {object_name(b)})", f"({pred} {object_name(b)} {object_name(a)})"]
    return out


def _location_init(placement: Placement, qubits: int) -> list[str]:
    init = [f"(located_at_q{q} {object_name(s)})" for s, q in sorted(placement.items(), key=lambda x: x[1])]
    used = set(placement.values())
    return init + [f"(empty_q{q})" for q in range(qubits) if q not in used]


def _block(head: str, atoms: list[str]) -> str:
    if not atoms:
        return f"  ({head})\n"
    return f"  ({head}\n" + "\n".join(f"    {a}" for a in atoms) + ")\n"


def emit_temporal(problem: RoutingProblem, name: str | None = None) -> PddlArtifact:
    """Temporal domain and problem for the full routing task."""
    name = _sanitize(name or problem.label or "qgc")
    hw, d = problem.hardware, problem.durations
    qstates = problem.qstates
    objects = {object_name(s): s for s in qstates}
    actions: dict[str, tuple[GateKind, int | None, int | None]] = {}
    durations: dict[str, Time] = {}
    done_ps_of: dict[str, QState] = {}

    parts = [
        f"(define (domain {name})\n",
        "  (:requirements :strips :typing :durative-actions :negative-preconditions)\n",
        "  (:types qstate)\n",
        "  (:constants " + " ".join(objects) + " - qstate)\n",
        _predicates(hw.qubit_count, temporal=True),
    ]
    for qa, qb in sorted(hw.couplings):
        for family, kind in PAIR_FAMILIES:
            action = f"{family}_at_q{qa}_q{qb}"
            actions[action], durations[action] = (kind, qa, qb), d.of(kind)
            parts.append(_pair_action(family, kind, qa, qb, d.of(kind)))
        for src, dst in ((qa, qb), (qb, qa)):
            action = f"move_at_q{src}_q{dst}"
            actions[action], durations[action] = (GateKind.MOVE, src, dst), d.move
            parts.append(_move_action(src, dst, d.move))
    for s in qstates:
        action = f"done_ps_{object_name(s)}"
        actions[action], durations[action] = (GateKind.DONE_PS, None, None), 0
        done_ps_of[action] = s
        parts.append(_done_ps_action(s, problem.ps_partners[s]))
    parts.append(")\n")

    ps, mix = problem.goals.ps_goals, problem.goals.mix_goals
    same = [
        canon(QState(v, a), QState(v, b))
        for v in range(problem.problem_graph.vertex_count)
        for a in range(problem.mix_graph.color_count)
        for b in range(a + 1, problem.mix_graph.color_count)
        if not problem.mix_graph.has_edge(a, b)
    ]
    init = _location_init(problem.initial_placement, hw.qubit_count)
    init += _both("edge", ps) + _both("mixgraph_edge", mix) + _both("same_mixgraph", same)
    goal = [f"(mixed {object_name(a)} {object_name(b)})" for a, b in sorted(mix)]
    # qstates without MIX goals would otherwise never be forced through their PS goals
    goal += [f"(ps_completed {object_name(s)})" for s in qstates if problem.ps_partners[s] and not problem.mix_partners[s]]
    problem_text = (
        f"(define (problem {name}-problem)\n"
        f"  (:domain {name})\n"
        + _block(":init", init)
        + "  (:goal (and"
        + "".join(f"\n    {g}" for g in goal)
        + "))\n"
        "  (:metric minimize (total-time)))\n"
    )
    grounding = Grounding(actions, objects, durations, done_ps_of)
    return PddlArtifact("".join(parts), problem_text, grounding, name)


def _classical_action(name: str, qa: int, qb: int, cost: Time, ps: bool, exchange: bool) -> str:
    la, lb = f"located_at_q{qa}", f"located_at_q{qb}"
    pre = [f"({la} ?s1)", f"({lb} ?s2)"]
    eff = []
    if exchange:
        eff += [f"(not ({la} ?s1))", f"(not ({lb} ?s2))", f"({la} ?s2)", f"({lb} ?s1)"]
    if ps:
        pre += ["(edge ?s1 ?s2)", "(not (psed ?s1 ?s2))"]
        eff += ["(psed ?s1 ?s2)", "(psed ?s2 ?s1)"]
    # classical planners expect integral costs; keep them integral whenever possible
    cost_text = str(cost) if Fraction(cost).denominator == 1 else number(cost)
    eff.append(f"(increase (total-cost) {cost_text})")
    return (
        f"  (:action {name}\n"
        "    :parameters (?s1 - qstate ?s2 - qstate)\n"
        f"    :precondition (and {' '.join(pre)})\n"
        f"    :effect (and {' '.join(eff)}))\n"
    )


def emit_qi_classical(qi: QiProblem, name: str = "qgc") -> PddlArtifact:
    """Classical cost-optimal encoding of the qubit-initialization relaxation."""
    name = _sanitize(name)
    hw = qi.hardware
    qstates = sorted(qi.start_placement)
    objects = {object_name(s): s for s in qstates}
    actions: dict[str, tuple[GateKind, int | None, int | None]] = {}
    costs: dict[str, Time] = {}
    parts = [
        f"(define (domain {name}-qi)\n",
        "  (:requirements :strips :typing :negative-preconditions :action-costs)\n",
        "  (:types qstate)\n",
        _predicates(hw.qubit_count, temporal=False),
        "  (:functions (total-cost) - number)\n",
    ]
    for qa, qb in sorted(hw.couplings):
        for family, kind, cost in (
            ("swap", GateKind.SWAP, qi.swap_cost),
            ("swap_ps", GateKind.SWAP_PS, qi.swap_ps_cost),
            ("ps", GateKind.PS, qi.ps_cost),
        ):
            action = f"{family}_at_q{qa}_q{qb}"
            actions[action], costs[action] = (kind, qa, qb), cost
            parts.append(_classical_action(action, qa, qb, cost, kind is not GateKind.SWAP, kind.exchanges))
    parts.append(")\n")
    init = _location_init(qi.start_placement, hw.qubit_count) + _both("edge", qi.ps_goals) + ["(= (total-cost) 0)"]
    goal = [f"(psed {object_name(a)} {object_name(b)})" for a, b in sorted(qi.ps_goals)]
    problem_text = (
        f"(define (problem {name}-qi-problem)\n"
        f"  (:domain {name}-qi)\n"
        "  (:objects " + " ".join(objects) + " - qstate)\n"
        + _block(":init", init)
        + "  (:goal (and"
        + "".join(f"\n    {g}" for g in goal)
        + "))\n"
        "  (:metric minimize (total-cost)))\n"
    )
    return PddlArtifact("".join(parts), problem_text, Grounding(actions, objects, costs), name, classical=True)


def with_done_ps(problem: RoutingProblem, schedule: Schedule) -> Schedule:
    """Add a DONE_PS marker per qstate at the end of its last PS goal gate.

    Markers already present are kept and not duplicated. The temporal domain
    needs them: MIX-phase actions test ``ps_completed``.
    """
    goals = problem.goals.ps_goals
    first_end: dict = {}
    for gate in sorted(schedule.gates, key=lambda x: x.start):
        pair = gate.qstates
        if gate.kind in (GateKind.PS, GateKind.SWAP_PS) and pair in goals and pair not in first_end:
            first_end[pair] = gate.end
    marked = {x.qstates[0] for x in schedule.gates if x.kind is GateKind.DONE_PS}
    extra = []
    for s in problem.qstates:
        if s in marked:
            continue
        ends = [first_end.get(canon(s, p)) for p in problem.ps_partners[s]]
        if any(e is None for e in ends):
            continue
        extra.append(ScheduledGate(GateKind.DONE_PS, (s,), max(ends, default=0), 0))
    return Schedule(schedule.gates + tuple(extra))


def render_plan(problem: RoutingProblem, schedule: Schedule, done_ps: bool = False) -> str:
    """Plan-file text for ``schedule``; qubits come from replaying it on ``problem``.

    With ``done_ps`` the DONE_PS markers the temporal domain needs are added
    (see :func:`with_done_ps`).
    """
    if done_ps:
        schedule = with_done_ps(problem, schedule)
    report = validate(problem, schedule)
    lines = [f"; {problem.label or 'plan'}", f"; makespan {plan_time(schedule.makespan)}"]
    for g, qubits in zip(schedule.gates, report.qubits):
        head = f"{plan_time(g.start)}: "
        tail = f" [{plan_time(g.duration)}]"
        if g.kind is GateKind.DONE_PS:
            lines.append(f"{head}(done_ps_{object_name(g.qstates[0])}){tail}")
        elif g.kind is GateKind.MOVE:
            src, dst = qubits
            lines.append(f"{head}(move_at_q{src}_q{dst} {object_name(g.qstates[0])}){tail}")
        else:
            if len(qubits) != 2:
                raise ValueError(f"cannot locate operands of {g}")
            (qa, sa), (qb, sb) = sorted(zip(qubits, g.qstates))
            lines.append(f"{head}({FAMILY_OF[g.kind]}_at_q{qa}_q{qb} {object_name(sa)} {object_name(sb)}){tail}")
    return "\n".join(lines) + "\n"


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)"
_LINE = re.compile(rf"^\s*(?P<t>{_NUM})\s*:\s*\((?P<body>[^()]*)\)\s*(?:\[\s*(?P<d>{_NUM})\s*\])?\s*$")


def parse_plan(text: str, grounding: Grounding) -> Schedule:
    """Parse plan lines back into a schedule.

    Durations that disagree with the domain raise a :class:`PlanDurationWarning`
    and are kept as written so the validator can report them.
    """
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        m = _LINE.match(line)
        if not m:
            raise PlanParseError(lineno, f"malformed plan line {raw!r}")
        words = m.group("body").lower().split()
        if not words:
            raise PlanParseError(lineno, "empty action")
        action, args = words[0], words[1:]
        if action not in grounding.actions:
            raise PlanParseError(lineno, f"unknown action {action!r}")
        kind, qa, qb = grounding.actions[action]
        start = parse_time(m.group("t"))
        expected = grounding.durations[action]
        duration = parse_time(m.group("d")) if m.group("d") is not None else expected
        if duration != expected:
            warnings.warn(f"line {lineno}: {action} lasts {expected}, plan says {duration}", PlanDurationWarning, stacklevel=2)
        try:
            operands = tuple(grounding.objects[a] for a in args)
        except KeyError as exc:
            raise PlanParseError(lineno, f"unknown object {exc.args[0]!r}") from None
        if kind is GateKind.DONE_PS:
            if operands and operands != (grounding.done_ps_of[action],):
                raise PlanParseError(lineno, f"{action} takes no arguments")
            gates.append(ScheduledGate(kind, (grounding.done_ps_of[action],), start, duration))
            continue
        arity = 1 if kind is GateKind.MOVE else 2
        if len(operands) != arity:
            raise PlanParseError(lineno, f"{action} takes {arity} argument(s), got {len(operands)}")
        target = qb if kind is GateKind.MOVE else None
        gates.append(ScheduledGate(kind, operands, start, duration, target))
    return Schedule(gates)


def parse_classical_plan(text: str, grounding: Grounding) -> list[tuple[str, tuple[QState, ...]]]:
    """Sequential plan, one ``(action args...)`` per line (``sas_plan`` style)."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        m = re.fullmatch(r"(?:\d+\s*:\s*)?\(([^()]*)\)(?:\s*\[[^\]]*\])?", line)
        if not m:
            raise PlanParseError(lineno, f"malformed plan line {raw!r}")
        words = m.group(1).lower().split()
        if not words or words[0] not in grounding.actions:
            raise PlanParseError(lineno, f"unknown action {words[0] if words else ''!r}")
        try:
            steps.append((words[0], tuple(grounding.objects[a] for a in words[1:])))
        except KeyError as exc:
            raise PlanParseError(lineno, f"unknown object {exc.args[0]!r}") from None
    return steps


def emit_final_placement(
    plan: Schedule | list[tuple[str, tuple[QState, ...]]],
    start_placement: Placement,
    grounding: Grounding | None = None,
    hardware: HardwareGraph | None = None,
) -> Placement:
    """Placement reached after replaying ``plan`` from ``start_placement``.

    ``plan`` is either a :class:`Schedule` (relocations applied in order of
    gate end) or classical steps from :func:`parse_classical_plan`, which need
    ``grounding`` to recover qubits.
    """
    loc = dict(start_placement)
    occ = {q: s for s, q in loc.items()}

    def relocate(step: str, moves: list[tuple[QState, int]]) -> None:
        for s, _ in moves:
            occ.pop(loc[s], None)
        for s, q in moves:
            if q in occ:
                raise IllegalPlanError(f"{step}: qubit {q} is occupied")
            loc[s] = q
            occ[q] = s

    if isinstance(plan, Schedule):
        order = sorted(range(len(plan.gates)), key=lambda i: (plan.gates[i].end, plan.gates[i].start, i))
        for i in order:
            g = plan.gates[i]
            step = f"gate {i} ({g.kind.value})"
            if any(s not in loc for s in g.qstates):
                raise IllegalPlanError(f"{step}: unknown qstate")
            if g.kind is GateKind.MOVE:
                (s,) = g.qstates
                if hardware is not None and not hardware.coupled(loc[s], g.target):
                    raise IllegalPlanError(f"{step}: qubits {loc[s]} and {g.target} are not coupled")
                relocate(step, [(s, g.target)])
            elif g.kind.exchanges:
                s1, s2 = g.qstates
                if hardware is not None and not hardware.coupled(loc[s1], loc[s2]):
                    raise IllegalPlanError(f"{step}: qubits {loc[s1]} and {loc[s2]} are not coupled")
                relocate(step, [(s1, loc[s2]), (s2, loc[s1])])
        return Placement(loc)

    if grounding is None:
        raise ValueError("classical plans need the grounding map")
    for n, (action, args) in enumerate(plan, 1):
        kind, qa, qb = grounding.actions[action]
        step = f"step {n} ({action})"
        if kind is GateKind.MOVE:
            (s,) = args
            if loc.get(s) != qa:
                raise IllegalPlanError(f"{step}: {object_name(s)} is not on q{qa}")
            relocate(step, [(s, qb)])
            continue
        s1, s2 = args
        if loc.get(s1) != qa or loc.get(s2) != qb:
            raise IllegalPlanError(f"{step}: operands are not on q{qa} and q{qb}")
        if kind.exchanges:
            relocate(step, [(s1, qb), (s2, qa)])
    return Placement(loc)


# ---------------------------------------------------------------- syntax check

_KEYWORDS = frozenset(
    {"define", "domain", "problem", "and", "not", "at", "over", "=", "increase", "total-time", "total-cost", "minimize"}
)
_LOGIC_KEYS = frozenset({":condition", ":effect", ":precondition", ":init", ":goal"})


def _tokens(text: str):
    for raw in text.splitlines():
        raw = raw.split(";", 1)[0]
        yield from raw.replace("(", " ( ").replace(")", " ) ").split()


def parse_sexpr(text: str) -> list:
    """Nested lists of atoms; raises ValueError on unbalanced parentheses."""
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok.lower())
    if len(stack) != 1:
        raise ValueError(f"{len(stack) - 1} unclosed '('")
    return stack[0]


def _find(forms, head: str):
    for f in forms:
        if isinstance(f, list):
            if f and f[0] == head:
                yield f
            yield from _find(f, head)


def declared_predicates(domain_text: str) -> set[str]:
    preds = set()
    for block in _find(parse_sexpr(domain_text), ":predicates"):
        preds.update(p[0] for p in block[1:] if isinstance(p, list) and p)
    return preds


def check_pddl(text: str, declared: set[str] | None = None) -> list[str]:
    """Surface checks: balanced forms, a single ``define``, declared predicates only."""
    try:
        forms = parse_sexpr(text)
    except ValueError as exc:
        return [str(exc)]
    problems = []
    if len(forms) != 1 or not isinstance(forms[0], list) or forms[0][:1] != ["define"]:
        return ["expected exactly one (define ...) form"]
    if declared is None:
        declared = declared_predicates(text)

    def walk(form, in_logic: bool) -> None:
        if not isinstance(form, list) or not form:
            return
        head = form[0]
        if isinstance(head, str) and head.startswith(":"):
            # (:init ...) and (:goal ...) hold logic directly; action bodies use :key value pairs
            logic = head in _LOGIC_KEYS
            for sub in form[1:]:
                if isinstance(sub, str) and sub.startswith(":"):
                    logic = sub in _LOGIC_KEYS
                    continue
                walk(sub, logic)
            return
        if in_logic and isinstance(head, str):
            if head not in declared and head not in _KEYWORDS:
                problems.append(f"undeclared predicate {head!r}")
        for sub in form[1:] if isinstance(head, str) else form:
            walk(sub, in_logic)

    walk(forms[0], False)
    return problems


def count_families(domain_text: str) -> dict[str, int]:
    """Action headers per family (``move`` counts both directions of a coupling)."""
    counts = {name: 0 for name, _ in PAIR_FAMILIES} | {"move": 0, "done_ps": 0}
    for m in ACTION_HEADER.finditer(domain_text):
        counts[m.group(1) or "done_ps"] += 1
    return counts
