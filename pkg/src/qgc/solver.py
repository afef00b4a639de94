"""Anytime routing solver and an exhaustive branch-and-bound oracle.

The solver repeats randomized greedy *rollouts*. Each rollout walks forward in
time; at every decision point it

1. starts every available goal gate (PS or MIX family) on free, coupled
   qubits, most loaded qstates first;
2. fills the remaining free couplings with routing gates (SWAP, MOVE,
   SWAP_MIX_AS_SWAP) that strictly shrink the summed distance between
   unfinished goal partners;
3. jumps to the next gate completion.

PS partners count towards that distance until a qstate's PS goals are all
claimed; MIX partners count from then on. When nothing is running and nothing
helps, an escape step walks one operand of the closest open goal towards its
partner. Too many escapes in a row switch the rollout to a sequential mode
that pursues one goal at a time, which always terminates.

The best schedule over all rollouts is returned and is always validated.
"""

from __future__ import annotations

import logging
import random
import time as _time
from dataclasses import dataclass, field

from .model import GateKind, QState, RoutingProblem, Time, canon, same_mixgraph
from .validator import Schedule, ScheduledGate, lower_bound, validate

log = logging.getLogger(__name__)

INF = float("inf")


class SolverError(RuntimeError):
    """No complete schedule within the budget."""


@dataclass
class SolverConfig:
    seed: int = 0
    rollouts: int = 200
    # optional wall-clock cap in seconds, on top of the rollout count
    deadline: float | None = None
    # consecutive escape steps before a rollout turns sequential
    stagnation_window: int = 12
    # jitter on goal-gate priorities in randomized rollouts (rollout 0 has none)
    noise: float = 1.0
    # probability of taking a random improving routing move instead of the best
    epsilon: float = 0.15
    ps_weight: float = 1.0
    mix_weight: float = 1.0
    use_move: bool = True
    incumbent: Schedule | None = None

    def __post_init__(self):
        if self.rollouts < 1:
            raise ValueError("rollouts must be >= 1")
        if self.deadline is not None and self.deadline <= 0:
            raise ValueError("deadline must be positive")
        for name in ("noise", "epsilon", "ps_weight", "mix_weight"):
            v = getattr(self, name)
            if v != v or v in (INF, -INF):
                raise ValueError(f"{name} must be finite")


@dataclass
class SolveResult:
    schedule: Schedule
    makespan: Time
    lower_bound: Time
    rollouts: int
    completed: int
    # (rollout index, makespan) each time the incumbent improved
    history: list[tuple[int, Time]] = field(default_factory=list)
    seed: int = 0

    @property
    def moves(self) -> int:
        return self.schedule.count(GateKind.MOVE)


class _Context:
    """Integer-indexed view of a problem shared by all rollouts."""

    def __init__(self, problem: RoutingProblem, config: SolverConfig):
        self.problem = problem
        self.qstates: list[QState] = list(problem.qstates)
        ids = {s: i for i, s in enumerate(self.qstates)}
        self.n = len(self.qstates)
        hw = problem.hardware
        self.qubits = hw.qubit_count
        self.dist = hw.distances
        self.adj = hw.adjacency
        self.couplings = sorted(hw.couplings)
        self.d = problem.durations
        self.ps_pairs = sorted(problem.goals.ps_goals)
        self.mix_pairs = sorted(problem.goals.mix_goals)
        self.ps_of: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        self.mix_of: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        self.ps_id: dict[tuple[int, int], int] = {}
        self.mix_id: dict[tuple[int, int], int] = {}
        self.ps_pairs_ids = [(ids[a], ids[b]) for a, b in self.ps_pairs]
        self.mix_pairs_ids = [(ids[a], ids[b]) for a, b in self.mix_pairs]
        for g, (a, b) in enumerate(self.ps_pairs):
            i, j = ids[a], ids[b]
            self.ps_of[i].append((j, g))
            self.ps_of[j].append((i, g))
            self.ps_id[(i, j)] = self.ps_id[(j, i)] = g
        for g, (a, b) in enumerate(self.mix_pairs):
            i, j = ids[a], ids[b]
            self.mix_of[i].append((j, g))
            self.mix_of[j].append((i, g))
            self.mix_id[(i, j)] = self.mix_id[(j, i)] = g
        mix_graph = problem.mix_graph
        self.same_mix = {
            (i, j)
            for i, a in enumerate(self.qstates)
            for j, b in enumerate(self.qstates)
            if same_mixgraph(mix_graph, a, b)
        }
        self.start_pos = [problem.initial_placement[s] for s in self.qstates]
        self.wps = config.ps_weight
        self.wmix = config.mix_weight
        self.use_move = config.use_move
        self.smas_cheaper = self.d.swap_mix <= self.d.swap
        self.step_cap = 40 * (len(self.ps_pairs) + len(self.mix_pairs) + self.n) + 200
        self.stagnation_window = config.stagnation_window


class _Rollout:
    def __init__(self, ctx: _Context, rng: random.Random, noise: float, epsilon: float):
        self.c = ctx
        self.rng = rng
        self.noise = noise
        self.epsilon = epsilon
        self.pos = list(ctx.start_pos)
        self.occ = [-1] * ctx.qubits
        for s, q in enumerate(self.pos):
            self.occ[q] = s
        self.free: list[Time] = [0] * ctx.qubits
        self.ps_done = [False] * len(ctx.ps_pairs)
        self.mix_done = [False] * len(ctx.mix_pairs)
        self.ps_left = [len(p) for p in ctx.ps_of]
        self.mix_left = [len(p) for p in ctx.mix_of]
        self.ps_end: list[Time] = [0] * ctx.n
        self.remaining = len(ctx.ps_pairs) + len(ctx.mix_pairs)
        self.gates: list[tuple] = []
        self.sequential = False
        self.target: tuple[str, int] | None = None

    # -- state queries --------------------------------------------------

    def ps_ready(self, s: int, t: Time) -> bool:
        return self.ps_left[s] == 0 and self.ps_end[s] <= t

    def active(self, s: int):
        c = self.c
        for p, g in c.ps_of[s]:
            if not self.ps_done[g]:
                yield p, c.wps
        if self.ps_left[s] == 0:
            for p, g in c.mix_of[s]:
                if not self.mix_done[g] and self.ps_left[p] == 0:
                    yield p, c.wmix

    def gain(self, a: int, b: int) -> float:
        """Decrease of the weighted partner distance if qubits a and b exchange contents."""
        dist, pos = self.c.dist, self.pos
        s, u = self.occ[a], self.occ[b]
        delta = 0.0
        if s >= 0:
            for p, w in self.active(s):
                if p != u:
                    pp = pos[p]
                    delta += w * (dist[b][pp] - dist[a][pp])
        if u >= 0:
            for p, w in self.active(u):
                if p != s:
                    pp = pos[p]
                    delta += w * (dist[a][pp] - dist[b][pp])
        return -delta

    def work(self, s: int) -> Time:
        return self.ps_left[s] * self.c.d.ps + self.mix_left[s] * self.c.d.mix

    # -- state updates --------------------------------------------------

    def start(self, kind: GateKind, t: Time, a: int, b: int) -> Time:
        c = self.c
        dur = c.d.of(kind)
        end = t + dur
        s, u = self.occ[a], self.occ[b]
        self.free[a] = self.free[b] = end
        if kind is GateKind.MOVE:
            mover, src, dst = (s, a, b) if s >= 0 else (u, b, a)
            self.gates.append((kind, (mover,), t, dur, dst))
            self.occ[src], self.occ[dst] = -1, mover
            self.pos[mover] = dst
            return end
        self.gates.append((kind, (s, u), t, dur, None))
        if kind.exchanges:
            self.occ[a], self.occ[b] = u, s
            self.pos[s], self.pos[u] = b, a
        return end

    def claim_ps(self, g: int) -> None:
        self.ps_done[g] = True
        self.remaining -= 1
        for s in self.c.ps_pairs_ids[g]:
            self.ps_left[s] -= 1

    def claim_mix(self, g: int) -> None:
        self.mix_done[g] = True
        self.remaining -= 1
        for s in self.c.mix_pairs_ids[g]:
            self.mix_left[s] -= 1

    # -- phases ---------------------------------------------------------

    def goal_phase(self, t: Time) -> bool:
        c, free, occ = self.c, self.free, self.occ
        cands = []
        for a, b in c.couplings:
            if free[a] > t or free[b] > t:
                continue
            s, u = occ[a], occ[b]
            if s < 0 or u < 0:
                continue
            g = c.ps_id.get((s, u))
            if g is not None and not self.ps_done[g]:
                cands.append(("ps", g, a, b, s, u))
                continue
            g = c.mix_id.get((s, u))
            if g is not None and not self.mix_done[g] and self.ps_ready(s, t) and self.ps_ready(u, t):
                cands.append(("mix", g, a, b, s, u))
        if not cands:
            return False
        rng, noise = self.rng, self.noise
        cands.sort(key=lambda x: -(max(self.work(x[4]), self.work(x[5])) + noise * rng.random() * 4))
        used = set()
        for family, g, a, b, s, u in cands:
            if a in used or b in used:
                continue
            used.update((a, b))
            if family == "ps":
                self.claim_ps(g)
                swap = not self.sequential and self.gain(a, b) > 0
                if noise and not self.sequential and rng.random() < self.epsilon / 2:
                    swap = not swap
                kind = GateKind.SWAP_PS if swap else GateKind.PS
                end = self.start(kind, t, a, b)
                for x in (s, u):
                    if end > self.ps_end[x]:
                        self.ps_end[x] = end
            else:
                self.claim_mix(g)
                swap = not self.sequential and self.gain(a, b) > 0
                kind = GateKind.SWAP_MIX if swap else GateKind.MIX
                self.start(kind, t, a, b)
        return True

    def route_phase(self, t: Time) -> bool:
        c, free, occ = self.c, self.free, self.occ
        rng = self.rng
        dispatched = False
        while True:
            cands = []
            for a, b in c.couplings:
                if free[a] > t or free[b] > t:
                    continue
                s, u = occ[a], occ[b]
                if s < 0 and u < 0:
                    continue
                if s >= 0 and u >= 0:
                    if c.smas_cheaper and (s, u) in c.same_mix and self.ps_ready(s, t) and self.ps_ready(u, t):
                        kind = GateKind.SWAP_MIX_AS_SWAP
                    else:
                        kind = GateKind.SWAP
                elif c.use_move:
                    kind = GateKind.MOVE
                else:
                    continue
                gval = self.gain(a, b)
                if gval > 0:
                    cands.append((gval, kind, a, b))
            if not cands:
                return dispatched
            if self.noise and rng.random() < self.epsilon:
                pick = rng.choice(cands)
            else:
                top = max(x[0] for x in cands)
                best = [x for x in cands if x[0] == top]
                short = min(c.d.of(x[1]) for x in best)
                best = [x for x in best if c.d.of(x[1]) == short]
                pick = best[0] if len(best) == 1 else rng.choice(best)
            _, kind, a, b = pick
            self.start(kind, t, a, b)
            dispatched = True

    def open_goals(self) -> list[tuple[int, str, int, int, int]]:
        """(distance, family, goal id, s, p) for every goal that currently counts."""
        c, pos = self.c, self.pos
        out = []
        for g, (s, p) in enumerate(c.ps_pairs_ids):
            if not self.ps_done[g]:
                out.append((c.dist[pos[s]][pos[p]], "ps", g, s, p))
        if out:
            return out
        for g, (s, p) in enumerate(c.mix_pairs_ids):
            if not self.mix_done[g] and self.ps_left[s] == 0 and self.ps_left[p] == 0:
                out.append((c.dist[pos[s]][pos[p]], "mix", g, s, p))
        return out

    def step_toward(self, t: Time, s: int, p: int) -> bool:
        """Move ``s`` one coupling closer to ``p`` if the qubits involved are free."""
        c, pos = self.c, self.pos
        here, there = pos[s], pos[p]
        if self.free[here] > t:
            return False
        d = c.dist[here][there]
        options = [
            r
            for r in c.adj[here]
            if c.dist[r][there] == d - 1 and self.free[r] <= t and (c.use_move or self.occ[r] >= 0)
        ]
        if not options:
            return False
        r = options[0] if len(options) == 1 else self.rng.choice(options)
        u = self.occ[r]
        if u < 0:
            kind = GateKind.MOVE
        elif c.smas_cheaper and (s, u) in c.same_mix and self.ps_ready(s, t) and self.ps_ready(u, t):
            kind = GateKind.SWAP_MIX_AS_SWAP
        else:
            kind = GateKind.SWAP
        self.start(kind, t, here, r)
        return True

    def pursue(self, t: Time) -> bool:
        goals = self.open_goals()
        if self.target is not None:
            family, g = self.target
            done = self.ps_done[g] if family == "ps" else self.mix_done[g]
            if done:
                self.target = None
        if self.target is None:
            far = [x for x in goals if x[0] > 1]
            if not far:
                return False
            dmin = min(x[0] for x in far)
            pick = self.rng.choice([x for x in far if x[0] == dmin])
            self.target = (pick[1], pick[2])
        family, g = self.target
        s, p = (self.c.ps_pairs_ids if family == "ps" else self.c.mix_pairs_ids)[g]
        if self.c.dist[self.pos[s]][self.pos[p]] <= 1:
            return False
        if self.free[self.pos[s]] > t:
            s, p = p, s
        return self.step_toward(t, s, p)

    # -- driver ---------------------------------------------------------

    def run(self, cutoff: Time) -> list[tuple] | None:
        c = self.c
        t: Time = 0
        steps = 0
        escapes = 0
        while self.remaining > 0:
            if t >= cutoff:
                return None
            steps += 1
            if steps > c.step_cap:
                self.sequential = True
            if steps > 50 * c.step_cap:
                raise SolverError("rollout failed to terminate")
            before = self.remaining
            dispatched = self.goal_phase(t)
            if self.sequential:
                dispatched |= self.pursue(t)
            else:
                dispatched |= self.route_phase(t)
            if self.remaining < before:
                escapes = 0
            nxt = min((f for f in self.free if f > t), default=None)
            if nxt is not None:
                t = nxt
                continue
            if dispatched or self.remaining == 0:
                continue
            escapes += 1
            if escapes > c.stagnation_window:
                self.sequential = True
            if not self.pursue(t):
                raise SolverError("no progress possible from a quiescent state")
        return self.gates


def _to_schedule(ctx: _Context, gates: list[tuple]) -> Schedule:
    qs = ctx.qstates
    return Schedule(
        ScheduledGate(kind, tuple(qs[i] for i in ops), start, dur, target) for kind, ops, start, dur, target in gates
    )


def run_solver(problem: RoutingProblem, config: SolverConfig | None = None) -> SolveResult:
    """Run the anytime loop and return the best schedule with run statistics."""
    config = config or SolverConfig()
    ctx = _Context(problem, config)
    lb = lower_bound(problem)
    best: Schedule | None = None
    best_span: Time | float = INF
    history: list[tuple[int, Time]] = []
    if config.incumbent is not None:
        report = validate(problem, config.incumbent)
        if report.ok:
            best, best_span = config.incumbent, report.makespan
            history.append((-1, best_span))
        else:
            log.warning("ignoring incumbent schedule: %s", report.violations[0].message)
    if not ctx.ps_pairs and not ctx.mix_pairs:
        return SolveResult(Schedule(), 0, lb, 0, 0, [(0, 0)], config.seed)

    master = random.Random(config.seed)
    began = _time.monotonic()
    done = completed = 0
    for i in range(config.rollouts):
        if best_span <= lb:
            break
        if config.deadline is not None and _time.monotonic() - began > config.deadline:
            break
        rng = random.Random(master.getrandbits(64))
        noise = 0.0 if i == 0 else config.noise
        try:
            gates = _Rollout(ctx, rng, noise, config.epsilon).run(best_span)
        except SolverError as exc:
            # a stuck rollout is abandoned; only the whole budget failing is an error
            log.debug("rollout %d abandoned: %s", i, exc)
            gates = None
        done += 1
        if gates is None:
            continue
        completed += 1
        span = max(start + dur for _, _, start, dur, _ in gates)
        if span < best_span:
            best, best_span = _to_schedule(ctx, gates), span
            history.append((i, span))
    if best is None:
        raise SolverError(f"no complete rollout within the budget ({done} attempted)")
    report = validate(problem, best)
    if not report.ok:
        raise AssertionError(f"solver produced an invalid schedule: {report.violations[:3]}")
    return SolveResult(best, report.makespan, lb, done, completed, history, config.seed)


def solve(problem: RoutingProblem, config: SolverConfig | None = None) -> Schedule:
    return run_solver(problem, config).schedule


def exhaustive_solve(problem: RoutingProblem, gate_cap: int = 8) -> Schedule:
    """Makespan-optimal schedule among all schedules with at most ``gate_cap`` gates.

    Depth-first branch and bound over dispatch decisions. Conditions only
    change when gates end, so some optimal schedule starts every gate at time
    zero or at another gate's end; the search branches only at those instants.
    Gates started at the same instant are generated in a fixed order to avoid
    permutation duplicates, and a non-goal exchange is only offered in its
    fastest legal form.
    """
    if problem.problem_graph.vertex_count * problem.mix_graph.color_count > 6 or gate_cap > 8:
        raise ValueError("exhaustive_solve is limited to n*k <= 6 and gate_cap <= 8")
    ctx = _Context(problem, SolverConfig())
    d = ctx.d
    nps, nmix = len(ctx.ps_pairs), len(ctx.mix_pairs)
    if nps + nmix == 0:
        return Schedule()
    ps_cost, mix_cost = min(d.ps, d.swap_ps), min(d.mix, d.swap_mix)
    best: list = [INF, None]

    pos = list(ctx.start_pos)
    occ = [-1] * ctx.qubits
    for s, q in enumerate(pos):
        occ[q] = s
    free: list[Time] = [0] * ctx.qubits
    ps_done = [False] * nps
    mix_done = [False] * nmix
    ps_left = [len(p) for p in ctx.ps_of]
    mix_left = [len(p) for p in ctx.mix_of]
    ps_end: list[Time] = [0] * ctx.n
    gates: list[tuple] = []

    def ready(s: int, t: Time) -> bool:
        return ps_left[s] == 0 and ps_end[s] <= t

    def bound(t: Time) -> Time:
        lb = max((g[2] + g[3] for g in gates), default=0)
        for s in range(ctx.n):
            work = ps_left[s] * ps_cost + mix_left[s] * mix_cost
            if work:
                lb = max(lb, max(t, free[pos[s]]) + work)
        return lb

    def options(t: Time):
        for a, b in ctx.couplings:
            if free[a] > t or free[b] > t:
                continue
            s, u = occ[a], occ[b]
            if s < 0 and u < 0:
                continue
            if s < 0 or u < 0:
                yield (GateKind.MOVE, a, b)
                continue
            g = ctx.ps_id.get((s, u))
            if g is not None and not ps_done[g]:
                yield (GateKind.PS, a, b)
                yield (GateKind.SWAP_PS, a, b)
            g = ctx.mix_id.get((s, u))
            goal_mix = g is not None and not mix_done[g]
            both_ready = ready(s, t) and ready(u, t)
            if goal_mix and both_ready:
                yield (GateKind.MIX, a, b)
                yield (GateKind.SWAP_MIX, a, b)
            if (s, u) in ctx.same_mix and both_ready and d.swap_mix <= d.swap:
                yield (GateKind.SWAP_MIX_AS_SWAP, a, b)
            else:
                yield (GateKind.SWAP, a, b)

    def apply(kind: GateKind, t: Time, a: int, b: int):
        s, u = occ[a], occ[b]
        dur = d.of(kind)
        end = t + dur
        undo = (a, b, free[a], free[b], s, u)
        free[a] = free[b] = end
        claim = None
        if kind is GateKind.MOVE:
            mover, src, dst = (s, a, b) if s >= 0 else (u, b, a)
            occ[src], occ[dst] = -1, mover
            pos[mover] = dst
            gates.append((kind, (mover,), t, dur, dst))
            return undo, claim, None
        gates.append((kind, (s, u), t, dur, None))
        if kind in (GateKind.PS, GateKind.SWAP_PS) and (s, u) in ctx.ps_id and not ps_done[ctx.ps_id[(s, u)]]:
            g = ctx.ps_id[(s, u)]
            ps_done[g] = True
            old_end = (ps_end[s], ps_end[u])
            for x in (s, u):
                ps_left[x] -= 1
                ps_end[x] = max(ps_end[x], end)
            claim = ("ps", g, old_end)
        elif kind in (GateKind.MIX, GateKind.SWAP_MIX):
            g = ctx.mix_id[(s, u)]
            mix_done[g] = True
            for x in (s, u):
                mix_left[x] -= 1
            claim = ("mix", g, None)
        if kind.exchanges:
            occ[a], occ[b] = u, s
            pos[s], pos[u] = b, a
        return undo, claim, kind

    def revert(undo, claim, kind) -> None:
        a, b, fa, fb, s, u = undo
        gates.pop()
        free[a], free[b] = fa, fb
        occ[a], occ[b] = s, u
        if s >= 0:
            pos[s] = a
        if u >= 0:
            pos[u] = b
        if claim is not None:
            family, g, old_end = claim
            if family == "ps":
                ps_done[g] = False
                for x, e in zip((s, u), old_end):
                    ps_left[x] += 1
                    ps_end[x] = e
            else:
                mix_done[g] = False
                for x in (s, u):
                    mix_left[x] += 1

    def remaining() -> int:
        return ps_done.count(False) + mix_done.count(False)

    def search(t: Time, last: tuple | None) -> None:
        left = remaining()
        if left == 0:
            span = max(g[2] + g[3] for g in gates)
            if span < best[0]:
                best[0], best[1] = span, list(gates)
            return
        if len(gates) + left > gate_cap or bound(t) >= best[0]:
            return
        for opt in list(options(t)):
            key = (opt[1], opt[2], opt[0].value)
            if last is not None and key <= last:
                continue
            state = apply(opt[0], t, opt[1], opt[2])
            search(t, key)
            revert(*state)
        nxt = min((f for f in free if f > t), default=None)
        if nxt is not None:
            search(nxt, None)

    search(0, None)
    if best[1] is None:
        raise SolverError(f"no complete schedule with at most {gate_cap} gates")
    return _to_schedule(ctx, best[1])
