"""Core domain types for routing QAOA graph-coloring circuits.

A *qstate* is a (vertex, color) pair: the logical unit of information that
sits on a physical qubit and is moved around by swap-family gates. The goal
gates come in two families:

* PS goals, one per same-color pair whose vertices share a problem-graph edge;
* MIX goals, one per same-vertex pair whose colors share a mix-graph edge.

Every PS goal touching a qstate must finish before any MIX-phase gate on that
qstate may start.

All types here are immutable after construction. Unordered pairs are stored
canonically as ``(min, max)``.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Union

Time = Union[int, Fraction]


def exact(value) -> Time:
    """Convert a number (or numeric string) to an exact time value.

    Floats go through their shortest decimal repr so ``0.1`` becomes ``1/10``.
    Integral results are returned as ``int``.
    """
    if isinstance(value, bool):
        raise TypeError("boolean is not a time value")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite time value {value!r}")
        q = Fraction(repr(value))
    elif isinstance(value, str):
        q = Fraction(value.strip())
    else:
        raise TypeError(f"cannot interpret {value!r} as a time value")
    return q.numerator if q.denominator == 1 else q


def time_to_json(t: Time) -> int | float | str:
    """JSON form of a time: ints stay ints, other rationals become ``"p/q"``."""
    if isinstance(t, int) or t.denominator == 1:
        return int(t)
    return f"{t.numerator}/{t.denominator}"


def canon(a, b) -> tuple:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, order=True)
class QState:
    vertex: int
    color: int

    def __str__(self) -> str:
        return f"{self.vertex}_{self.color}"

    @classmethod
    def parse(cls, text: str) -> QState:
        """Parse ``"v_c"``, ``"ψ_v_c"``, ``"psi_v_c"`` or ``"s{v}_{c}"``."""
        raw = text.strip()
        for prefix in ("ψ_", "psi_", "ψ", "psi"):
            if raw.startswith(prefix):
                raw = raw[len(prefix):]
                break
        else:
            if raw[:1] in ("s", "S") and "_" in raw:
                raw = raw[1:]
        parts = raw.split("_")
        if len(parts) != 2:
            raise ValueError(f"malformed qstate name {text!r}")
        try:
            v, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"malformed qstate name {text!r}") from None
        if v < 0 or c < 0:
            raise ValueError(f"malformed qstate name {text!r}")
        return cls(v, c)


QPair = tuple[QState, QState]


def _canon_edges(edges: Iterable, bound: int, what: str) -> frozenset[tuple[int, int]]:
    out = set()
    for e in edges:
        a, b = (int(x) for x in e)
        if a == b:
            raise ValueError(f"self-loop ({a},{a}) in {what}")
        if not (0 <= a < bound and 0 <= b < bound):
            raise ValueError(f"{what} edge ({a},{b}) out of range 0..{bound - 1}")
        pair = canon(a, b)
        if pair in out:
            raise ValueError(f"duplicate {what} edge {pair}")
        out.add(pair)
    return frozenset(out)


@dataclass(frozen=True)
class ProblemGraph:
    """The graph to be colored."""

    vertex_count: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("problem graph needs at least one vertex")
        object.__setattr__(self, "edges", _canon_edges(self.edges, self.vertex_count, "problem graph"))


class MixKind(str, enum.Enum):
    LINE = "line"
    RING = "ring"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MixGraph:
    """Graph over colors saying which color pairs need MIX gates."""

    color_count: int
    edges: frozenset[tuple[int, int]] = frozenset()
    kind: MixKind = MixKind.CUSTOM

    def __post_init__(self):
        if self.color_count < 1:
            raise ValueError("mix graph needs at least one color")
        kind = MixKind(self.kind)
        object.__setattr__(self, "kind", kind)
        edges = _canon_edges(self.edges, self.color_count, "mix graph")
        object.__setattr__(self, "edges", edges)
        k = self.color_count
        if kind is MixKind.LINE and edges != {(i, i + 1) for i in range(k - 1)}:
            raise ValueError(f"line mix graph over {k} colors must be the path 0-1-..-{k - 1}")
        if kind is MixKind.RING:
            if k < 3:
                raise ValueError("ring mix graph needs k >= 3")
            if edges != {canon(i, (i + 1) % k) for i in range(k)}:
                raise ValueError(f"ring mix graph over {k} colors must be the cycle 0-1-..-{k - 1}-0")

    def has_edge(self, a: int, b: int) -> bool:
        return canon(a, b) in self.edges


@dataclass(frozen=True)
class GateDurations:
    """Per-gate-type durations in abstract time units, uniform over the chip."""

    swap: Time = 4
    move: Time = 4
    ps: Time = 3
    swap_ps: Time = 4
    mix: Time = 1
    swap_mix: Time = 1

    def __post_init__(self):
        for name in ("swap", "move", "ps", "swap_ps", "mix", "swap_mix"):
            value = exact(getattr(self, name))
            if value < 0:
                raise ValueError(f"duration {name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)

    def of(self, kind: GateKind) -> Time:
        return {
            GateKind.PS: self.ps,
            GateKind.MIX: self.mix,
            GateKind.SWAP: self.swap,
            GateKind.MOVE: self.move,
            GateKind.SWAP_PS: self.swap_ps,
            GateKind.SWAP_MIX: self.swap_mix,
            GateKind.SWAP_MIX_AS_SWAP: self.swap_mix,
            GateKind.DONE_PS: 0,
        }[kind]

    def to_json(self) -> dict:
        return {k: time_to_json(getattr(self, k)) for k in ("swap", "move", "ps", "swap_ps", "mix", "swap_mix")}

    @classmethod
    def from_json(cls, data: Mapping | None) -> GateDurations:
        data = dict(data or {})
        unknown = set(data) - {"swap", "move", "ps", "swap_ps", "mix", "swap_mix"}
        if unknown:
            raise ValueError(f"unknown duration keys: {sorted(unknown)}")
        return cls(**{k: exact(v) for k, v in data.items()})


class GateKind(str, enum.Enum):
    PS = "PS"
    MIX = "MIX"
    SWAP = "SWAP"
    MOVE = "MOVE"
    SWAP_PS = "SWAP_PS"
    SWAP_MIX = "SWAP_MIX"
    SWAP_MIX_AS_SWAP = "SWAP_MIX_AS_SWAP"
    # zero-duration marker from external plans; never required
    DONE_PS = "DONE_PS"

    @property
    def exchanges(self) -> bool:
        """Whether the gate swaps the locations of its two operands."""
        return self in _EXCHANGING

    @property
    def mix_phase(self) -> bool:
        """Gates that need ps_completed on both operands."""
        return self in (GateKind.MIX, GateKind.SWAP_MIX, GateKind.SWAP_MIX_AS_SWAP)


_EXCHANGING = frozenset({GateKind.SWAP, GateKind.SWAP_PS, GateKind.SWAP_MIX, GateKind.SWAP_MIX_AS_SWAP})


@dataclass(frozen=True)
class HardwareGraph:
    """Undirected qubit coupling graph plus gate durations.

    ``edge_durations`` is reserved for per-coupling overrides and is ignored.
    """

    qubit_count: int
    couplings: frozenset[tuple[int, int]]
    durations: GateDurations = field(default_factory=GateDurations)
    name: str = "custom"
    edge_durations: Mapping | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.qubit_count < 1:
            raise ValueError("hardware needs at least one qubit")
        object.__setattr__(self, "couplings", _canon_edges(self.couplings, self.qubit_count, "hardware"))
        if len(self._bfs(0)) != self.qubit_count:
            raise ValueError(f"hardware graph {self.name!r} is not connected")

    def _bfs(self, source: int) -> dict[int, int]:
        adj = self.adjacency
        dist = {source: 0}
        queue = deque([source])
        while queue:
            q = queue.popleft()
            for r in adj[q]:
                if r not in dist:
                    dist[r] = dist[q] + 1
                    queue.append(r)
        return dist

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[set[int]] = [set() for _ in range(self.qubit_count)]
        for a, b in self.couplings:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(tuple(sorted(s)) for s in adj)

    @cached_property
    def distances(self) -> tuple[tuple[int, ...], ...]:
        """All-pairs shortest-path lengths, by BFS from every qubit."""
        rows = []
        for q in range(self.qubit_count):
            d = self._bfs(q)
            rows.append(tuple(d[r] for r in range(self.qubit_count)))
        return tuple(rows)

    def coupled(self, a: int, b: int) -> bool:
        return canon(a, b) in self.couplings

    def distance(self, a: int, b: int) -> int:
        return distance(self, a, b)

    def with_durations(self, durations: GateDurations) -> HardwareGraph:
        return replace(self, durations=durations)

    def to_json(self) -> dict:
        return {"qubits": self.qubit_count, "couplings": [list(e) for e in sorted(self.couplings)], "name": self.name}


def distance(hardware: HardwareGraph, q1: int, q2: int) -> int:
    """Shortest coupling-path length between two qubits."""
    n = hardware.qubit_count
    if not (0 <= q1 < n and 0 <= q2 < n):
        raise ValueError(f"qubit out of range 0..{n - 1}: ({q1}, {q2})")
    return hardware.distances[q1][q2]


@dataclass(frozen=True)
class GoalSet:
    ps_goals: frozenset[QPair]
    mix_goals: frozenset[QPair]

    def __post_init__(self):
        for pairs in (self.ps_goals, self.mix_goals):
            for a, b in pairs:
                if not a < b:
                    raise ValueError(f"goal pair ({a}, {b}) is not canonical")
        if self.ps_goals & self.mix_goals:
            raise ValueError("PS and MIX goal sets must be disjoint")


def derive_goals(problem_graph: ProblemGraph, mix_graph: MixGraph) -> GoalSet:
    k = mix_graph.color_count
    ps = {canon(QState(u, c), QState(v, c)) for u, v in problem_graph.edges for c in range(k)}
    mix = {
        canon(QState(v, a), QState(v, b))
        for v in range(problem_graph.vertex_count)
        for a, b in mix_graph.edges
    }
    return GoalSet(frozenset(ps), frozenset(mix))


def mixgraph_edge(mix_graph: MixGraph, s1: QState, s2: QState) -> bool:
    return s1.vertex == s2.vertex and s1.color != s2.color and mix_graph.has_edge(s1.color, s2.color)


def same_mixgraph(mix_graph: MixGraph, s1: QState, s2: QState) -> bool:
    """Same vertex, different colors, and the colors are *not* mix-adjacent."""
    return s1.vertex == s2.vertex and s1 != s2 and not mix_graph.has_edge(s1.color, s2.color)


class Placement(Mapping):
    """Injective qstate -> qubit assignment. Unlisted qubits are empty."""

    def __init__(self, mapping: Mapping[QState, int] | Iterable[tuple[QState, int]]):
        items = dict(mapping)
        seen: dict[int, QState] = {}
        for s, q in items.items():
            if not isinstance(s, QState):
                raise TypeError(f"placement key {s!r} is not a QState")
            if isinstance(q, bool) or not isinstance(q, int) or q < 0:
                raise ValueError(f"qstate {s} mapped to invalid qubit {q!r}")
            if q in seen:
                raise ValueError(f"qubit {q} assigned to both {seen[q]} and {s}")
            seen[q] = s
        self._map = dict(sorted(items.items()))
        self._occ = seen

    def __getitem__(self, s: QState) -> int:
        return self._map[s]

    def __iter__(self) -> Iterator[QState]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        body = ", ".join(f"{s}->{q}" for s, q in self._map.items())
        return f"Placement({body})"

    def occupant(self, qubit: int) -> QState | None:
        return self._occ.get(qubit)

    def to_json(self) -> dict[str, int]:
        return {f"ψ_{s}": q for s, q in self._map.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, int]) -> Placement:
        return cls({QState.parse(k): int(v) for k, v in data.items()})


@dataclass(frozen=True)
class RoutingProblem:
    problem_graph: ProblemGraph
    mix_graph: MixGraph
    hardware: HardwareGraph
    goals: GoalSet
    initial_placement: Placement
    label: str = ""

    def __post_init__(self):
        needed = self.problem_graph.vertex_count * self.mix_graph.color_count
        if needed > self.hardware.qubit_count:
            raise ValueError(f"{needed} qstates do not fit on {self.hardware.qubit_count} qubits")
        if self.goals != derive_goals(self.problem_graph, self.mix_graph):
            raise ValueError("goal set is inconsistent with the problem and mix graphs")
        placed = set(self.initial_placement)
        expected = set(self.qstates)
        if placed != expected:
            missing = sorted(expected - placed)
            extra = sorted(placed - expected)
            raise ValueError(f"placement does not cover the qstate set (missing={missing}, extra={extra})")
        for s, q in self.initial_placement.items():
            if q >= self.hardware.qubit_count:
                raise ValueError(f"qstate {s} placed on qubit {q} outside 0..{self.hardware.qubit_count - 1}")

    @classmethod
    def build(cls, problem_graph, mix_graph, hardware, placement, label: str = "") -> RoutingProblem:
        return cls(problem_graph, mix_graph, hardware, derive_goals(problem_graph, mix_graph), placement, label)

    @property
    def durations(self) -> GateDurations:
        return self.hardware.durations

    @cached_property
    def qstates(self) -> tuple[QState, ...]:
        return tuple(
            QState(v, c) for v in range(self.problem_graph.vertex_count) for c in range(self.mix_graph.color_count)
        )

    @cached_property
    def ps_partners(self) -> dict[QState, tuple[QState, ...]]:
        return _partners(self.qstates, self.goals.ps_goals)

    @cached_property
    def mix_partners(self) -> dict[QState, tuple[QState, ...]]:
        return _partners(self.qstates, self.goals.mix_goals)

    def with_placement(self, placement: Placement) -> RoutingProblem:
        return replace(self, initial_placement=placement)

    def with_hardware(self, hardware: HardwareGraph) -> RoutingProblem:
        return replace(self, hardware=hardware)


def _partners(qstates, pairs) -> dict[QState, tuple[QState, ...]]:
    out: dict[QState, list[QState]] = {s: [] for s in qstates}
    for a, b in pairs:
        out[a].append(b)
        out[b].append(a)
    return {s: tuple(sorted(p)) for s, p in out.items()}
