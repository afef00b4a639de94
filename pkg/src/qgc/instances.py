"""Benchmark graphs, mix-graphs, hardware presets and the instance JSON format.

Graph ids:

* ``G1``: the 4-cycle 0-1-2-3-0 (coloring a square).
* ``G2``: K4. Stand-in, exact edge set unknown.
* ``G3``: 5-vertex wheel with one spoke removed (hub 0, rim 1-2-3-4). Stand-in.
* ``G4``: the 8-vertex 3-regular circulant C8(1, 4). Stand-in.

Exact graphs can always be supplied through JSON instead.

Hardware ids: ``grid-N-K`` (K rows of N columns, qubit ``row * N + col``),
``line-N-K`` (path of N*K qubits), and the vendor presets shipped under
``qgc/data/hardware`` (rigetti-12/16, google-12/16/20/24, ibm-12/16/20).
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .model import (
    GateDurations,
    HardwareGraph,
    MixGraph,
    MixKind,
    Placement,
    ProblemGraph,
    QState,
    RoutingProblem,
)

GRAPHS: dict[str, tuple[int, tuple[tuple[int, int], ...]]] = {
    "G1": (4, ((0, 1), (1, 2), (2, 3), (0, 3))),
    "G2": (4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))),
    "G3": (5, ((1, 2), (2, 3), (3, 4), (1, 4), (0, 1), (0, 2), (0, 3))),
    "G4": (8, tuple(sorted({tuple(sorted((i, (i + d) % 8))) for i in range(8) for d in (1, 4)}))),
}

VENDOR_HARDWARE = (
    "rigetti-12",
    "rigetti-16",
    "google-12",
    "google-16",
    "google-20",
    "google-24",
    "ibm-12",
    "ibm-16",
    "ibm-20",
)

# (hardware, graph, mix kind, colors): the fifteen configurations of the benchmark table
TABLE1_CONFIGS: tuple[tuple[str, str, str, int], ...] = (
    ("rigetti-12", "G1", "ring", 3),
    ("rigetti-12", "G1", "line", 3),
    ("google-12", "G1", "ring", 3),
    ("google-12", "G1", "line", 3),
    ("ibm-12", "G1", "ring", 3),
    ("ibm-12", "G1", "line", 3),
    ("rigetti-16", "G1", "ring", 4),
    ("rigetti-16", "G2", "ring", 4),
    ("google-16", "G1", "ring", 4),
    ("google-16", "G2", "ring", 4),
    ("ibm-16", "G1", "ring", 4),
    ("ibm-16", "G2", "ring", 4),
    ("google-20", "G3", "ring", 4),
    ("ibm-20", "G3", "ring", 4),
    ("google-24", "G4", "ring", 3),
)

_SHAPED = re.compile(r"^(grid|line)-(\d+)-(\d+)$")


class InstanceError(ValueError):
    """Raised for unknown ids or malformed instance data."""


@dataclass(frozen=True)
class InstanceSpec:
    graph_id: str
    mix_kind: str
    color_count: int
    hardware_id: str

    @property
    def tag(self) -> str:
        """Row label such as ``G1R3``."""
        return f"{self.graph_id}{self.mix_kind[0].upper()}{self.color_count}"


def build_graph(graph_id: str | dict) -> ProblemGraph:
    if isinstance(graph_id, dict):
        try:
            return ProblemGraph(int(graph_id["n"]), frozenset(tuple(e) for e in graph_id.get("edges", ())))
        except KeyError as exc:
            raise InstanceError(f"graph JSON missing field {exc}") from None
    if graph_id not in GRAPHS:
        raise InstanceError(f"unknown graph id {graph_id!r} (known: {', '.join(GRAPHS)})")
    n, edges = GRAPHS[graph_id]
    return ProblemGraph(n, frozenset(edges))


def build_mixgraph(kind: str, k: int, edges=None) -> MixGraph:
    try:
        kind = MixKind(kind)
    except ValueError:
        raise InstanceError(f"unknown mix kind {kind!r}") from None
    if kind is MixKind.LINE:
        if k < 2:
            raise InstanceError("line mix graph needs k >= 2")
        edges = [(i, i + 1) for i in range(k - 1)]
    elif kind is MixKind.RING:
        if k < 3:
            raise InstanceError("ring mix graph needs k >= 3")
        edges = [(i, (i + 1) % k) for i in range(k)]
    elif edges is None:
        raise InstanceError("custom mix graph needs explicit edges")
    return MixGraph(k, frozenset(tuple(e) for e in edges), kind)


def grid_hardware(n: int, k: int, durations: GateDurations | None = None) -> HardwareGraph:
    """k rows by n columns; qubit ``row * n + col``."""
    couplings = set()
    for r in range(k):
        for c in range(n):
            q = r * n + c
            if c + 1 < n:
                couplings.add((q, q + 1))
            if r + 1 < k:
                couplings.add((q, q + n))
    return HardwareGraph(n * k, frozenset(couplings), durations or GateDurations(), f"grid-{n}-{k}")


def line_hardware(n: int, k: int, durations: GateDurations | None = None) -> HardwareGraph:
    m = n * k
    return HardwareGraph(m, frozenset((i, i + 1) for i in range(m - 1)), durations or GateDurations(), f"line-{n}-{k}")


def build_hardware(hardware_id: str | dict, durations: GateDurations | None = None) -> HardwareGraph:
    durations = durations or GateDurations()
    if isinstance(hardware_id, dict):
        try:
            return HardwareGraph(
                int(hardware_id["qubits"]),
                frozenset(tuple(c) for c in hardware_id["couplings"]),
                durations,
                str(hardware_id.get("name", "custom")),
            )
        except KeyError as exc:
            raise InstanceError(f"hardware JSON missing field {exc}") from None
    m = _SHAPED.match(hardware_id)
    if m:
        layout, n, k = m.group(1), int(m.group(2)), int(m.group(3))
        if n < 1 or k < 1:
            raise InstanceError(f"bad shape in {hardware_id!r}")
        return (grid_hardware if layout == "grid" else line_hardware)(n, k, durations)
    if hardware_id not in VENDOR_HARDWARE:
        raise InstanceError(f"unknown hardware id {hardware_id!r}")
    text = resources.files("qgc").joinpath("data", "hardware", f"{hardware_id}.json").read_text()
    data = json.loads(text)
    return HardwareGraph(int(data["qubits"]), frozenset(tuple(c) for c in data["couplings"]), durations, hardware_id)


def qstate_set(n: int, k: int) -> list[QState]:
    return [QState(v, c) for v in range(n) for c in range(k)]


def random_placement(qstates, qubit_count: int, seed: int) -> Placement:
    """Uniform random injective placement, reproducible by seed."""
    qstates = sorted(qstates)
    if len(qstates) > qubit_count:
        raise InstanceError(f"{len(qstates)} qstates do not fit on {qubit_count} qubits")
    rng = random.Random(seed)
    qubits = rng.sample(range(qubit_count), len(qstates))
    return Placement(zip(qstates, qubits))


def build_problem(
    spec: InstanceSpec,
    placement_source: Placement | str | dict = "random",
    seed: int = 0,
    durations: GateDurations | None = None,
    qi_budget: int = 2000,
) -> RoutingProblem:
    """Assemble a routing problem.

    ``placement_source`` is an explicit :class:`Placement`, a placement mapping
    loaded from JSON, ``"random"`` (uses ``seed``) or ``"qinit"`` (random start
    from ``seed`` improved by the qubit-initialization search).
    """
    graph = build_graph(spec.graph_id)
    mix = build_mixgraph(spec.mix_kind, spec.color_count)
    hardware = build_hardware(spec.hardware_id, durations)
    qstates = qstate_set(graph.vertex_count, mix.color_count)
    if isinstance(placement_source, Placement):
        placement = placement_source
    elif isinstance(placement_source, dict):
        placement = Placement.from_json(placement_source)
    elif placement_source in ("random", "qinit"):
        placement = random_placement(qstates, hardware.qubit_count, seed)
    else:
        raise InstanceError(f"unknown placement source {placement_source!r}")
    label = f"{spec.hardware_id}/{spec.tag}"
    try:
        problem = RoutingProblem.build(graph, mix, hardware, placement, label)
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    if placement_source == "qinit":
        from .qinit import improve_placement

        problem = problem.with_placement(improve_placement(problem, seed=seed, budget=qi_budget).final_placement)
    return problem


def load_instance(source: str | Path | dict) -> RoutingProblem:
    """Read an instance JSON document (path or already-parsed dict)."""
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{source}: invalid JSON ({exc})") from None
    try:
        graph = build_graph(data["graph"])
        mix_data = data["mix"]
        mix = build_mixgraph(mix_data.get("kind", "custom"), int(mix_data["k"]), mix_data.get("edges"))
        durations = GateDurations.from_json(data.get("durations"))
        hardware = build_hardware(data["hardware"], durations)
        place = data.get("placement", {"random_seed": 0})
        if "random_seed" in place:
            qs = qstate_set(graph.vertex_count, mix.color_count)
            placement = random_placement(qs, hardware.qubit_count, int(place["random_seed"]))
        else:
            placement = Placement.from_json(place)
        return RoutingProblem.build(graph, mix, hardware, placement, str(data.get("label", "")))
    except KeyError as exc:
        raise InstanceError(f"instance JSON missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise InstanceError(str(exc)) from None


def instance_to_json(problem: RoutingProblem) -> dict[str, Any]:
    hw = problem.hardware
    hardware: Any = hw.name if _is_builtin(hw) else hw.to_json()
    mix = problem.mix_graph
    return {
        "label": problem.label,
        "graph": {"n": problem.problem_graph.vertex_count, "edges": [list(e) for e in sorted(problem.problem_graph.edges)]},
        "mix": {"k": mix.color_count, "kind": mix.kind.value, "edges": [list(e) for e in sorted(mix.edges)]},
        "hardware": hardware,
        "placement": problem.initial_placement.to_json(),
        "durations": problem.durations.to_json(),
    }


def _is_builtin(hw: HardwareGraph) -> bool:
    try:
        ref = build_hardware(hw.name, hw.durations)
    except (InstanceError, ValueError):
        return False
    return ref.couplings == hw.couplings and ref.qubit_count == hw.qubit_count


def save_instance(problem: RoutingProblem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(problem), indent=1, ensure_ascii=False) + "\n")


def table1_specs() -> list[InstanceSpec]:
    return [InstanceSpec(g, mix, k, hw) for hw, g, mix, k in TABLE1_CONFIGS]
