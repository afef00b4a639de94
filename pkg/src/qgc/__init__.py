"""Routing QAOA graph-coloring circuits onto constrained qubit hardware."""

from .model import (
    GateDurations,
    GateKind,
    GoalSet,
    HardwareGraph,
    MixGraph,
    Placement,
    ProblemGraph,
    QState,
    RoutingProblem,
    derive_goals,
    distance,
    same_mixgraph,
)
from .validator import Schedule, ScheduledGate, ValidationReport, lower_bound, validate

__version__ = "0.1.0"
