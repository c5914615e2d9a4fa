"""Two-state cellular automaton on the heptagrid {7,3}: grid, rules, engine and circuit structures."""

__version__ = "0.1.0"

from .heptagrid import CellAddress, addr, build_disk, cyclic_neighbors, status_of, tree_relations  # noqa: E402
from .rules import Rule, RuleTable, State, check_coherence, lookup, parse_rules, rotation_class_bound, rotation_report  # noqa: E402
from .engine import Configuration, Trace, TraceEvent, neighborhood_of, run, step  # noqa: E402
from .structures import Injection, ScenarioSpec, StructureKind, build_scenario, complete_configuration, inject  # noqa: E402
from .fixtures import GOLDEN_NAMES, compare_trace, golden  # noqa: E402

__all__ = [
    "CellAddress", "addr", "build_disk", "cyclic_neighbors", "status_of", "tree_relations",
    "Rule", "RuleTable", "State", "check_coherence", "lookup", "parse_rules",
    "rotation_class_bound", "rotation_report",
    "Configuration", "Trace", "TraceEvent", "neighborhood_of", "run", "step",
    "Injection", "ScenarioSpec", "StructureKind", "build_scenario", "complete_configuration", "inject",
    "GOLDEN_NAMES", "compare_trace", "golden",
]
