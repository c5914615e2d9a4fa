"""Synchronous evolution of a finite configuration with rule-id tracing."""
from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Mapping

from .heptagrid import AdjacencyDisk, BoundaryCell, CellAddress, addr
from .rules import RuleTable, State, lookup


class EngineError(RuntimeError):
    time: int | None = None


class NoMatchingRule(EngineError):
    def __init__(self, cell: CellAddress, current: State, neighborhood: str, time: int | None = None):
        self.cell, self.current, self.neighborhood, self.time = cell, current, neighborhood, time
        at = f" at time {time}" if time is not None else ""
        super().__init__(f"no rule for {cell}{at}: {current} {neighborhood}")


class FrontierViolation(EngineError):
    def __init__(self, cell: CellAddress, time: int | None = None):
        self.cell, self.time = cell, time
        super().__init__(f"black cell {cell} touches the edge of the active set at time {time}")


class MissingOrientation(EngineError):
    def __init__(self, cell: CellAddress):
        self.cell = cell
        super().__init__(f"active cell {cell} has no side 1")


class InvalidConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    disk: AdjacencyDisk
    states: Mapping[CellAddress, State]
    side1: Mapping[CellAddress, CellAddress]
    active: frozenset[CellAddress]
    # named paths of the structure, used by injection; purely descriptive here
    paths: Mapping[str, tuple[CellAddress, ...]] = field(default_factory=dict)

    def __post_init__(self):
        # keep only black cells so that equality ignores explicit whites
        black = {addr(c): State.B for c, s in self.states.items() if State(s) is State.B}
        object.__setattr__(self, "states", MappingProxyType(black))
        object.__setattr__(self, "side1", MappingProxyType({addr(c): addr(a) for c, a in self.side1.items()}))
        object.__setattr__(self, "active", frozenset(map(addr, self.active)))
        object.__setattr__(self, "paths", MappingProxyType({k: tuple(map(addr, v)) for k, v in self.paths.items()}))

    def state(self, cell: CellAddress) -> State:
        return self.states.get(cell, State.W)

    @property
    def black(self) -> frozenset[CellAddress]:
        return frozenset(self.states)

    def with_states(self, updates: Mapping[CellAddress, State]) -> "Configuration":
        merged = dict(self.states)
        for c, s in updates.items():
            if State(s) is State.B:
                merged[c] = State.B
            else:
                merged.pop(c, None)
        return replace(self, states=merged)

    def validate(self) -> None:
        """Raise unless the configuration can be stepped soundly."""
        for c in self.active:
            if not self.disk.is_interior(c):
                raise InvalidConfiguration(f"active cell {c} lies on the disk boundary")
            if c not in self.side1:
                raise MissingOrientation(c)
            if self.side1[c] not in self.disk.neighbors(c):
                raise InvalidConfiguration(f"side 1 of {c} points at {self.side1[c]}, not a neighbour")
        for c in self.states:
            if c not in self.active:
                raise InvalidConfiguration(f"black cell {c} is not active")
        _check_frontier(self, None)


@dataclass(frozen=True)
class TraceEvent:
    time: int
    cell: CellAddress
    rule_id: int


@dataclass(frozen=True)
class Trace:
    events: tuple[TraceEvent, ...]
    horizon: int

    def at(self, time: int, cell: CellAddress | str) -> int | None:
        cell = addr(cell)
        for e in self.events:
            if e.time == time and e.cell == cell:
                return e.rule_id
        return None

    def table(self) -> dict[tuple[int, CellAddress], int]:
        return {(e.time, e.cell): e.rule_id for e in self.events}

    def to_tsv(self) -> str:
        buf = io.StringIO()
        buf.write("time\tcell\trule\n")
        for e in sorted(self.events, key=lambda e: (e.time, str(e.cell))):
            buf.write(f"{e.time}\t{e.cell}\t{e.rule_id}\n")
        return buf.getvalue()


def read_trace_tsv(text: str) -> Trace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split("\t") != ["time", "cell", "rule"]:
        raise ValueError("trace must start with a 'time\\tcell\\trule' header")
    events = []
    for ln in lines[1:]:
        t, c, r = ln.split("\t")
        events.append(TraceEvent(int(t), addr(c), int(r)))
    horizon = max((e.time for e in events), default=0)
    return Trace(tuple(events), horizon)


def neighborhood_of(config: Configuration, cell: CellAddress) -> str:
    cell = addr(cell)
    if cell not in config.side1:
        raise MissingOrientation(cell)
    around = config.disk.neighbors(cell)
    k = around.index(config.side1[cell])
    return "".join(config.state(n).value for n in around[k:] + around[:k])


def _check_frontier(config: Configuration, time: int | None) -> None:
    for c in config.states:
        try:
            around = config.disk.neighbors(c)
        except BoundaryCell:
            raise FrontierViolation(c, time) from None
        if any(n not in config.active for n in around):
            raise FrontierViolation(c, time)


def step(config: Configuration, table: RuleTable, time: int) -> tuple[Configuration, list[TraceEvent]]:
    """Apply the table to every active cell at once; ``time`` labels the new configuration."""
    events = []
    updates = {}
    for cell in sorted(config.active):
        current = config.state(cell)
        nb = neighborhood_of(config, cell)
        rule = lookup(table, current, nb)
        if rule is None:
            raise NoMatchingRule(cell, current, nb, time)
        events.append(TraceEvent(time, cell, rule.id))
        if rule.next is not current:
            updates[cell] = rule.next
    nxt = config.with_states(updates) if updates else config
    _check_frontier(nxt, time)
    return nxt, events


def run(config: Configuration, table: RuleTable, steps: int,
        keep: bool = False) -> tuple[Configuration, Trace] | tuple[Configuration, Trace, list[Configuration]]:
    """Iterate :func:`step` for ``steps`` steps, numbering them from 1.

    With ``keep`` the list of every intermediate configuration (time 0 first)
    is returned as a third item.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    config.validate()
    events: list[TraceEvent] = []
    snapshots = [config]
    for t in range(1, steps + 1):
        config, ev = step(config, table, t)
        events.extend(ev)
        if keep:
            snapshots.append(config)
    trace = Trace(tuple(events), steps)
    return (config, trace, snapshots) if keep else (config, trace)


def black_history(snapshots: Iterable[Configuration]) -> list[frozenset[CellAddress]]:
    return [s.black for s in snapshots]
