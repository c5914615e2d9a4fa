"""Idle layouts of the circuit structures and locomotive injection.

Each builder lists layout facts: path cells (each pointing at the next cell
on its path), milestones, sensor cells and explicit side-1 anchors.
:func:`complete_configuration` turns facts into a configuration: it adds
milestones to path cells that would otherwise not be idle, then orients
every remaining cell of the activity window so that its idle neighbourhood
is matched by a conservative rule.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .engine import Configuration
from .heptagrid import AdjacencyDisk, CellAddress, addr, build_disk
from .rules import RuleTable, State, lookup

DISK_RADIUS = 8
WINDOW = 2
# largest number of milestones added around a single path cell
MAX_EXTRA = 3


class StructureKind(Enum):
    TRACK = "Track"
    FIXED_SWITCH = "FixedSwitch"
    FORK = "Fork"
    DOUBLER = "Doubler"
    SELECTOR = "Selector"
    CONTROLLER_BLACK = "ControllerBlack"
    CONTROLLER_WHITE = "ControllerWhite"
    SENSOR_WHITE = "SensorWhite"
    SENSOR_BLACK = "SensorBlack"


class Injection(Enum):
    NONE = "None"
    SIMPLE_UP = "SimpleUp"
    SIMPLE_DOWN = "SimpleDown"
    DOUBLE_UP = "DoubleUp"
    DOUBLE_DOWN = "DoubleDown"
    FROM_LEFT = "FromLeft"
    FROM_RIGHT = "FromRight"
    SIGNAL = "Signal"


class FactKind(Enum):
    PATH_CELL = "PathCell"
    MILESTONE = "Milestone"
    SENSOR_CELL = "SensorCell"
    SIDE1_ANCHOR = "Side1Anchor"


class LayoutInfeasible(ValueError):
    def __init__(self, cell: CellAddress, reason: str):
        self.cell = cell
        super().__init__(f"{cell}: {reason}")


class AmbiguousLayout(UserWarning):
    pass


class NotOnPath(ValueError):
    pass


class IllegalScenario(ValueError):
    pass


@dataclass(frozen=True)
class LayoutFact:
    kind: FactKind
    subject: CellAddress
    # next path cell, anchor target, or the initial state of a sensor cell
    object: CellAddress | State | None = None

    def __str__(self) -> str:
        tail = "" if self.object is None else f" {self.object}"
        return f"{self.kind.value} {self.subject}{tail}"


def path_facts(cells: Sequence[CellAddress]) -> list[LayoutFact]:
    out = [LayoutFact(FactKind.PATH_CELL, a, b) for a, b in zip(cells, cells[1:])]
    out.append(LayoutFact(FactKind.PATH_CELL, cells[-1], None))
    return out


@dataclass(frozen=True)
class Completion:
    config: Configuration
    added_milestones: tuple[CellAddress, ...] = ()
    ambiguous: tuple[CellAddress, ...] = ()


def _idle_rule(table, disk, black, cell, anchor):
    around = disk.neighbors(cell)
    k = around.index(anchor)
    nb = "".join("B" if n in black else "W" for n in around[k:] + around[:k])
    cur = State.B if cell in black else State.W
    rule = lookup(table, cur, nb)
    return rule if rule is not None and rule.conservative else None


def _enters(table, disk, black, cell, anchor, feeder) -> bool:
    """True when white ``cell`` turns black while ``feeder`` is black."""
    around = disk.neighbors(cell)
    k = around.index(anchor)
    nb = "".join("B" if n in black or n == feeder else "W" for n in around[k:] + around[:k])
    rule = lookup(table, State.W, nb)
    return rule is not None and rule.next is State.B


def _grow(disk: AdjacencyDisk, cells: Iterable[CellAddress], dist: int) -> set[CellAddress]:
    out = set(cells)
    frontier = set(out)
    for _ in range(dist):
        frontier = {n for c in frontier for n in disk.neighbors(c)} - out
        out |= frontier
    return out


def complete_configuration(facts: Iterable[LayoutFact], table: RuleTable, disk: AdjacencyDisk,
                           paths: dict[str, Sequence[CellAddress]] | None = None,
                           window: int = WINDOW) -> Completion:
    """Fill in states and side-1 anchors for the activity window.

    Search order is deterministic: path cells in fact order, candidate
    milestone sets by size then address; anchors prefer path neighbours,
    then the remaining neighbours in counter-clockwise order.
    """
    facts = list(facts)
    black: set[CellAddress] = set()
    white: set[CellAddress] = set()
    anchors: dict[CellAddress, CellAddress] = {}
    path_next: dict[CellAddress, CellAddress | None] = {}
    for f in facts:
        if f.kind is FactKind.PATH_CELL:
            path_next.setdefault(f.subject, None)
            if f.object is not None and path_next[f.subject] is None:
                path_next[f.subject] = f.object
        elif f.kind is FactKind.MILESTONE:
            black.add(f.subject)
        elif f.kind is FactKind.SENSOR_CELL:
            (black if State(f.object or State.W) is State.B else white).add(f.subject)
        elif f.kind is FactKind.SIDE1_ANCHOR:
            anchors[f.subject] = f.object
    for c, nxt in path_next.items():
        if nxt is not None:
            anchors.setdefault(c, nxt)
    for f in facts:
        if not disk.is_interior(f.subject):
            raise LayoutInfeasible(f.subject, f"outside the interior of the radius-{disk.radius} disk")
    for c, a in anchors.items():
        if a not in disk.neighbors(c):
            raise LayoutInfeasible(c, f"anchor {a} is not a neighbour")

    on_path = set(path_next)
    white |= on_path
    core = on_path | black | white | set(anchors)
    active = _grow(disk, core, window)
    for c in active:
        if not disk.is_interior(c):
            raise LayoutInfeasible(c, f"activity window leaves the radius-{disk.radius} disk")

    feeders: dict[CellAddress, list[CellAddress]] = {}
    for c, nxt in path_next.items():
        if nxt is not None:
            feeders.setdefault(nxt, []).append(c)
    near_sensor = _grow(disk, {f.subject for f in facts if f.kind is FactKind.SENSOR_CELL}, 1)

    def track_ok(c, blk):
        # idle, and (away from control cells) entered by a locomotive from each feeder
        if not _idle_rule(table, disk, blk, c, anchors[c]):
            return False
        if c in near_sensor:
            return True
        return all(_enters(table, disk, blk, c, anchors[c], p) for p in feeders.get(c, ()))

    ambiguous: list[tuple[CellAddress, int]] = []
    order = [c for c in path_next if c in anchors]

    def placements(i, blk):
        c = order[i]
        free = sorted(n for n in disk.neighbors(c) if n not in white and n not in blk)
        for size in range(1, MAX_EXTRA + 1):
            found = []
            for extra in combinations(free, size):
                trial = blk | set(extra)
                touched = _grow(disk, extra, 1)
                if track_ok(c, trial) and all(
                        track_ok(p, trial) for p in order[:i] if p in touched):
                    found.append(extra)
            if found:
                yield found

    def place(i, blk):
        # depth-first over path cells; the first (smallest, lexicographic) success wins
        while i < len(order) and track_ok(order[i], blk):
            i += 1
        if i == len(order):
            return blk
        c = order[i]
        for found in placements(i, blk):
            for extra in found:
                done = place(i + 1, blk | set(extra))
                if done is not None:
                    if len(found) > 1:
                        ambiguous.append((c, len(found)))
                    return done
        return None

    # path cells that are not working track elements get the fewest extra milestones
    completed = place(0, frozenset(black))
    if completed is None:
        bad = next(c for c in order if not track_ok(c, black))
        raise LayoutInfeasible(bad, "no milestone placement turns this path cell into a track element")
    added = sorted(completed - black)
    black = set(completed)
    ambiguous.reverse()
    for c, n in ambiguous:
        warnings.warn(f"{c}: {n} minimal milestone placements, kept the first", AmbiguousLayout, stacklevel=2)

    for c in sorted(active):
        if c in anchors:
            if not _idle_rule(table, disk, black, c, anchors[c]):
                raise LayoutInfeasible(c, f"no conservative rule with side 1 at {anchors[c]}")
            continue
        around = disk.neighbors(c)
        order = [n for n in around if n in on_path] + [n for n in around if n not in on_path]
        for a in order:
            if _idle_rule(table, disk, black, c, a):
                anchors[c] = a
                break
        else:
            raise LayoutInfeasible(c, "no orientation gives a conservative rule")

    config = Configuration(
        disk=disk,
        states={c: State.B for c in black},
        side1={c: anchors[c] for c in active},
        active=frozenset(active),
        paths=paths or {},
    )
    return Completion(config, tuple(added), tuple(c for c, _ in ambiguous))


# -- layouts ----------------------------------------------------------------

def _cells(text: str) -> tuple[CellAddress, ...]:
    return tuple(addr(t) for t in text.split())


@dataclass(frozen=True)
class Layout:
    paths: dict[str, tuple[CellAddress, ...]]
    milestones: tuple[CellAddress, ...]
    anchors: dict[CellAddress, CellAddress] = field(default_factory=dict)
    sensors: dict[CellAddress, State] = field(default_factory=dict)

    def facts(self) -> list[LayoutFact]:
        out = [LayoutFact(FactKind.SIDE1_ANCHOR, c, a) for c, a in self.anchors.items()]
        for cells in self.paths.values():
            out += path_facts(cells)
        out += [LayoutFact(FactKind.MILESTONE, m) for m in self.milestones]
        out += [LayoutFact(FactKind.SENSOR_CELL, c, s) for c, s in self.sensors.items()]
        return out


def _pairs(text: str) -> dict[CellAddress, CellAddress]:
    out = {}
    for item in text.split(","):
        a, b = item.split("->")
        out[addr(a)] = addr(b)
    return out


TRACK_UP = _cells("29(4) 11(4) 10(4) 3(4) 1(4) 1(5) 1(6) 1(7) 1(1) 3(1) 7(1) 6(1) 16(1)")
_TRACK_MILESTONES = _cells("0(0) 2(1) 8(1) 10(1) 15(1) 17(1) 19(1) 2(2) 2(4) 4(4) 9(4) 28(4) 30(4) 3(5) 2(6) 2(7)")
# witness cells next to the track; their orientation is fixed by their observed rule sequences
_TRACK_WITNESSES = _pairs("4(1)->1(1), 2(1)->1(1), 0(0)->1(4), 4(4)->3(4)")

_FX_EXIT = _cells("0(0) 1(4) 2(4) 7(4) 8(4) 9(4) 24(4)")
# 88(4) only carries the locomotive out of 33(4); its surroundings are left to completion
_CTRL_TRACK = _cells("25(6) 9(6) 10(6) 4(6) 1(6) 0(0) 1(4) 2(5) 5(5) 12(4) 33(4) 88(4)")


def _track(down: bool = False) -> Layout:
    path = tuple(reversed(TRACK_UP)) if down else TRACK_UP
    return Layout({"track": path}, _TRACK_MILESTONES, dict(_TRACK_WITNESSES))


def _fixed_switch() -> Layout:
    return Layout(
        {"left": _cells("29(2) 11(2) 10(2) 3(2) 1(2) 0(0)"),
         "right": _cells("23(1) 9(1) 3(1) 2(1) 1(7) 0(0)"),
         "exit": _FX_EXIT},
        _cells("1(1) 1(3) 1(5) 18(4) 20(4) 23(4) 25(4) 3(4) 5(4) 28(2) 4(2) 7(2) 9(2) 10(1) 2(7) 4(7) 6(1) 8(1)"),
        _pairs("1(1)->1(7)"),
    )


def _doubler() -> Layout:
    return Layout(
        {"arrival": _cells("12(1) 4(1)"),
         "green": _cells("2(2) 1(2) 0(0)"),
         "pink": _cells("3(1) 2(1) 1(7) 0(0)"),
         "exit": _FX_EXIT},
        _cells("1(1) 1(3) 1(5) 11(1) 18(4) 2(7) 20(4) 23(4) 25(4) 3(2) 3(4) 32(1) 4(7) 5(2) 5(4) 7(1) 9(1)"),
        _pairs("4(1)->2(2), 1(1)->1(7)"),
    )


def _fork() -> Layout:
    return Layout(
        {"arrival": _cells("28(1) 10(1) 4(1) 1(1)"),
         "green": _cells("1(2) 1(3) 3(3) 7(3) 20(3)"),
         "pink": _cells("1(7) 1(6) 4(6) 5(7) 13(7)")},
        _cells("0(0) 11(1) 12(6) 14(7) 19(3) 2(2) 2(3) 2(7) 27(1) 3(1) 3(6) 4(3) 4(7) 8(3)"),
        _pairs("1(1)->1(2), 0(0)->1(5)"),
    )


def _selector() -> Layout:
    return Layout(
        {"arrival": _cells("9(6) 10(6) 4(6) 1(6) 0(0)"),
         "pink": _cells("0(0) 1(1) 2(1) 7(1) 18(1)"),
         "green": _CTRL_TRACK[6:]},
        _cells("1(2) 1(3) 11(6) 13(5) 19(1) 2(6) 2(7) 24(6) 26(6) 3(1) 3(6) 3(7) 32(4) 4(4) 4(5) 6(1) 6(5)"),
        _pairs("1(6)->2(7), 0(0)->1(7), 1(7)->0(0), 1(5)->0(0), "
               "1(3)->0(0), 2(6)->1(5), 3(6)->1(6), 2(7)->1(7)"),
        {addr("1(7)"): State.B, addr("1(5)"): State.B},
    )


def _controller(colour: State) -> Layout:
    return Layout(
        {"track": _CTRL_TRACK, "signal": _cells("31(3) 12(3) 4(3)")},
        _cells("1(5) 1(7) 11(3) 11(6) 13(5) 2(3) 24(6) 26(6) 3(3) 3(6) 32(3) 32(4) 4(4) 5(4) 5(7) 6(5)"),
        _pairs("1(3)->0(0), 4(3)->5(4), 1(2)->0(0), 3(3)->1(3)"),
        {addr("1(3)"): colour},
    )


def _sensor(colour: State) -> Layout:
    return Layout(
        {"track": _CTRL_TRACK, "signal": _cells("26(1) 9(1) 3(1)")},
        _cells("1(3) 1(5) 1(7) 10(1) 11(6) 13(5) 2(1) 24(6) 25(1) 26(6) 3(6) 32(4) 4(4) 5(7) 6(5) 8(1)"),
        _pairs("0(0)->1(3), 1(1)->2(2), 3(1)->10(1), 2(1)->3(1), 1(7)->0(0)"),
        {addr("1(1)"): colour},
    )


def layout(kind: StructureKind, injection: Injection = Injection.NONE) -> Layout:
    K = StructureKind
    if kind is K.TRACK:
        return _track(down=injection in (Injection.SIMPLE_DOWN, Injection.DOUBLE_DOWN))
    return {
        K.FIXED_SWITCH: _fixed_switch,
        K.FORK: _fork,
        K.DOUBLER: _doubler,
        K.SELECTOR: _selector,
        K.CONTROLLER_BLACK: lambda: _controller(State.B),
        K.CONTROLLER_WHITE: lambda: _controller(State.W),
        K.SENSOR_WHITE: lambda: _sensor(State.W),
        K.SENSOR_BLACK: lambda: _sensor(State.B),
    }[kind]()


# Cells made black at time 0; for a double locomotive the rear comes first.
_I = Injection
_K = StructureKind
_INJECTIONS: dict[StructureKind, dict[tuple[Injection, bool], tuple[str, ...]]] = {
    _K.TRACK: {
        (_I.SIMPLE_UP, False): ("10(4)",),
        (_I.DOUBLE_UP, False): ("10(4)", "3(4)"),
        (_I.SIMPLE_DOWN, False): ("7(1)",),
        (_I.DOUBLE_DOWN, False): ("7(1)", "3(1)"),
    },
    _K.FIXED_SWITCH: {
        (_I.FROM_LEFT, False): ("10(2)",),
        (_I.FROM_RIGHT, False): ("3(1)",),
        (_I.FROM_LEFT, True): ("10(2)", "3(2)"),
        (_I.FROM_RIGHT, True): ("3(1)", "2(1)"),
    },
    _K.FORK: {(_I.SIMPLE_UP, False): ("4(1)",)},
    _K.DOUBLER: {(_I.SIMPLE_UP, False): ("4(1)",)},
    _K.SELECTOR: {
        (_I.SIMPLE_UP, False): ("10(6)",),
        (_I.DOUBLE_UP, False): ("10(6)", "4(6)"),
    },
    _K.CONTROLLER_BLACK: {(_I.SIMPLE_UP, False): ("10(6)",), (_I.SIGNAL, False): ("4(3)",)},
    _K.CONTROLLER_WHITE: {(_I.SIMPLE_UP, False): ("10(6)",), (_I.SIGNAL, False): ("4(3)",)},
    _K.SENSOR_WHITE: {(_I.SIMPLE_UP, False): ("10(6)",)},
    _K.SENSOR_BLACK: {(_I.SIMPLE_UP, False): ("10(6)",), (_I.SIGNAL, False): ("3(1)",)},
}


def legal_injections(kind: StructureKind) -> list[tuple[Injection, bool]]:
    return [(Injection.NONE, False), *_INJECTIONS[kind]]


@dataclass(frozen=True)
class ScenarioSpec:
    structure: StructureKind
    injection: Injection = Injection.NONE
    steps: int = 0
    double: bool = False  # only meaningful for the fixed switch entries

    def __post_init__(self):
        object.__setattr__(self, "structure", StructureKind(self.structure))
        object.__setattr__(self, "injection", Injection(self.injection))
        if self.steps < 0:
            raise IllegalScenario("steps must be >= 0")
        if (self.injection, self.double) not in legal_injections(self.structure):
            extra = " (double)" if self.double else ""
            raise IllegalScenario(f"{self.injection.value}{extra} is not available for {self.structure.value}")

    @property
    def injected_cells(self) -> tuple[CellAddress, ...]:
        if self.injection is Injection.NONE:
            return ()
        return _cells(" ".join(_INJECTIONS[self.structure][self.injection, self.double]))


def inject(config: Configuration, cells: Sequence[CellAddress | str]) -> Configuration:
    """Blacken locomotive or signal cells lying on a declared path.

    Two cells must be consecutive on one path, rear first.
    """
    cells = [addr(c) for c in cells]
    if not cells:
        return config
    if len(cells) > 2:
        raise NotOnPath("a locomotive occupies one or two cells")
    paths = list(config.paths.values())
    for c in cells:
        if not any(c in p for p in paths):
            raise NotOnPath(f"{c} is not on any path of the structure")
    if len(cells) == 2:
        rear, front = cells
        if not any(rear in p and p.index(rear) + 1 < len(p) and p[p.index(rear) + 1] == front for p in paths):
            raise NotOnPath(f"{rear} and {front} are not consecutive on a path")
    return config.with_states({c: State.B for c in cells})


def build_idle(kind: StructureKind | str, table: RuleTable, injection: Injection = Injection.NONE) -> Completion:
    return _build_idle(StructureKind(kind), table, Injection(injection))


@lru_cache(maxsize=64)
def _build_idle(kind: StructureKind, table: RuleTable, injection: Injection) -> Completion:
    lay = layout(kind, injection)
    return complete_configuration(lay.facts(), table, build_disk(DISK_RADIUS), paths=lay.paths)


def build_scenario(spec: ScenarioSpec, table: RuleTable | None = None) -> Configuration:
    if table is None:
        from .rules import paper_table
        table = paper_table()
    idle = build_idle(spec.structure, table, spec.injection).config
    return inject(idle, spec.injected_cells)
