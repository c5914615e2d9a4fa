"""Golden rule-id traces and comparison against engine output."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .engine import Trace
from .heptagrid import CellAddress, addr
from .rules import RuleTable

GOLDEN_NAMES = (
    "evms", "evds", "evmd", "evdd",
    "efx_simple_left", "efx_simple_right", "efx_double_left", "efx_double_right",
    "efx_exit_simple", "efx_exit_double",
    "edbl", "efrk", "esel_simple", "esel_double",
    "ectrlb", "ectrlo_locomotive", "ectrlo_signal_wb", "ectrlo_signal_bw",
    "ecaptw", "ecaptb_locomotive", "ecaptb_signal",
)


class UnknownFixture(KeyError):
    pass


class FixtureCorrupted(ValueError):
    pass


@dataclass(frozen=True)
class GoldenTrace:
    name: str
    cells: tuple[CellAddress, ...]
    # matrix[t - 1][j] is the rule fired by cells[j] to reach time t
    matrix: tuple[tuple[int, ...], ...]
    red: tuple[tuple[bool, ...], ...]

    @property
    def rows(self) -> int:
        return len(self.matrix)

    def rule(self, time: int, cell: CellAddress | str) -> int:
        return self.matrix[time - 1][self.cells.index(addr(cell))]

    def column(self, cell: CellAddress | str) -> list[int]:
        j = self.cells.index(addr(cell))
        return [row[j] for row in self.matrix]

    def rule_ids(self) -> set[int]:
        return {r for row in self.matrix for r in row}


def _fixture_dir():
    return resources.files("heptaca").joinpath("data/fixtures")


@lru_cache(maxsize=1)
def _checksums() -> dict[str, str]:
    out = {}
    for line in _fixture_dir().joinpath("SHA256SUMS").read_text(encoding="utf-8").splitlines():
        digest, name = line.split()
        out[name] = digest
    return out


def parse_golden(text: str, name: str | None = None) -> GoldenTrace:
    cells: list[CellAddress] | None = None
    entries: dict[tuple[int, CellAddress], tuple[int, bool]] = {}
    header_seen = False
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key = key.strip()
            if key == "cells":
                cells = [addr(c) for c in value.split()]
            elif key == "name" and name is None:
                name = value.strip()
            continue
        if not line.strip():
            continue
        if not header_seen:
            if line.split("\t") != ["time", "cell", "rule", "red"]:
                raise FixtureCorrupted(f"bad header {line!r}")
            header_seen = True
            continue
        t, c, r, red = line.split("\t")
        entries[int(t), addr(c)] = (int(r), red == "1")
    if cells is None:
        raise FixtureCorrupted("missing '# cells:' header")
    horizon = max((t for t, _ in entries), default=0)
    matrix, reds = [], []
    for t in range(1, horizon + 1):
        try:
            row = [entries[t, c] for c in cells]
        except KeyError as exc:
            raise FixtureCorrupted(f"{name}: matrix is not rectangular at time {t}") from exc
        matrix.append(tuple(r for r, _ in row))
        reds.append(tuple(x for _, x in row))
    if len(entries) != horizon * len(cells):
        raise FixtureCorrupted(f"{name}: entries outside the declared columns")
    return GoldenTrace(name or "", tuple(cells), tuple(matrix), tuple(reds))


@lru_cache(maxsize=None)
def golden(name: str) -> GoldenTrace:
    if name not in GOLDEN_NAMES:
        raise UnknownFixture(name)
    fn = f"{name}.tsv"
    raw = _fixture_dir().joinpath(fn).read_bytes()
    if hashlib.sha256(raw).hexdigest() != _checksums()[fn]:
        raise FixtureCorrupted(f"{fn}: checksum mismatch")
    return parse_golden(raw.decode("utf-8"), name)


def all_goldens() -> list[GoldenTrace]:
    return [golden(n) for n in GOLDEN_NAMES]


def red_mismatches(g: GoldenTrace, table: RuleTable) -> list[tuple[int, CellAddress, int]]:
    """Entries whose red mark disagrees with the rule changing the cell state."""
    out = []
    for t, (row, reds) in enumerate(zip(g.matrix, g.red), 1):
        for c, rid, red in zip(g.cells, row, reds):
            if table.by_id(rid).conservative == red:
                out.append((t, c, rid))
    return out


@dataclass(frozen=True)
class Mismatch:
    time: int
    cell: CellAddress
    expected: int
    actual: int | None

    def __str__(self) -> str:
        got = "nothing" if self.actual is None else f"rule {self.actual}"
        return f"time {self.time}, cell {self.cell}: expected rule {self.expected}, got {got}"


@dataclass(frozen=True)
class Diff:
    name: str
    mismatches: tuple[Mismatch, ...]

    def __bool__(self) -> bool:
        return bool(self.mismatches)

    def __len__(self) -> int:
        return len(self.mismatches)

    @property
    def first(self) -> Mismatch | None:
        return self.mismatches[0] if self.mismatches else None


def compare_trace(expected: GoldenTrace, actual: Trace | GoldenTrace) -> Diff:
    """Project ``actual`` onto the golden columns and times.

    Mismatches are ordered by time, then by column order.
    """
    if isinstance(actual, GoldenTrace):
        got = {(t, c): actual.rule(t, c) for t in range(1, actual.rows + 1) for c in actual.cells}
    else:
        got = actual.table()
    out = []
    for t, row in enumerate(expected.matrix, 1):
        for c, rid in zip(expected.cells, row):
            have = got.get((t, c))
            if have != rid:
                out.append(Mismatch(t, c, rid, have))
    return Diff(expected.name, tuple(out))


def with_matrix(g: GoldenTrace, time: int, cell: CellAddress | str, rule_id: int) -> GoldenTrace:
    """Copy of ``g`` with one entry replaced; handy for perturbation checks."""
    j = g.cells.index(addr(cell))
    rows = [list(r) for r in g.matrix]
    rows[time - 1][j] = rule_id
    return GoldenTrace(g.name, g.cells, tuple(map(tuple, rows)), g.red)


# -- replay -----------------------------------------------------------------

def _scenarios():
    from .structures import Injection as I, ScenarioSpec, StructureKind as K

    def spec(kind, injection, double=False):
        return lambda steps: ScenarioSpec(kind, injection, steps, double)

    return {
        "evms": spec(K.TRACK, I.SIMPLE_UP),
        "evds": spec(K.TRACK, I.SIMPLE_DOWN),
        "evmd": spec(K.TRACK, I.DOUBLE_UP),
        "evdd": spec(K.TRACK, I.DOUBLE_DOWN),
        "efx_simple_left": spec(K.FIXED_SWITCH, I.FROM_LEFT),
        "efx_simple_right": spec(K.FIXED_SWITCH, I.FROM_RIGHT),
        "efx_double_left": spec(K.FIXED_SWITCH, I.FROM_LEFT, True),
        "efx_double_right": spec(K.FIXED_SWITCH, I.FROM_RIGHT, True),
        # the exit columns are the same whichever side the locomotive came from
        "efx_exit_simple": spec(K.FIXED_SWITCH, I.FROM_LEFT),
        "efx_exit_double": spec(K.FIXED_SWITCH, I.FROM_LEFT, True),
        "edbl": spec(K.DOUBLER, I.SIMPLE_UP),
        "efrk": spec(K.FORK, I.SIMPLE_UP),
        "esel_simple": spec(K.SELECTOR, I.SIMPLE_UP),
        "esel_double": spec(K.SELECTOR, I.DOUBLE_UP),
        "ectrlb": spec(K.CONTROLLER_BLACK, I.SIMPLE_UP),
        "ectrlo_locomotive": spec(K.CONTROLLER_WHITE, I.SIMPLE_UP),
        "ectrlo_signal_wb": spec(K.CONTROLLER_WHITE, I.SIGNAL),
        "ectrlo_signal_bw": spec(K.CONTROLLER_BLACK, I.SIGNAL),
        "ecaptw": spec(K.SENSOR_WHITE, I.SIMPLE_UP),
        "ecaptb_locomotive": spec(K.SENSOR_BLACK, I.SIMPLE_UP),
        "ecaptb_signal": spec(K.SENSOR_BLACK, I.SIGNAL),
    }


def scenario_for(name: str):
    """The built-in scenario whose run is compared with golden ``name``."""
    if name not in GOLDEN_NAMES:
        raise UnknownFixture(name)
    return _scenarios()[name](golden(name).rows)


def replay(name: str, table: RuleTable, layout_table: RuleTable | None = None) -> Diff:
    """Build, run and compare one golden scenario.

    The layout is completed against ``layout_table`` (default: ``table``).
    Engine errors propagate; callers decide how to report them.
    """
    from .engine import run
    from .structures import build_scenario

    g = golden(name)
    config = build_scenario(scenario_for(name), layout_table or table)
    _, trace = run(config, table, g.rows)
    return compare_trace(g, trace)


# -- witness sequences ------------------------------------------------------

@dataclass(frozen=True)
class WitnessSequence:
    """Rules fired by one cell during a scenario, consecutive repeats collapsed.

    The first entry is the cell's rule in the idle structure.  ``disputed``
    marks sequences the engine is known not to reproduce.
    """
    structure: str
    injection: str
    double: bool
    cell: CellAddress
    rules: tuple[int, ...]
    disputed: bool = False

    @property
    def label(self) -> str:
        extra = "+double" if self.double else ""
        return f"{self.structure}/{self.injection}{extra}@{self.cell}"


def parse_witnesses(text: str) -> list[WitnessSequence]:
    out = []
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].split("\t") != ["structure", "injection", "double", "cell", "rules", "status"]:
        raise FixtureCorrupted("bad witness header")
    for ln in lines[1:]:
        k, inj, dbl, cell, rules, status = ln.split("\t")
        out.append(WitnessSequence(k, inj, dbl == "1", addr(cell),
                                   tuple(int(r) for r in rules.split(",")), status == "disputed"))
    return out


@lru_cache(maxsize=1)
def _witness_tuple() -> tuple[WitnessSequence, ...]:
    raw = _fixture_dir().joinpath("witness.tsv").read_bytes()
    if hashlib.sha256(raw).hexdigest() != _checksums()["witness.tsv"]:
        raise FixtureCorrupted("witness.tsv: checksum mismatch")
    return tuple(parse_witnesses(raw.decode("utf-8")))


def witnesses() -> list[WitnessSequence]:
    return list(_witness_tuple())


WITNESS_HORIZON = 12


def collapse(ids) -> list[int]:
    out: list[int] = []
    for r in ids:
        if not out or out[-1] != r:
            out.append(r)
    return out


def witness_run(w: WitnessSequence, table: RuleTable, layout_table: RuleTable | None = None,
                horizon: int = WITNESS_HORIZON) -> list[int]:
    """Collapsed rule sequence of ``w.cell`` in an engine run, idle rule first."""
    from .engine import neighborhood_of, run
    from .rules import lookup
    from .structures import Injection, ScenarioSpec, StructureKind, build_idle, build_scenario

    kind, injection = StructureKind(w.structure), Injection(w.injection)
    base = layout_table or table
    idle = build_idle(kind, base, injection).config
    first = lookup(table, idle.state(w.cell), neighborhood_of(idle, w.cell))
    config = build_scenario(ScenarioSpec(kind, injection, horizon, w.double), base)
    _, trace = run(config, table, horizon)
    head = [first.id if first else None]
    return collapse(head + [trace.at(t, w.cell) for t in range(1, horizon + 1)])


def _is_slice(small, big) -> bool:
    n = len(small)
    return any(list(big[i:i + n]) == list(small) for i in range(len(big) - n + 1))


def witness_agrees(expected, got) -> bool:
    """True when ``got`` tells the same story as ``expected``.

    Either the expected sequence occurs inside ``got``, or the run starts
    later in the story: the locomotive is injected nearer to the cell than
    the scenario behind ``expected`` assumed, so a leading part is skipped.
    """
    expected, got = list(expected), list(got)
    if _is_slice(expected, got):
        return True
    tail = got[1:]
    return (bool(tail) and got[0] == expected[0]
            and len(tail) < len(expected) - 1 and expected[-len(tail):] == tail)


# -- single-fault sensitivity -----------------------------------------------

def with_flipped_next(table: RuleTable, rule_id: int) -> RuleTable:
    """Copy of ``table`` where rule ``rule_id`` produces the other state."""
    from dataclasses import replace as dc_replace

    from .rules import State

    rule = table.by_id(rule_id)
    flipped = State.W if rule.next is State.B else State.B
    return table.replace(dc_replace(rule, next=flipped))


def _fired_in_goldens(table: RuleTable) -> dict[str, frozenset[int]]:
    from .engine import run
    from .structures import build_scenario

    out = {}
    for name in GOLDEN_NAMES:
        _, trace = run(build_scenario(scenario_for(name), table), table, golden(name).rows)
        out[name] = frozenset(e.rule_id for e in trace.events)
    return out


def _fired_in_witnesses(table: RuleTable) -> dict[WitnessSequence, frozenset[int]]:
    from .engine import run
    from .structures import Injection, ScenarioSpec, StructureKind, build_scenario

    out = {}
    for w in witnesses():
        if w.disputed:
            continue
        spec = ScenarioSpec(StructureKind(w.structure), Injection(w.injection), WITNESS_HORIZON, w.double)
        _, trace = run(build_scenario(spec, table), table, WITNESS_HORIZON)
        # the idle rule of the cell is part of the sequence as well
        out[w] = frozenset(e.rule_id for e in trace.events) | {w.rules[0]}
    return out


def fault_sensitivity(table: RuleTable, rule_ids, include_witnesses: bool = True,
                      exhaustive: bool = False) -> dict[int, tuple[str, ...]]:
    """For each rule, the fixtures that fail once its next state is flipped.

    Only the first failing fixture is reported unless ``exhaustive`` is set.

    Layouts are always completed with the pristine ``table`` so that only the
    dynamics see the fault.  A fixture whose pristine run never fires the rule
    cannot notice it and is skipped without replaying.
    """
    from .engine import EngineError

    goldens = _fired_in_goldens(table)
    wits = _fired_in_witnesses(table) if include_witnesses else {}
    report = {}
    for rid in rule_ids:
        bad = with_flipped_next(table, rid)
        failed = []
        for name, fired in goldens.items():
            if rid not in fired:
                continue
            try:
                broken = bool(replay(name, bad, layout_table=table))
            except EngineError:
                broken = True
            if broken:
                failed.append(name)
                if not exhaustive:
                    break
        for w, fired in wits.items():
            if rid not in fired or (failed and not exhaustive):
                continue
            try:
                broken = not witness_agrees(w.rules, witness_run(w, bad, layout_table=table))
            except EngineError:
                broken = True
            if broken:
                failed.append(w.label)
                if not exhaustive:
                    break
        report[rid] = tuple(failed)
    return report
