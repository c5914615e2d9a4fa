"""Rule tables: parsing, exact lookup, coherence and rotation analysis.

A rule reads ``id: C N1N2N3N4N5N6N7 -> C'``.  The neighbourhood is listed
from side 1 of the cell, counter-clockwise.  Lookup is exact: rules are not
rotation invariant, so a rotated neighbourhood is a different key.
"""
from __future__ import annotations

import re
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from itertools import combinations, product
from pathlib import Path


class State(str, Enum):
    W = "W"
    B = "B"

    def __str__(self) -> str:
        return self.value


NEIGHBOURS = 7

_RULE_RE = re.compile(r"^(\d+)\s*:\s*([WB])\s+([WB]{7})\s*->\s*([WB])$")


class RuleSyntaxError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str = "malformed rule"):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class DuplicateId(ValueError):
    pass


class DuplicateRuleWarning(UserWarning):
    """Two rules are identical up to their id."""


@dataclass(frozen=True)
class Rule:
    id: int
    current: State
    neighborhood: str
    next: State

    def __post_init__(self):
        if len(self.neighborhood) != NEIGHBOURS or set(self.neighborhood) - {"W", "B"}:
            raise ValueError(f"rule {self.id}: neighbourhood must be 7 W/B symbols")
        object.__setattr__(self, "current", State(self.current))
        object.__setattr__(self, "next", State(self.next))

    @property
    def key(self) -> tuple[State, str]:
        return self.current, self.neighborhood

    @property
    def conservative(self) -> bool:
        return self.current == self.next

    def __str__(self) -> str:
        return f"{self.id}: {self.current} {self.neighborhood} -> {self.next}"


@dataclass(frozen=True)
class RuleTable:
    rules: tuple[Rule, ...]
    index: dict[tuple[State, str], tuple[Rule, ...]] = field(repr=False, compare=False)

    @classmethod
    def from_rules(cls, rules) -> "RuleTable":
        rules = tuple(rules)
        seen: set[int] = set()
        index: dict[tuple[State, str], list[Rule]] = defaultdict(list)
        for r in rules:
            if r.id in seen:
                raise DuplicateId(f"rule id {r.id} defined twice")
            seen.add(r.id)
            index[r.key].append(r)
        return cls(rules, {k: tuple(v) for k, v in index.items()})

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def by_id(self, rule_id: int) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    @property
    def ids(self) -> list[int]:
        return [r.id for r in self.rules]

    def replace(self, rule: Rule) -> "RuleTable":
        """Copy of the table with the rule of the same id swapped for ``rule``."""
        return RuleTable.from_rules(rule if r.id == rule.id else r for r in self.rules)


def parse_rules(text: str) -> RuleTable:
    rules = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RULE_RE.match(line)
        if m is None:
            raise RuleSyntaxError(lineno, raw)
        rid = int(m.group(1))
        if rid < 1:
            raise RuleSyntaxError(lineno, raw, "rule ids start at 1")
        if rid in seen:
            raise DuplicateId(f"line {lineno}: rule id {rid} already defined on line {seen[rid]}")
        seen[rid] = lineno
        rules.append(Rule(rid, State(m.group(2)), m.group(3), State(m.group(4))))
    return RuleTable.from_rules(rules)


def format_rules(table: RuleTable) -> str:
    return "".join(f"{r}\n" for r in table.rules)


def load_rules(path: str | Path) -> RuleTable:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def paper_rules_text() -> str:
    return resources.files("heptaca").joinpath("data/rules/paper-144.rules").read_text(encoding="utf-8")


def paper_table() -> RuleTable:
    return parse_rules(paper_rules_text())


def lookup(table: RuleTable, current: str, neighborhood: str) -> Rule | None:
    """Exact match on ``(current, neighborhood)``; ``None`` when nothing matches.

    On an incoherent table the first rule in table order wins.
    """
    hits = table.index.get((State(current), neighborhood))
    return hits[0] if hits else None


# -- coherence ------------------------------------------------------------

@dataclass(frozen=True)
class Conflict:
    first: Rule
    second: Rule

    def __str__(self) -> str:
        return f"rules {self.first.id} and {self.second.id} disagree on {self.first.current} {self.first.neighborhood}"


def find_duplicates(table: RuleTable) -> list[tuple[Rule, Rule]]:
    out = []
    for rules in table.index.values():
        for a, b in combinations(rules, 2):
            if a.next == b.next:
                out.append((a, b))
    return out


def check_coherence(table: RuleTable) -> list[Conflict]:
    """Pairs of rules with the same key and different new states.

    Exact duplicates are harmless and only raise a :class:`DuplicateRuleWarning`.
    """
    conflicts = []
    for rules in table.index.values():
        for a, b in combinations(rules, 2):
            if a.next != b.next:
                conflicts.append(Conflict(a, b))
    for a, b in find_duplicates(table):
        warnings.warn(f"rules {a.id} and {b.id} are duplicates", DuplicateRuleWarning, stacklevel=2)
    return conflicts


# -- rotations ------------------------------------------------------------

def rotations(neighborhood: str) -> list[str]:
    return [neighborhood[k:] + neighborhood[:k] for k in range(len(neighborhood))]


def canonical(neighborhood: str) -> str:
    """Smallest rotation in lexicographic order (B < W)."""
    return min(rotations(neighborhood))


def rotation_shift(a: str, b: str) -> int | None:
    """Smallest ``k`` with ``a`` rotated left by ``k`` equal to ``b``."""
    for k, r in enumerate(rotations(a)):
        if r == b:
            return k
    return None


@dataclass(frozen=True)
class RotationReport:
    # canonical neighbourhood -> ids of the rules falling in that class
    classes: dict[str, tuple[int, ...]]
    conflicts: tuple[tuple[int, int], ...]
    compatible: tuple[tuple[int, int], ...]

    def has_conflict(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.conflicts


def rotation_report(table: RuleTable) -> RotationReport:
    """Rules whose neighbourhoods are distinct rotations of one another.

    Pairs with the same current state are rotationally compatible when their
    new states agree; otherwise a rotation-invariant automaton could not hold
    both.  Pairs are stored with the smaller id first.
    """
    classes: dict[str, list[int]] = defaultdict(list)
    for r in table.rules:
        classes[canonical(r.neighborhood)].append(r.id)
    conflicts, compatible = [], []
    for ids in classes.values():
        for a, b in combinations(ids, 2):
            ra, rb = table.by_id(a), table.by_id(b)
            if ra.current != rb.current or ra.neighborhood == rb.neighborhood:
                continue
            pair = (min(a, b), max(a, b))
            (compatible if ra.next == rb.next else conflicts).append(pair)
    return RotationReport(
        {k: tuple(v) for k, v in sorted(classes.items())},
        tuple(sorted(conflicts)),
        tuple(sorted(compatible)),
    )


def neighborhood_classes() -> dict[str, list[str]]:
    """All 128 binary neighbourhoods grouped by circular permutation."""
    classes: dict[str, list[str]] = defaultdict(list)
    for bits in product("BW", repeat=NEIGHBOURS):
        nb = "".join(bits)
        classes[canonical(nb)].append(nb)
    return dict(classes)


def rotation_class_bound() -> tuple[int, int]:
    """Number of rotation classes and the matching bound on rotation independent rules."""
    n = len(neighborhood_classes())
    return n, n * len(State)
