"""Combinatorial model of the heptagrid, the {7,3} tessellation.

Cells are named ``n(i)``: index ``n`` inside the tree of sector ``i``, or
``0(0)`` for the central cell.  Each sector tree grows level by level with
the productions ``W -> BWW`` and ``B -> BW``; a level is numbered from left
to right, which is counter-clockwise around the central cell.

The finite materialisation is an :class:`AdjacencyDisk` built ring by ring.
A cell of ring ``k`` with one inner neighbour (a ``W`` node) has four outer
neighbours, a cell with two inner neighbours (a ``B`` node) has three.  The
outer cell shared by two consecutive ring cells belongs to the one lying
counter-clockwise, where it is the ``B`` son.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import accumulate
from typing import Iterator

SECTORS = 7

_ADDR_RE = re.compile(r"^\s*(\d+)\s*\(\s*(\d+)\s*\)\s*$")


class InvalidAddress(ValueError):
    pass


class BoundaryCell(KeyError):
    """The cell lies on the outer ring of the disk, its neighbourhood is cut."""


@dataclass(frozen=True, order=True)
class CellAddress:
    sector: int
    index: int

    def __post_init__(self):
        if self.sector == 0:
            if self.index != 0:
                raise InvalidAddress(f"central cell must be 0(0), got {self.index}(0)")
        elif 1 <= self.sector <= SECTORS:
            if self.index < 1:
                raise InvalidAddress(f"index must be >= 1 in sector {self.sector}")
        else:
            raise InvalidAddress(f"sector {self.sector} out of range 0..7")

    @classmethod
    def parse(cls, text: str) -> "CellAddress":
        m = _ADDR_RE.match(text)
        if m is None:
            raise InvalidAddress(f"malformed address {text!r}")
        return cls(int(m.group(2)), int(m.group(1)))

    @property
    def level(self) -> int:
        """Level inside the sector tree; the central cell is reported as -1."""
        if self.sector == 0:
            return -1
        return level_of(self.index)

    @property
    def ring(self) -> int:
        """Graph distance from the central cell."""
        return self.level + 1

    def __str__(self) -> str:
        return f"{self.index}({self.sector})"

    def __repr__(self) -> str:
        return f"CellAddress({self})"


CENTER = CellAddress(0, 0)


def addr(text: str | CellAddress) -> CellAddress:
    if isinstance(text, CellAddress):
        return text
    return CellAddress.parse(text)


# -- sector tree ----------------------------------------------------------

@lru_cache(maxsize=None)
def _level_statuses(level: int) -> str:
    if level == 0:
        return "W"
    out = []
    for s in _level_statuses(level - 1):
        out.append("BWW" if s == "W" else "BW")
    return "".join(out)


def level_size(level: int) -> int:
    """Cells per sector on ``level``: 1, 3, 8, 21, 55, ..."""
    w, b = 1, 0
    for _ in range(level):
        w, b = 2 * w + b, w + b
    return w + b


def level_start(level: int) -> int:
    return 1 + sum(level_size(k) for k in range(level))


def level_of(index: int) -> int:
    if index < 1:
        raise InvalidAddress(f"tree index must be >= 1, got {index}")
    level, start = 0, 1
    while True:
        size = level_size(level)
        if index < start + size:
            return level
        start += size
        level += 1


@lru_cache(maxsize=None)
def _son_offsets(level: int) -> tuple[int, ...]:
    # offsets[j] = position on level+1 of the first son of node j
    counts = [3 if s == "W" else 2 for s in _level_statuses(level)]
    return (0, *accumulate(counts))


def status_of(a: CellAddress) -> str:
    """Tree status ``'W'`` or ``'B'`` of a cell (``0(0)`` and roots are W)."""
    if a.sector == 0:
        return "W"
    lvl = level_of(a.index)
    return _level_statuses(lvl)[a.index - level_start(lvl)]


def sons_of(a: CellAddress) -> list[CellAddress]:
    if a.sector == 0:
        return [CellAddress(i, 1) for i in range(1, SECTORS + 1)]
    lvl = level_of(a.index)
    pos = a.index - level_start(lvl)
    offs = _son_offsets(lvl)
    base = level_start(lvl + 1)
    return [CellAddress(a.sector, base + k) for k in range(offs[pos], offs[pos + 1])]


def father_of(a: CellAddress) -> CellAddress | None:
    if a.sector == 0:
        return None
    lvl = level_of(a.index)
    if lvl == 0:
        return CENTER
    pos = a.index - level_start(lvl)
    offs = _son_offsets(lvl - 1)
    j = bisect_right(offs, pos) - 1
    return CellAddress(a.sector, level_start(lvl - 1) + j)


def tree_relations(a: CellAddress) -> tuple[CellAddress | None, list[CellAddress]]:
    return father_of(a), sons_of(a)


# -- disk -----------------------------------------------------------------

def ring_cells(k: int) -> list[CellAddress]:
    """Cells of ring ``k`` in counter-clockwise order, starting in sector 1."""
    if k == 0:
        return [CENTER]
    lvl = k - 1
    start, size = level_start(lvl), level_size(lvl)
    return [CellAddress(s, n) for s in range(1, SECTORS + 1) for n in range(start, start + size)]


@dataclass(frozen=True)
class AdjacencyDisk:
    radius: int
    rings: tuple[tuple[CellAddress, ...], ...]
    cyclic: dict[CellAddress, tuple[CellAddress, ...]] = field(repr=False, compare=False)

    @property
    def cells(self) -> frozenset[CellAddress]:
        return frozenset(c for ring in self.rings for c in ring)

    def __contains__(self, a: object) -> bool:
        return isinstance(a, CellAddress) and 0 <= a.ring <= self.radius

    def __iter__(self) -> Iterator[CellAddress]:
        for ring in self.rings:
            yield from ring

    def interior(self) -> Iterator[CellAddress]:
        for ring in self.rings[:-1]:
            yield from ring

    def is_interior(self, a: CellAddress) -> bool:
        return a in self.cyclic

    def neighbors(self, a: CellAddress) -> tuple[CellAddress, ...]:
        return cyclic_neighbors(self, a)

    def side_of(self, a: CellAddress, b: CellAddress) -> int:
        """Position (0..6) of ``b`` in the cyclic list of ``a``."""
        return cyclic_neighbors(self, a).index(b)


def cyclic_neighbors(disk: AdjacencyDisk, a: CellAddress) -> tuple[CellAddress, ...]:
    """The 7 neighbours of ``a`` in counter-clockwise order.

    The list has no distinguished start, except for ``0(0)`` whose list
    starts at ``1(1)``.
    """
    try:
        return disk.cyclic[a]
    except KeyError:
        raise BoundaryCell(f"{a} has no full neighbourhood in a disk of radius {disk.radius}") from None


@lru_cache(maxsize=8)
def build_disk(radius: int) -> AdjacencyDisk:
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rings = tuple(tuple(ring_cells(k)) for k in range(radius + 1))
    cyclic: dict[CellAddress, tuple[CellAddress, ...]] = {}
    if radius >= 1:
        cyclic[CENTER] = rings[1]
    for k in range(1, radius):
        ring = rings[k]
        m = len(ring)
        for j, x in enumerate(ring):
            left, right = ring[j - 1], ring[(j + 1) % m]
            father = father_of(x)
            inner = [father]
            if status_of(x) == "B":
                # the B son also touches the ring cell clockwise of its father
                inner_ring = rings[k - 1]
                inner.append(inner_ring[inner_ring.index(father) - 1])
            cyclic[x] = (left, *sons_of(x), sons_of(right)[0], right, *inner)
    return AdjacencyDisk(radius, rings, cyclic)
