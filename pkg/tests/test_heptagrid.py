from collections import deque

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heptaca.heptagrid import (
    CENTER,
    BoundaryCell,
    CellAddress,
    InvalidAddress,
    addr,
    build_disk,
    cyclic_neighbors,
    father_of,
    ring_cells,
    sons_of,
    status_of,
    tree_relations,
)


def level_counts(levels):
    """Expand W -> BWW, B -> BW by brute force; returns (#W, #B) per level."""
    row, out = "W", []
    for _ in range(levels):
        out.append((row.count("W"), row.count("B")))
        row = "".join("BWW" if s == "W" else "BW" for s in row)
    return out


def bfs_rings(disk):
    dist = {CENTER: 0}
    queue = deque([CENTER])
    while queue:
        x = queue.popleft()
        if not disk.is_interior(x):
            continue
        for n in disk.neighbors(x):
            if n not in dist:
                dist[n] = dist[x] + 1
                queue.append(n)
    return dist


addresses = st.one_of(
    st.just(CENTER),
    st.builds(CellAddress, st.integers(1, 7), st.integers(1, 5000)),
)


# -- addresses and the sector tree ------------------------------------------

def test_parse_print_examples():
    assert str(addr("10(4)")) == "10(4)"
    assert addr(" 0 ( 0 ) ") == CENTER
    with pytest.raises(InvalidAddress):
        addr("3(0)")
    with pytest.raises(InvalidAddress):
        addr("0(3)")
    with pytest.raises(InvalidAddress):
        addr("1(8)")
    with pytest.raises(InvalidAddress):
        addr("x(1)")


@given(addresses)
def test_address_round_trip(a):
    assert addr(str(a)) == a
    assert (a.sector == 0) == (a.index == 0)


def test_status_examples():
    assert status_of(CENTER) == "W"
    assert status_of(addr("1(1)")) == "W"
    assert status_of(addr("2(1)")) == "B"
    assert status_of(addr("5(1)")) == "B"


def test_tree_relation_examples():
    assert tree_relations(addr("1(1)")) == (CENTER, [addr("2(1)"), addr("3(1)"), addr("4(1)")])
    assert tree_relations(addr("2(1)"))[1] == [addr("5(1)"), addr("6(1)")]
    father, sons = tree_relations(CENTER)
    assert father is None
    assert sons == [CellAddress(s, 1) for s in range(1, 8)]


@given(st.builds(CellAddress, st.integers(1, 7), st.integers(1, 5000)))
def test_sons_follow_status_and_point_back(a):
    sons = sons_of(a)
    assert len(sons) == (3 if status_of(a) == "W" else 2)
    assert all(father_of(s) == a for s in sons)
    # the B son comes first
    assert status_of(sons[0]) == "B"
    assert [s.index for s in sons] == list(range(sons[0].index, sons[0].index + len(sons)))


def test_b_count_per_level_matches_recurrence():
    for level, (w, b) in enumerate(level_counts(9)):
        ring = [c for c in ring_cells(level + 1) if c.sector == 1]
        assert sum(status_of(c) == "B" for c in ring) == b
        assert len(ring) == w + b


# -- the disk ---------------------------------------------------------------

def test_small_disks():
    assert sorted(build_disk(1)) == [CENTER] + [CellAddress(s, 1) for s in range(1, 8)]
    assert [len(r) for r in build_disk(2).rings] == [1, 7, 21]
    assert len(build_disk(3).rings[3]) == 56
    assert [len(r) for r in build_disk(0).rings] == [1]


def test_ring_sizes_against_bfs_and_recurrence():
    disk = build_disk(7)
    dist = bfs_rings(disk)
    assert set(dist) == disk.cells
    for c, d in dist.items():
        assert c.ring == d
    expected = [1] + [7 * (w + b) for w, b in level_counts(7)]
    assert [len(r) for r in disk.rings] == expected
    assert expected[:7] == [1, 7, 21, 56, 147, 385, 1008]


def test_center_and_named_adjacencies():
    disk = build_disk(3)
    assert cyclic_neighbors(disk, CENTER) == tuple(CellAddress(s, 1) for s in range(1, 8))
    around = cyclic_neighbors(disk, addr("1(1)"))
    k = around.index(CENTER)
    rotated = around[k:] + around[:k]
    # 0(0), 1(1) and 1(7) meet at a vertex, so 1(7) sits between the father and the sons
    assert rotated[:5] == (CENTER, addr("1(7)"), addr("2(1)"), addr("3(1)"), addr("4(1)"))
    assert rotated[-1] == addr("1(2)")
    assert addr("2(7)") in disk.neighbors(addr("1(7)"))
    assert addr("1(1)") in disk.neighbors(addr("1(7)"))


def test_boundary_cells_refuse_queries():
    disk = build_disk(2)
    with pytest.raises(BoundaryCell):
        disk.neighbors(addr("5(1)"))


@pytest.mark.parametrize("radius", [5, 6])
def test_symmetry_and_regularity(radius):
    disk = build_disk(radius)
    appearances = {}
    for x in disk.interior():
        around = disk.neighbors(x)
        assert len(set(around)) == 7 and x not in around
        for n in around:
            appearances[n] = appearances.get(n, 0) + 1
            if disk.is_interior(n):
                assert x in disk.neighbors(n)
    for x in disk.interior():
        # every neighbour of an interior cell is in the disk, so all its lists are known
        if all(disk.is_interior(n) for n in disk.neighbors(x)):
            assert appearances[x] == 7


def test_faces_meet_three_at_a_vertex():
    """Consecutive neighbours share a vertex with the cell, in a consistent orientation."""
    disk = build_disk(6)
    for x in disk.interior():
        around = disk.neighbors(x)
        for j in range(7):
            a, b = around[j], around[(j + 1) % 7]
            if not disk.is_interior(a):
                continue
            assert b in disk.neighbors(a)
            # seen from a, the cell b comes just before x when turning counter-clockwise
            la = disk.neighbors(a)
            assert la[(la.index(b) + 1) % 7] == x


def test_geometric_embedding_agrees_with_adjacency():
    from heptaca.render import cell_polygons

    disk = build_disk(5)
    polys = cell_polygons(disk)

    def key(z):
        return (round(z.real, 6), round(z.imag, 6))

    centres = {key(sum(p) / 7) for p in polys.values()}
    assert len(centres) == len(polys)
    for x in disk.interior():
        px = polys[x]
        for j, n in enumerate(disk.neighbors(x)):
            if n not in polys:
                continue
            edge = {key(px[j]), key(px[(j + 1) % 7])}
            assert edge <= {key(z) for z in polys[n]}, (x, n)
