import hashlib
from importlib import resources

import pytest

from heptaca.engine import Trace, TraceEvent
from heptaca.fixtures import (
    GOLDEN_NAMES,
    FixtureCorrupted,
    UnknownFixture,
    all_goldens,
    collapse,
    compare_trace,
    fault_sensitivity,
    golden,
    parse_golden,
    red_mismatches,
    replay,
    witness_agrees,
    witness_run,
    witnesses,
    with_flipped_next,
    with_matrix,
)
from heptaca.heptagrid import addr

# rows x columns of every transcribed trace table
SHAPES = {
    "evms": (9, 11), "evds": (8, 11), "evmd": (8, 11), "evdd": (8, 11),
    "edbl": (8, None), "efrk": (5, None), "esel_simple": (7, None), "esel_double": (7, None),
    "ectrlb": (7, None), "ecaptw": (7, None),
}


def test_twenty_one_goldens():
    assert len(GOLDEN_NAMES) == len(set(GOLDEN_NAMES)) == 21


@pytest.mark.parametrize("name, shape", SHAPES.items())
def test_shapes(name, shape):
    g = golden(name)
    rows, cols = shape
    assert g.rows == rows
    if cols is not None:
        assert len(g.cells) == cols
    assert all(len(r) == len(g.cells) for r in g.matrix)


def test_golden_examples():
    assert golden("evms").rule(1, "3(4)") == 16
    assert golden("evds").rule(1, "3(1)") == 63
    assert golden("ecaptw").rule(4, "1(1)") == 131


def test_unknown_fixture():
    with pytest.raises(UnknownFixture):
        golden("nope")


def test_checksums_match_files():
    folder = resources.files("heptaca").joinpath("data/fixtures")
    sums = dict(reversed(line.split()) for line in folder.joinpath("SHA256SUMS").read_text().splitlines())
    assert set(sums) == {f"{n}.tsv" for n in GOLDEN_NAMES} | {"witness.tsv"}
    for fn, digest in sums.items():
        assert hashlib.sha256(folder.joinpath(fn).read_bytes()).hexdigest() == digest


def test_ids_exist_in_the_table(table):
    known = set(table.ids)
    for g in all_goldens():
        assert g.rule_ids() <= known, g.name


def test_red_marks_match_state_changes(table):
    for g in all_goldens():
        assert red_mismatches(g, table) == [], g.name


def test_parse_golden_rejects_damage():
    good = "# cells: 0(0) 1(1)\ntime\tcell\trule\tred\n1\t0(0)\t1\t0\n1\t1(1)\t2\t0\n"
    assert parse_golden(good, "x").matrix == ((1, 2),)
    with pytest.raises(FixtureCorrupted):
        parse_golden(good.replace("time\tcell", "t\tcell"))
    with pytest.raises(FixtureCorrupted):
        parse_golden(good.replace("# cells: 0(0) 1(1)\n", ""))
    with pytest.raises(FixtureCorrupted):
        parse_golden(good + "2\t0(0)\t1\t0\n")


def test_compare_with_itself_and_a_perturbation():
    g = golden("evms")
    assert not compare_trace(g, g)
    bad = with_matrix(g, 3, "1(5)", 99)
    diff = compare_trace(g, bad)
    assert len(diff) == 1
    assert (diff.first.time, diff.first.cell, diff.first.expected, diff.first.actual) == (3, addr("1(5)"), g.rule(3, "1(5)"), 99)


def test_compare_reports_missing_events():
    g = golden("efrk")
    diff = compare_trace(g, Trace((TraceEvent(1, g.cells[0], g.matrix[0][0]),), 1))
    assert diff.first.time == 1 and diff.first.actual is None
    assert len(diff) == g.rows * len(g.cells) - 1


@pytest.mark.parametrize("name", GOLDEN_NAMES)
def test_replay(table, name):
    diff = replay(name, table)
    assert not diff, diff.first


def test_flipped_rule_16_shows_one_step_after_firing(table):
    # the faulty rule still fires under its own id; its wrong output is seen next
    diff = replay("evms", with_flipped_next(table, 16), layout_table=table)
    assert diff.first.time == 2
    assert all(m.time >= 2 for m in diff.mismatches)


def test_rules_fired_before_a_golden_ends_are_fault_sensitive(table):
    # a rule fired only in a table's last row has no later row to betray it
    seen = sorted({r for g in all_goldens() for row in g.matrix[:-1] for r in row})
    report = fault_sensitivity(table, seen, include_witnesses=False)
    assert [r for r, hits in report.items() if not hits] == []


# -- witness sequences ------------------------------------------------------------

def test_collapse():
    assert collapse([1, 1, 2, 2, 2, 1]) == [1, 2, 1]


@pytest.mark.parametrize("expected, got, ok", [
    ([2, 22, 19, 2], [2, 22, 19, 2], True),
    ([57, 95, 101], [57, 95, 101, 57], True),       # the table stops early
    ([2, 39, 44, 23, 2], [2, 44, 23, 2], True),      # the locomotive starts nearer
    ([2, 39, 44, 23, 2], [2, 23, 2], True),
    ([2, 37, 50, 2], [2, 37, 50, 23, 2], False),
    ([2, 39, 44, 2], [2], False),
    ([5, 35, 33, 5], [5, 33, 35, 5], False),
])
def test_witness_agreement(expected, got, ok):
    assert witness_agrees(expected, got) is ok


@pytest.mark.parametrize("w", [w for w in witnesses() if not w.disputed], ids=lambda w: w.label)
def test_witness_sequences(table, w):
    got = witness_run(w, table)
    assert witness_agrees(w.rules, got), got


def test_disputed_doubler_witness(table):
    """The run passes through rule 23 at 1(1) before settling, a step the witness list leaves out.

    The golden doubler trace has 0(0) fire rule 51 at time 5, whose current
    state is B.  0(0) is a neighbour of 1(1), so at time 5 the cell sees a
    black neighbour whatever its side 1, and the all-white rule 2 cannot fire.
    """
    assert golden("edbl").rule(5, "0(0)") == 51
    assert table.by_id(51).current.value == "B"
    (w,) = [w for w in witnesses() if w.disputed]
    assert (w.structure, str(w.cell)) == ("Doubler", "1(1)")
    got = witness_run(w, table)
    assert got == [2, 37, 73, 75, 50, 23, 2]
    assert [r for r in got if r not in w.rules] == [23]
