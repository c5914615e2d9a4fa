"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch or incoherent table,
2 input error, 3 engine error.
"""
from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .engine import EngineError, run
from .fixtures import GOLDEN_NAMES, UnknownFixture, replay
from .rules import (
    DuplicateId,
    DuplicateRuleWarning,
    RuleSyntaxError,
    RuleTable,
    check_coherence,
    parse_rules,
    paper_rules_text,
    paper_table,
    rotation_report,
)
from .structures import (
    AmbiguousLayout,
    IllegalScenario,
    Injection,
    LayoutInfeasible,
    ScenarioSpec,
    StructureKind,
    build_scenario,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_ENGINE = 3

ENV_RULES = "HEPTA_RULES"


class InputError(Exception):
    pass


def _read_table(path: str | None) -> tuple[RuleTable, str]:
    path = path or os.environ.get(ENV_RULES)
    try:
        if path:
            text = Path(path).read_text(encoding="utf-8")
        else:
            path, text = "paper-144.rules", paper_rules_text()
        return parse_rules(text), path
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (RuleSyntaxError, DuplicateId) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_check_rules(args, out) -> int:
    table, path = _read_table(args.file)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DuplicateRuleWarning)
        conflicts = check_coherence(table)
    print(f"{path}: {len(table)} rules, {len(conflicts)} conflicts", file=out)
    for c in conflicts:
        print(f"  conflict: {c}", file=out)
    for w in caught:
        print(f"  warning: {w.message}", file=out)
    report = rotation_report(table)
    print(f"rotation classes used: {len(report.classes)}; "
          f"rotationally incompatible pairs: {len(report.conflicts)}", file=out)
    return EXIT_OK if not conflicts else EXIT_MISMATCH


def cmd_rotation_report(args, out) -> int:
    table, path = _read_table(args.file)
    report = rotation_report(table)
    print(f"{path}: {len(table)} rules in {len(report.classes)} rotation classes", file=out)
    for canon, ids in report.classes.items():
        if len(ids) > 1:
            print(f"  class {canon}: rules {', '.join(map(str, ids))}", file=out)
    print(f"incompatible pairs ({len(report.conflicts)}):", file=out)
    for a, b in report.conflicts:
        print(f"  {a} {b}", file=out)
    print(f"compatible pairs: {len(report.compatible)}", file=out)
    return EXIT_OK


def _parse_choice(enum, value: str, what: str):
    for member in enum:
        if value.lower() in (member.value.lower(), member.name.lower()):
            return member
    names = ", ".join(m.value for m in enum)
    raise InputError(f"unknown {what} {value!r}; choose one of {names}")


# Scenario layouts are fixed data: they are always completed against the
# bundled table, so a rule file under test only drives the dynamics.

def cmd_run(args, out) -> int:
    table, _ = _read_table(args.rules)
    kind = _parse_choice(StructureKind, args.structure, "structure")
    injection = _parse_choice(Injection, args.injection, "injection")
    try:
        spec = ScenarioSpec(kind, injection, args.steps, args.double)
        config = build_scenario(spec, paper_table())
    except (IllegalScenario, LayoutInfeasible) as exc:
        raise InputError(str(exc)) from None
    try:
        _, trace, snaps = run(config, table, args.steps, keep=True)
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    tsv = trace.to_tsv()
    if args.trace in (None, "-"):
        out.write(tsv)
    else:
        Path(args.trace).write_text(tsv, encoding="utf-8")
    if args.svg:
        from .render import snapshot_svg

        folder = Path(args.svg)
        folder.mkdir(parents=True, exist_ok=True)
        for t, snap in enumerate(snaps):
            title = f"{kind.value} {injection.value} t={t}"
            (folder / f"t{t:03d}.svg").write_text(snapshot_svg(snap, title=title), encoding="utf-8")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    table, _ = _read_table(args.rules)
    if args.all or not args.name:
        names = list(GOLDEN_NAMES)
    else:
        if args.name not in GOLDEN_NAMES:
            raise InputError(f"unknown fixture {args.name!r}")
        names = [args.name]
    failed = 0
    for name in names:
        try:
            diff = replay(name, table, layout_table=paper_table())
        except (EngineError, LayoutInfeasible) as exc:
            failed += 1
            print(f"FAIL {name}: {exc}", file=out)
            continue
        except UnknownFixture:
            raise InputError(f"unknown fixture {name!r}") from None
        if diff:
            failed += 1
            print(f"FAIL {name}: {len(diff)} mismatches, first at {diff.first}", file=out)
        else:
            print(f"PASS {name}", file=out)
    print(f"{len(names) - failed}/{len(names)} fixtures pass", file=out)
    return EXIT_OK if not failed else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heptaca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-rules", help="parse a rule file and check its coherence")
    p.add_argument("file", nargs="?", help=f"rule file (default: ${ENV_RULES} or the bundled table)")
    p.set_defaults(func=cmd_check_rules)

    p = sub.add_parser("rotation-report", help="list rules that are rotations of one another")
    p.add_argument("file", nargs="?")
    p.set_defaults(func=cmd_rotation_report)

    p = sub.add_parser("run", help="run a built-in scenario and write its trace")
    p.add_argument("structure", help=", ".join(k.value for k in StructureKind))
    p.add_argument("injection", help=", ".join(i.value for i in Injection))
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--trace", help="output TSV (default: stdout)")
    p.add_argument("--svg", metavar="DIR", help="also write one SVG snapshot per step")
    p.add_argument("--double", action="store_true", help="double locomotive at a fixed-switch entry")
    p.add_argument("--rules", help="rule file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="replay golden traces")
    p.add_argument("name", nargs="?", help="fixture name (default: all)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--rules", help="rule file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "steps", 0) < 0:
        print("error: --steps must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings():
            # completion ambiguity in far-out decorations is expected and harmless here
            warnings.simplefilter("ignore", AmbiguousLayout)
            return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
