"""Explore, test and render the two-device CXL.cache coherence model.

Exit status: 0 on success, 1 when a property is violated or a test fails,
2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .engine import Trace
from .errors import ModelError, ParseError, ScheduleStuck
from .explorer import Limits, explore
from .generate import random_states
from .invariants import ALL_PROPERTIES, matrix_check, resolve
from .litmus import LitmusResult, builtin_suite, load_litmus, reachable_matrix, run_litmus
from .protocol import mk_initial_state, state_from_json
from .render import FORMATS, render_trace
from .rules import RELAX_FLAGS, RelaxConfig, build_catalog, catalog_markdown

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _line(text: str) -> tuple:
    m = re.fullmatch(r"\(?\s*(-?\d+)\s*,\s*(\w+)\s*\)?", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected VAL,STATE such as 0,I; got {text!r}")
    return int(m.group(1)), m.group(2)


def _prog(text: str) -> list:
    return [p.strip() for p in text.split(",") if p.strip()]


def _config(args) -> RelaxConfig:
    return RelaxConfig.relaxing(*(args.relax or ()))


def _common(p: argparse.ArgumentParser, fmt_default: str = "table", formats=FORMATS) -> None:
    p.add_argument("--relax", action="append", choices=RELAX_FLAGS, metavar="FLAG",
                   help=f"drop an ordering restriction (repeatable): {', '.join(RELAX_FLAGS)}")
    p.add_argument("--format", choices=formats, default=fmt_default)


def _limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-states", type=int, default=10_000_000)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--no-relabel", action="store_true",
                   help="deduplicate on exact states, without UTID relabeling")


# -- explore ----------------------------------------------------------------

def cmd_explore(args) -> int:
    if args.state:
        s0 = state_from_json(json.loads(Path(args.state).read_text()))
    else:
        try:
            s0 = mk_initial_state(args.dev1, args.dev2, args.host, args.prog1, args.prog2)
        except ValueError as e:
            raise UsageError(str(e)) from None
    props = tuple(p.name for p in resolve(args.check or ["swmr"]))
    cat = build_catalog(_config(args))
    rep = explore(cat, s0, Limits(args.max_states, args.max_depth, props, not args.no_relabel))

    if args.format == "json":
        print(json.dumps(rep.to_json(), indent=2))
    else:
        print(f"reachable states: {rep.reachable_count}")
        print(f"terminal states: {rep.terminal_count}")
        print(f"max depth: {rep.depth_reached}")
        if rep.truncated:
            print("truncated: yes (limits reached; results are not exhaustive)")
        for p, t in rep.verdicts.items():
            if t is None:
                print(f"{p}: holds")
            else:
                print(f"{p}: VIOLATED after {len(t)} steps")
                print()
                print(render_trace(t, args.format, args.all_fields))
                print()
    return OK if rep.holds else FAILED


# -- litmus -----------------------------------------------------------------

def _result_json(t, r) -> dict:
    out = {"name": r.name, "mode": t.mode, "pass": r.passed, "details": r.details}
    if r.trace is not None:
        out["trace"] = r.trace.to_json()
    if r.report is not None:
        out["report"] = {k: v for k, v in r.report.to_json().items() if k != "verdicts"}
    return out


def cmd_litmus(args) -> int:
    if not args.files and not args.builtin:
        raise UsageError("give litmus files or --builtin")
    tests = []
    for f in args.files:
        path = Path(f)
        if not path.is_file():
            raise UsageError(f"no such litmus file: {f}")
        try:
            tests.append(load_litmus(path))
        except ParseError as e:
            raise ParseError(f"{f}: {e.message}", e.line, e.column) from None
    if args.builtin:
        tests += builtin_suite()

    lim = Limits(args.max_states, args.max_depth, canonical=not args.no_relabel)
    results, failed = [], 0
    for t in tests:
        try:
            r = run_litmus(t, lim)
        except ScheduleStuck as e:
            r = LitmusResult(t.name, False, [str(e)], e.trace)
        results.append((t, r))
        failed += not r.passed

    if args.format == "json":
        print(json.dumps([_result_json(t, r) for t, r in results], indent=2))
    else:
        for t, r in results:
            print(r.summary())
            if r.trace is not None and (t.mode == "guided" or not r.passed or t.violations):
                print()
                print(render_trace(r.trace, args.format, args.all_fields))
                print()
        print(f"{len(results) - failed} passed, {failed} failed")
    return FAILED if failed else OK


# -- render -----------------------------------------------------------------

def cmd_render(args) -> int:
    try:
        t = Trace.from_json(json.loads(Path(args.trace).read_text()))
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot read trace {args.trace}: {e}") from None
    print(render_trace(t, args.format, args.all_fields))
    return OK


# -- catalog and matrix -----------------------------------------------------

def cmd_catalog(args) -> int:
    cat = build_catalog(_config(args))
    if args.format == "json":
        print(json.dumps([
            {
                "id": r.id,
                "name": r.name,
                "device": r.device,
                "family": r.family.value,
                "hostSide": r.host_side,
                "perfectTracking": r.tracking,
                "relaxableGuards": sorted(r.relaxable_guards),
                "guards": [{"text": g.text, "relax": g.relax} for g in r.guards],
                "droppedGuards": [{"text": g.text, "relax": g.relax} for g in r.dropped],
                "actions": [e.text for e in r.effects],
            }
            for r in cat
        ], indent=2))
    else:
        print(catalog_markdown(cat))
    return OK


def cmd_matrix(args) -> int:
    cat = build_catalog(_config(args))
    props = resolve(args.check or [p.name for p in ALL_PROPERTIES])
    if args.states == "builtin-reachable":
        m = reachable_matrix(cat, props, Limits(args.max_states, args.max_depth,
                                                canonical=not args.no_relabel))
    else:
        m = matrix_check(cat, props, random_states(args.samples, seed=args.seed))
    if args.format == "json":
        print(json.dumps(m.to_json(), indent=2))
    else:
        print(m.to_markdown(only_fired=args.only_fired))
    return OK if m.all_pass else FAILED


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cxlcache", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="exhaustively explore one instance")
    p.add_argument("--state", metavar="FILE", help="initial SystemState as JSON")
    p.add_argument("--dev1", type=_line, default=(0, "I"), metavar="VAL,STATE")
    p.add_argument("--dev2", type=_line, default=(0, "I"), metavar="VAL,STATE")
    p.add_argument("--host", type=_line, default=(0, "I"), metavar="VAL,STATE")
    p.add_argument("--prog1", type=_prog, default=[], metavar="INSTR,...")
    p.add_argument("--prog2", type=_prog, default=[], metavar="INSTR,...")
    p.add_argument("--check", action="append", metavar="PROPERTY",
                   help="property to check (repeatable; default swmr)")
    p.add_argument("--all-fields", action="store_true")
    _common(p)
    _limits(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("litmus", help="run litmus tests")
    p.add_argument("files", nargs="*")
    p.add_argument("--builtin", action="store_true", help="run the built-in suite")
    p.add_argument("--all-fields", action="store_true")
    p.add_argument("--format", choices=FORMATS, default="table")
    _limits(p)
    p.set_defaults(func=cmd_litmus)

    p = sub.add_parser("render", help="render a trace saved as JSON")
    p.add_argument("trace", metavar="FILE")
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("--all-fields", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("catalog", help="print the rule catalog reference")
    _common(p, "markdown", ("markdown", "json"))
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("matrix", help="check every rule against every property")
    p.add_argument("--check", action="append", metavar="PROPERTY",
                   help="property to check (repeatable; default SWMR and the four conjuncts)")
    p.add_argument("--states", choices=("builtin-reachable", "random"),
                   default="builtin-reachable")
    p.add_argument("--samples", type=int, default=10_000, help="random states to draw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only-fired", action="store_true",
                   help="omit rules that never fired from the grid")
    _common(p, "markdown", ("markdown", "json"))
    _limits(p)
    p.set_defaults(func=cmd_matrix)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError, OSError) as e:
        print(f"cxlcache: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
