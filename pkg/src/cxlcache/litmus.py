"""Litmus tests: a small line-oriented file format, a parser and a runner.

A test fixes the initial cache lines and per-device programs, optionally a
schedule of rule names, and one or more expectations::

    test clean_evict_test
    devcache1 = (0, SH)
    devcache2 = (0, SH)
    hcache = (0, SH)
    prog1 = [Evict, Evict]
    schedule = [SharedEvict1, Shared_CleanEvict_NotLastDrop1, SIA_GO_WritePullDrop1]
    expect terminal devcache1 = (0, I)
    expect coherent

Without a schedule the test is exhaustive: every interleaving is explored.
Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .engine import Trace, run_schedule
from .errors import ParseError, UnknownField, UnknownProperty, UnknownRuleName
from .explorer import ExploreReport, Limits, explore
from .invariants import ALL_PROPERTIES, PROPERTIES, MatrixReport, get_property, matrix_check
from .protocol import (
    DeviceState,
    FIELD_NAMES,
    HostState,
    Instruction,
    SystemState,
    mk_initial_state,
)
from .render import field_text
from .rules import RELAX_FLAGS, RelaxConfig, build_catalog

_LINE_FIELDS = ("devcache1", "devcache2", "hcache")
_PROG_FIELDS = ("prog1", "prog2")


@dataclass(frozen=True)
class FieldAssertion:
    path: str  # a state field, or devcacheN/hcache followed by .state or .val
    expected: str
    line: int = field(default=0, compare=False)

    def check(self, s: SystemState) -> bool:
        return _norm(field_text(s, self.path)) == _norm(self.expected)

    def __str__(self) -> str:
        return f"{self.path} = {self.expected}"


def _norm(text: str) -> str:
    return re.sub(r"\s+", "", text)


@dataclass(frozen=True)
class LitmusTest:
    name: str
    relax: RelaxConfig = field(default_factory=RelaxConfig)
    devcache1: tuple = (0, "I")
    devcache2: tuple = (0, "I")
    hcache: tuple = (0, "I")
    prog1: tuple = ()
    prog2: tuple = ()
    schedule: tuple | None = None
    coherent: bool = False
    violations: tuple = ()
    terminal: tuple = ()  # of FieldAssertion

    @property
    def mode(self) -> str:
        return "exhaustive" if self.schedule is None else "guided"

    def initial_state(self) -> SystemState:
        return mk_initial_state(self.devcache1, self.devcache2, self.hcache,
                                self.prog1, self.prog2)

    def catalog(self):
        return build_catalog(self.relax)


@dataclass
class LitmusResult:
    name: str
    passed: bool
    details: list = field(default_factory=list)
    trace: Trace | None = None  # the guided run, or the first violation found
    report: ExploreReport | None = None

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  ({'; '.join(self.details)})" if self.details else ""
        return f"{verdict} {self.name}{extra}"


# -- parsing ----------------------------------------------------------------

_ASSIGN = re.compile(r"^(\w+)\s*=\s*(.*?)\s*$")
_ASSERT = re.compile(r"^([\w.]+)\s*=\s*(.*?)\s*$")
_PAIR = re.compile(r"^\(\s*(-?\d+)\s*,\s*(\w+)\s*\)$")


def _list_items(text: str, lineno: int, col: int) -> list:
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected a bracketed list, got {text!r}", lineno, col)
    inner = text[1:-1].strip()
    if not inner:
        return []
    items = []
    pos = col + 1
    for raw in inner.split(","):
        item = raw.strip()
        if not item:
            raise ParseError("empty list item", lineno, pos)
        items.append((item, pos + raw.index(item)))
        pos += len(raw) + 1
    return items


def _parse_line_value(key: str, text: str, lineno: int, col: int) -> tuple:
    m = _PAIR.match(text)
    if not m:
        raise ParseError(f"expected (<val>, <State>) for {key}, got {text!r}", lineno, col)
    val, state = int(m.group(1)), m.group(2)
    states = HostState if key == "hcache" else DeviceState
    if state not in states.__members__:
        raise ParseError(f"unknown state {state!r} for {key}", lineno, col + m.start(2))
    return (val, state)


def _check_field_path(path: str, lineno: int, col: int) -> None:
    name, dot, sub = path.partition(".")
    if name not in FIELD_NAMES:
        raise UnknownField(f"unknown field {name!r}", lineno, col)
    if dot and (name not in _LINE_FIELDS or sub not in ("state", "val")):
        raise UnknownField(f"unknown field {path!r}", lineno, col)


def parse_litmus(text: str) -> LitmusTest:
    """Parse one litmus test; raises :class:`ParseError` and its subclasses."""
    kw: dict = {}
    relax: list = []
    schedule_at = None
    violations: list = []
    terminal: list = []
    coherent = False
    seen_expect = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        col = indent + 1
        word, _, rest = line.partition(" ")
        word = word.rstrip(":")
        rest_col = col + len(line) - len(rest.lstrip()) if rest else col + len(line)
        rest = rest.strip()

        if word == "test":
            if not re.fullmatch(r"[\w.-]+", rest):
                raise ParseError(f"bad test name {rest!r}", lineno, rest_col)
            if "name" in kw:
                raise ParseError("duplicate test directive", lineno, col)
            kw["name"] = rest
        elif word == "relax":
            if rest not in RELAX_FLAGS:
                raise ParseError(f"unknown relaxation flag {rest!r}", lineno, rest_col)
            relax.append(rest)
        elif word == "expect":
            seen_expect = True
            what, _, arg = rest.partition(" ")
            arg_col = rest_col + len(what) + 1 + (len(arg) - len(arg.lstrip()))
            arg = arg.strip()
            if what == "coherent" and not arg:
                coherent = True
            elif what == "violation":
                try:
                    violations.append(get_property(arg).name)
                except UnknownProperty:
                    raise ParseError(f"unknown property {arg!r}", lineno, arg_col) from None
            elif what == "terminal":
                m = _ASSERT.match(arg)
                if not m or not m.group(2):
                    raise ParseError("expected 'expect terminal <field> = <value>'",
                                     lineno, arg_col)
                _check_field_path(m.group(1), lineno, arg_col)
                terminal.append(FieldAssertion(m.group(1), m.group(2), lineno))
            else:
                raise ParseError(f"unknown expectation {rest!r}", lineno, rest_col)
        else:
            m = _ASSIGN.match(line)
            if not m:
                raise ParseError(f"unrecognised directive {line!r}", lineno, col)
            key, value = m.group(1), m.group(2)
            vcol = col + m.start(2)
            if key in kw:
                raise ParseError(f"duplicate {key}", lineno, col)
            if key in _LINE_FIELDS:
                kw[key] = _parse_line_value(key, value, lineno, vcol)
            elif key in _PROG_FIELDS:
                prog = []
                for item, icol in _list_items(value, lineno, vcol):
                    if item not in Instruction.__members__:
                        raise ParseError(f"unknown instruction {item!r}", lineno, icol)
                    prog.append(item)
                kw[key] = tuple(prog)
            elif key == "schedule":
                kw[key] = tuple(_list_items(value, lineno, vcol))
                schedule_at = lineno
            else:
                raise ParseError(f"unknown key {key!r}", lineno, col)

    if "name" not in kw:
        raise ParseError("missing 'test <name>' directive", 1, 1)
    if not seen_expect:
        raise ParseError("at least one 'expect' line is required", 1, 1)
    cfg = RelaxConfig.relaxing(*relax)
    if "schedule" in kw:
        known = build_catalog(cfg)
        for name, icol in kw["schedule"]:
            if name not in known:
                raise UnknownRuleName(f"unknown rule {name!r}", schedule_at, icol)
        kw["schedule"] = tuple(name for name, _ in kw["schedule"])
    t = LitmusTest(relax=cfg, coherent=coherent, violations=tuple(violations),
                   terminal=tuple(terminal), **kw)
    try:
        t.initial_state()
    except ValueError as e:
        raise ParseError(str(e), 1, 1) from None
    return t


def load_litmus(path) -> LitmusTest:
    return parse_litmus(Path(path).read_text())


def to_text(t: LitmusTest) -> str:
    """Inverse of :func:`parse_litmus`, up to comments and layout."""
    lines = [f"test {t.name}"]
    lines += [f"relax {f}" for f in t.relax.relaxed]
    for key in _LINE_FIELDS:
        val, st = getattr(t, key)
        lines.append(f"{key} = ({val}, {st})")
    for key in _PROG_FIELDS:
        lines.append(f"{key} = [{', '.join(getattr(t, key))}]")
    if t.schedule is not None:
        lines.append(f"schedule = [{', '.join(t.schedule)}]")
    if t.coherent:
        lines.append("expect coherent")
    lines += [f"expect violation {p}" for p in t.violations]
    lines += [f"expect terminal {a}" for a in t.terminal]
    return "\n".join(lines) + "\n"


# -- running ----------------------------------------------------------------

def _distinct_properties() -> list:
    out = []
    for p in PROPERTIES.values():
        if p not in out:
            out.append(p)
    return out


def run_litmus(t: LitmusTest, lim: Limits | None = None) -> LitmusResult:
    """Run one test.

    Guided tests replay their schedule (a stuck schedule raises
    :class:`ScheduleStuck`) and check expectations along that one trace.
    Exhaustive tests explore every reachable state; ``expect coherent`` needs
    every registered property to hold everywhere, ``expect violation p`` needs
    a reachable state breaking ``p``, and terminal assertions must hold in
    every terminal state.
    """
    cat = t.catalog()
    s0 = t.initial_state()
    props = _distinct_properties() if t.coherent else list(ALL_PROPERTIES[:1])
    props += [get_property(p) for p in t.violations if get_property(p) not in props]
    names = tuple(p.name for p in props)
    res = LitmusResult(t.name, True)

    if t.mode == "guided":
        trace = run_schedule(cat, s0, t.schedule)
        res.trace = trace
        broken = {}
        for p in props:
            first = next((i for i, s in enumerate(trace.states) if not p(s)), None)
            if first is not None:
                broken[p.name] = first
        finals = [trace.final]
    else:
        base = lim or Limits()
        rep = explore(cat, s0, Limits(base.max_states, base.max_depth, names, base.canonical))
        res.report = rep
        if rep.truncated:
            res.passed = False
            res.details.append("exploration truncated")
        broken = {p: len(v) for p, v in rep.verdicts.items() if v is not None}
        for p in t.violations:
            if rep.verdicts.get(p) is not None:
                res.trace = rep.verdicts[p]
                break
        if res.trace is None and broken:
            res.trace = rep.verdicts[next(iter(broken))]
        finals = rep.terminals

    for p in t.violations:
        if p not in broken:
            res.passed = False
            res.details.append(f"expected a {p} violation, none found")
    if t.coherent:
        for p, k in broken.items():
            if p not in t.violations:
                res.passed = False
                res.details.append(f"{p} violated after {k} steps")
    for a in t.terminal:
        bad = [s for s in finals if not a.check(s)]
        if bad:
            res.passed = False
            res.details.append(f"terminal {a.path} is {field_text(bad[0], a.path)}, "
                               f"expected {a.expected}")
    return res


# -- built-in suite ---------------------------------------------------------

def builtin_paths() -> list:
    root = resources.files("cxlcache") / "litmus"
    return sorted((p for p in root.iterdir() if p.name.endswith(".lit")), key=lambda p: p.name)


def builtin_suite() -> list:
    return [parse_litmus(p.read_text()) for p in builtin_paths()]


def builtin(name: str) -> LitmusTest:
    for t in builtin_suite():
        if t.name == name:
            return t
    raise KeyError(name)


def builtin_reachable(catalog, props=("swmr",), lim: Limits | None = None) -> list:
    """Explore every built-in initial state under ``catalog``.

    Returns the exploration reports; their ``depths`` keys together form the
    reachable-state union used as a state source for the preservation matrix.
    """
    base = lim or Limits()
    seen, reports = set(), []
    for t in builtin_suite():
        s0 = t.initial_state()
        if s0 in seen:
            continue
        seen.add(s0)
        reports.append(explore(catalog, s0,
                               Limits(base.max_states, base.max_depth, tuple(props),
                                      base.canonical)))
    return reports


def reachable_matrix(catalog, props, lim: Limits | None = None) -> MatrixReport:
    """Preservation matrix over the union of built-in reachable states.

    Failing cells get a trace from their scenario's initial state to the
    witness pre-state, so the path that led there can be inspected.
    """
    owner = {}
    for rep in builtin_reachable(catalog, props=(), lim=lim):
        for k in rep.depths:
            owner.setdefault(k, rep)
    m = matrix_check(catalog, props, owner)
    for key, (pre, _) in m.failures.items():
        m.traces[key] = owner[pre].trace_to(pre)
    return m
