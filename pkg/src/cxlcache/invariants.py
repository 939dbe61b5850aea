"""Coherence properties and the rule-by-property preservation matrix.

``swmr`` is the target property.  The other four predicates are conjuncts of
a strengthened invariant; each is checked in both device orientations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import UnknownProperty
from .protocol import CHANNELS, DeviceState as D, DthRespKind, HtdReqKind, SystemState, state_to_json
from .rules import RuleCatalog, successors

_READ_OR_WRITE = (D.SH, D.EM)


def swmr(s: SystemState) -> bool:
    a, b = s.devcache1.state, s.devcache2.state
    return not ((a is D.EM and b in _READ_OR_WRITE) or (b is D.EM and a in _READ_OR_WRITE))


_ALMOST_VALID = (D.ISD, D.IMD, D.SMD, D.ISA, D.IMA, D.SMA, D.SH, D.EM)
_AWAITING_BOTH = (D.ISAD, D.IMAD, D.SMAD)


def _transient_swmr_one(me, my_rsp, other, other_req, other_rsp, other_data) -> bool:
    upgrading = me in (D.IMD, D.SMD) or (me in (D.IMAD, D.SMAD) and bool(my_rsp))
    if not upgrading:
        return True
    if other_req and other_req[0].kind is HtdReqKind.SnpInv:
        return True
    return (other not in _ALMOST_VALID
            and not other_data
            and (other not in _AWAITING_BOTH or not other_rsp))


def conjunct_transient_swmr(s: SystemState) -> bool:
    """A device about to become the writer excludes valid copies elsewhere,
    unless an invalidating snoop is already queued for the other device."""
    return (
        _transient_swmr_one(s.devcache1.state, s.htdrsp1, s.devcache2.state,
                            s.htdreq2, s.htdrsp2, s.htddata2)
        and _transient_swmr_one(s.devcache2.state, s.htdrsp2, s.devcache1.state,
                                s.htdreq1, s.htdrsp1, s.htddata1)
    )


_INVALIDATING = (DthRespKind.RspIFwdM, DthRespKind.RspIHitSE)
_HONEST = (D.I, D.ISDI, D.ISAD, D.IMAD, D.IIA)


def conjunct_honest_snoop(s: SystemState) -> bool:
    for rsp, line in ((s.dthrsp1, s.devcache1), (s.dthrsp2, s.devcache2)):
        if rsp and rsp[0].kind in _INVALIDATING and line.state not in _HONEST:
            return False
    return True


def conjunct_singleton_channels(s: SystemState) -> bool:
    return all(len(getattr(s, ch)) <= 1 for ch in CHANNELS)


def conjunct_data_no_conflict(s: SystemState) -> bool:
    return (not s.dthdata1 or not s.htddata2) and (not s.dthdata2 or not s.htddata1)


@dataclass(frozen=True)
class PropertyDef:
    name: str
    predicate: Callable[[SystemState], bool]
    anchor: str = ""

    def __call__(self, s: SystemState) -> bool:
        return self.predicate(s)


PROPERTIES: dict = {}


def register(prop: PropertyDef, *aliases: str) -> PropertyDef:
    PROPERTIES[prop.name] = prop
    for a in aliases:
        PROPERTIES[a] = prop
    return prop


SWMR = register(PropertyDef("swmr", swmr, "at most one writer, never alongside a reader"))
TRANSIENT_SWMR = register(
    PropertyDef("transient_swmr", conjunct_transient_swmr,
                "an upgrading device excludes valid copies elsewhere unless a SnpInv is queued"),
    "conjunct_transient_swmr")
HONEST_SNOOP = register(
    PropertyDef("honest_snoop", conjunct_honest_snoop,
                "invalidating snoop replies only come from lines holding no copy"),
    "conjunct_honest_snoop")
SINGLETON_CHANNELS = register(
    PropertyDef("singleton_channels", conjunct_singleton_channels,
                "every channel holds at most one message"),
    "conjunct_singleton_channels")
DATA_NO_CONFLICT = register(
    PropertyDef("data_no_conflict", conjunct_data_no_conflict,
                "no D2H data from one device while H2D data waits for the other"),
    "conjunct_data_no_conflict")

CONJUNCTS = (TRANSIENT_SWMR, HONEST_SNOOP, SINGLETON_CHANNELS, DATA_NO_CONFLICT)
ALL_PROPERTIES = (SWMR,) + CONJUNCTS


def get_property(name: str) -> PropertyDef:
    try:
        return PROPERTIES[name]
    except KeyError:
        raise UnknownProperty(name) from None


def resolve(props) -> tuple:
    return tuple(p if isinstance(p, PropertyDef) else get_property(p) for p in props)


# -- preservation matrix ----------------------------------------------------

@dataclass
class MatrixReport:
    """Outcome per (rule, property) cell.

    A cell maps to ``None`` when no checked transition broke the property, or
    to ``(pre, post)`` for the first transition that did.  ``fired`` counts how
    many checked transitions each rule contributed, so untested rows show up.
    """

    rules: list
    properties: list
    cells: dict = field(default_factory=dict)
    fired: dict = field(default_factory=dict)
    states_checked: int = 0
    # optional: for a failing cell, a trace from some initial state to its pre-state
    traces: dict = field(default_factory=dict)

    @property
    def failures(self) -> dict:
        return {k: v for k, v in self.cells.items() if v is not None}

    @property
    def all_pass(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "states_checked": self.states_checked,
            "properties": self.properties,
            "rules": [
                {
                    "rule": r,
                    "fired": self.fired.get(r, 0),
                    "cells": {
                        p: "pass" if self.cells[(r, p)] is None else {
                            "fail": self._witness_json((r, p))
                        }
                        for p in self.properties
                    },
                }
                for r in self.rules
            ],
        }

    def _witness_json(self, key) -> dict:
        pre, post = self.cells[key]
        out = {"pre": state_to_json(pre), "post": state_to_json(post)}
        if key in self.traces:
            out["path"] = self.traces[key].rules
        return out

    def to_markdown(self, only_fired: bool = False) -> str:
        head = "| rule | fired | " + " | ".join(self.properties) + " |"
        sep = "|---|---:|" + "---|" * len(self.properties)
        rows = [head, sep]
        for r in self.rules:
            n = self.fired.get(r, 0)
            if only_fired and not n:
                continue
            marks = ["FAIL" if self.cells[(r, p)] is not None else "ok" for p in self.properties]
            rows.append(f"| {r} | {n} | " + " | ".join(marks) + " |")
        rows.append("")
        rows.append(f"states checked: {self.states_checked}; failing cells: {len(self.failures)}")
        for (r, p), (pre, post) in self.failures.items():
            rows.append("")
            rows.append(f"- {r} breaks {p}: {pre.devcache1} / {pre.hcache} / {pre.devcache2}"
                        f" -> {post.devcache1} / {post.hcache} / {post.devcache2}")
            if (r, p) in self.traces:
                rows.append(f"  reached by: {', '.join(self.traces[(r, p)].rules) or '(initial)'}")
        return "\n".join(rows)


def matrix_check(c: RuleCatalog, props, states: Iterable[SystemState]) -> MatrixReport:
    """For every source state satisfying all ``props``, fire each enabled rule
    and check each property on the successor.

    This tests preservation on the supplied states only; it is not a proof
    over all states.
    """
    props = resolve(props)
    names = [p.name for p in props]
    report = MatrixReport([r.name for r in c], names)
    report.cells = {(r.name, p): None for r in c for p in names}
    for s in states:
        if not all(p(s) for p in props):
            continue
        report.states_checked += 1
        for r, nxt in successors(c, s):
            report.fired[r.name] = report.fired.get(r.name, 0) + 1
            for p in props:
                key = (r.name, p.name)
                if report.cells[key] is None and not p(nxt):
                    report.cells[key] = (s, nxt)
    return report
