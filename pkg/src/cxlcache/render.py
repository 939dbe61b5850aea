"""Text renderings of traces: aligned tables, markdown, message sequence charts."""

from __future__ import annotations

import json
from functools import lru_cache

from .engine import Trace
from .invariants import swmr
from .protocol import CHANNELS, FIELD_NAMES, HtdReq, SystemState
from .rules import build_catalog

# left device, host, right device; the order tables use for columns
COLUMN_ORDER = (
    "dprog1", "devcache1",
    "dthreq1", "dthrsp1", "dthdata1", "htdreq1", "htdrsp1", "htddata1", "dbuffer1",
    "hcache",
    "dthreq2", "dthrsp2", "dthdata2", "htdreq2", "htdrsp2", "htddata2", "dbuffer2",
    "devcache2", "dprog2",
    "counter",
)
assert set(COLUMN_ORDER) == set(FIELD_NAMES)

FORMATS = ("json", "table", "msc", "markdown")
BOTTOM = "⊥"


def field_text(s: SystemState, path: str) -> str:
    """Display form of a field, or of ``.state`` / ``.val`` of a cache line."""
    name, _, sub = path.partition(".")
    v = getattr(s, name)
    if sub:
        return str(getattr(v, sub))
    if name.startswith("dprog") or name in CHANNELS:
        return "[" + ", ".join(map(str, v)) + "]"
    if name.startswith("dbuffer"):
        return BOTTOM if v is None else str(v)
    return str(v)


def changed_fields(t: Trace) -> list:
    states = t.states
    return [f for f in COLUMN_ORDER
            if any(getattr(a, f) != getattr(b, f) for a, b in zip(states, states[1:]))]


def _rows(t: Trace, fields: list) -> list:
    if not t.steps:
        return []
    rows = [["(initial state)"] + [field_text(t.initial, f) for f in fields]]
    for name, s in t.steps:
        rows.append([name] + [field_text(s, f) for f in fields])
    return rows


def _columns(t: Trace, all_fields: bool, fields) -> list:
    if fields is not None:
        return list(fields)
    return list(COLUMN_ORDER) if all_fields else changed_fields(t)


def render_table(t: Trace, all_fields: bool = False, fields=None) -> str:
    cols = _columns(t, all_fields, fields)
    head = ["transition rule"] + cols
    rows = _rows(t, cols)
    widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]

    def line(r):
        return "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()

    out = [line(head), "  ".join("-" * w for w in widths)]
    out += [line(r) for r in rows]
    return "\n".join(out)


def render_markdown(t: Trace, all_fields: bool = False, fields=None) -> str:
    cols = _columns(t, all_fields, fields)
    out = ["| transition rule | " + " | ".join(cols) + " |",
           "|---|" + "---|" * len(cols)]
    for r in _rows(t, cols):
        out.append("| " + " | ".join(c.replace("|", "\\|") for c in r) + " |")
    return "\n".join(out)


def render_json(t: Trace) -> str:
    return json.dumps(t.to_json(), indent=2)


# -- message sequence chart -----------------------------------------------

_W = 34


def _events(pre: SystemState, post: SystemState) -> list:
    """(actor column, text) pairs for messages consumed and produced in one step."""
    out = []
    for ch in CHANNELS:
        a, b = getattr(pre, ch), getattr(post, ch)
        if a == b:
            continue
        dev = int(ch[-1])
        to_host = ch.startswith("dth")
        label = ch[:-1]
        # consumption pops from the front, production appends at the back
        if b[: len(a)] == a:
            consumed, produced = (), b[len(a):]
        elif a[1:] == b[: len(a) - 1]:
            consumed, produced = a[:1], b[len(a) - 1:]
        else:
            consumed, produced = a, b
        sender = "host" if not to_host else f"device{dev}"
        receiver = f"device{dev}" if not to_host else "host"
        for m in consumed:
            out.append((receiver, f"recv {label} {m}"))
        for m in produced:
            arrow = "-->" if (sender == "device1" or receiver == "device2") else "<--"
            out.append((sender, f"{arrow} {label} {m}"))
    return out


def _put(col: str, text: str) -> str:
    idx = {"device1": 0, "host": 1, "device2": 2}[col]
    cells = ["", "", ""]
    cells[idx] = text
    return "".join(c.ljust(_W) for c in cells).rstrip()


@lru_cache(maxsize=1)
def _host_side() -> dict:
    return {r.name: r.host_side for r in build_catalog()}


def _actor(rule: str) -> str:
    return "host" if _host_side().get(rule, False) else f"device{rule[-1]}"


def render_msc(t: Trace) -> str:
    """Three lanes (device1, host, device2), one line per send or receive.

    Steps where a device takes a snoop while an H2D response is still queued
    for it are flagged, as are the first states that break SWMR.
    """
    out = ["device1".ljust(_W) + "host".ljust(_W) + "device2", "-" * (3 * _W - 2)]
    prev = t.initial
    reported = not swmr(prev)
    for name, s in t.steps:
        actor = _actor(name)
        out.append(_put(actor, f"[{name}]"))
        for col, text in _events(prev, s):
            out.append(_put(col, "  " + text))
        dev = name[-1]
        for d in ("1", "2"):
            a, b = getattr(prev, f"devcache{d}"), getattr(s, f"devcache{d}")
            if a.state != b.state:
                out.append(_put(f"device{d}", f"  {a.state} => {b.state}"))
        if prev.hcache.state != s.hcache.state:
            out.append(_put("host", f"  {prev.hcache.state} => {s.hcache.state}"))
        pending = getattr(prev, f"htdrsp{dev}")
        took = getattr(s, f"dbuffer{dev}")
        if (isinstance(took, HtdReq) and pending and getattr(prev, f"htdreq{dev}")
                and getattr(s, f"htdreq{dev}") != getattr(prev, f"htdreq{dev}")):
            out.append(_put(f"device{dev}",
                            f"  !! {took.kind} taken ahead of pending {pending[0]}"))
        if not reported and not swmr(s):
            out.append(_put("host", "  !! SWMR violated"))
            reported = True
        prev = s
    return "\n".join(out)


def render_trace(t: Trace, fmt: str = "table", all_fields: bool = False) -> str:
    if fmt == "table":
        return render_table(t, all_fields)
    if fmt == "markdown":
        return render_markdown(t, all_fields)
    if fmt == "msc":
        return render_msc(t)
    if fmt == "json":
        return render_json(t)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
