"""Exhaustive breadth-first reachability with shortest counterexamples."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .engine import Trace, run_schedule
from .invariants import SINGLETON_CHANNELS, resolve
from .protocol import SystemState, canonical_utids
from .rules import RuleCatalog, apply_rule, guard_holds, successors


@dataclass(frozen=True)
class Limits:
    max_states: int = 10_000_000
    max_depth: int | None = None
    properties: tuple = ("swmr",)
    # dedup states up to UTID relabeling; without it a snoop livelock that
    # keeps reissuing requests makes the counter, and so the space, unbounded
    canonical: bool = True

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")


@dataclass
class ExploreReport:
    reachable_count: int = 0
    terminal_count: int = 0
    depth_reached: int = 0
    verdicts: dict = field(default_factory=dict)  # property -> None (holds) or Trace
    truncated: bool = False
    # not serialised: every discovered state key with its BFS depth, the parent
    # map over keys, and the concrete terminal states
    depths: dict = field(default_factory=dict, repr=False)
    parents: dict = field(default_factory=dict, repr=False)
    terminals: list = field(default_factory=list, repr=False)
    initial: SystemState | None = field(default=None, repr=False)
    catalog: RuleCatalog | None = field(default=None, repr=False)  # set when keys are relabeled

    @property
    def holds(self) -> bool:
        return all(v is None for v in self.verdicts.values())

    def violation(self, prop: str):
        return self.verdicts.get(prop)

    def trace_to(self, s: SystemState) -> Trace:
        """Shortest trace from the initial state to the discovered state ``s``.

        With UTID relabeling on, ``s`` is a representative; the trace is
        replayed from the concrete initial state, so its final state equals
        ``s`` up to relabeling.
        """
        return _witness(self.parents, s, self.catalog, self.initial)

    def slice(self, depth: int) -> set:
        return {s for s, d in self.depths.items() if d <= depth}

    def to_json(self) -> dict:
        return {
            "reachableCount": self.reachable_count,
            "terminalCount": self.terminal_count,
            "depthReached": self.depth_reached,
            "truncated": self.truncated,
            "verdicts": {
                p: "holds" if t is None else {"violation": t.to_json()}
                for p, t in self.verdicts.items()
            },
        }


def _witness(parents: dict, s: SystemState, c=None, initial=None) -> Trace:
    steps = []
    while parents[s] is not None:
        prev, name = parents[s]
        steps.append((name, s))
        s = prev
    if c is not None:
        # keys may be relabeled; re-fire the rules from the concrete start
        return run_schedule(c, initial, [n for n, _ in reversed(steps)])
    return Trace(s, tuple(reversed(steps)))


def explore(c: RuleCatalog, s0: SystemState, lim: Limits | None = None,
            stop_at_first: bool = False) -> ExploreReport:
    """Breadth-first search over all enabled rules from ``s0``.

    Every newly discovered state is checked against ``lim.properties``; the
    first violation found for a property is kept, which by BFS layering is a
    shortest one.  States breaking the singleton-channel conjunct are reported
    and not expanded.
    """
    lim = lim or Limits()
    props = resolve(lim.properties)
    report = ExploreReport(verdicts={p.name: None for p in props}, initial=s0,
                           catalog=c if lim.canonical else None)
    key = canonical_utids if lim.canonical else (lambda s: s)
    root = key(s0)
    parents = {root: None}
    depths = {root: 0}
    report.parents, report.depths = parents, depths

    def check(k, s):
        bad = False
        for p in props:
            if report.verdicts[p.name] is None and not p(s):
                report.verdicts[p.name] = report.trace_to(k)
                bad = True
        if not SINGLETON_CHANNELS(s):
            if report.verdicts.get(SINGLETON_CHANNELS.name) is None:
                report.verdicts[SINGLETON_CHANNELS.name] = report.trace_to(k)
            return bad, False
        return bad, True

    # the queue holds concrete states, the visited map their keys
    bad, expand = check(root, s0)
    queue = deque([(root, s0)] if expand else [])
    done = stop_at_first and bad
    while queue and not done:
        k, s = queue.popleft()
        d = depths[k]
        if lim.max_depth is not None and d >= lim.max_depth:
            if not report.truncated and any(key(n) not in parents for _, n in successors(c, s)):
                report.truncated = True
            continue
        any_enabled = False
        for r, nxt in successors(c, s):
            any_enabled = True
            nk = key(nxt)
            if nk in parents:
                continue
            if len(parents) >= lim.max_states:
                report.truncated = True
                done = True
                break
            parents[nk] = (k, r.name)
            depths[nk] = d + 1
            bad, expand = check(nk, nxt)
            if stop_at_first and bad:
                done = True
                break
            if expand:
                queue.append((nk, nxt))
        if not any_enabled:
            report.terminal_count += 1
            report.terminals.append(s)

    report.reachable_count = len(parents)
    report.depth_reached = max(depths.values())
    return report


def find_violation(c: RuleCatalog, s0: SystemState, prop: str,
                   lim: Limits | None = None) -> Trace | None:
    """Shortest trace from ``s0`` to a state violating ``prop``, if any."""
    lim = lim or Limits()
    (p,) = resolve([prop])
    rep = explore(c, s0, Limits(lim.max_states, lim.max_depth, (p.name,), lim.canonical),
                  stop_at_first=True)
    return rep.verdicts[p.name]


def enumerate_oracle(c: RuleCatalog, s0: SystemState, depth: int) -> set:
    """States reachable in at most ``depth`` steps by plain recursive expansion.

    No visited set is kept while recursing; duplicates collapse only in the
    result set.  Exponential, meant for small depths as a cross-check of BFS.
    """
    out = set()

    def expand(s, k):
        out.add(s)
        if k == 0:
            return
        for r in c.rules:
            if guard_holds(r, s):
                expand(apply_rule(r, s), k - 1)

    expand(s0, depth)
    return out
