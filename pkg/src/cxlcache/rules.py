"""Guarded transition rules for the two-device CXL.cache model.

Each rule is a conjunction of guards plus a set of effects that are applied
atomically: every effect reads the pre-state, then all written fields are
replaced at once.  Rules are written once, parametric in the requesting
device ``d`` and the other device ``o``, and instantiated for d = 1 and d = 2.
Host-side rules carry the suffix of the device whose transaction they serve.

Three guard conjuncts come from ordering restrictions in the standard and are
tagged so they can be dropped:

``snoop_pushes_go``
    a device may not process a snoop while an H2D response is queued for it.
``go_cannot_tailgate``
    the host may not send a GO to a device while a snoop to it, or that
    snoop's response or writeback data, is outstanding.
``one_snoop_per_addr``
    the host may not send a snoop to a device that still has an unanswered one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from operator import attrgetter
from typing import Callable

from .errors import RuleNotEnabled, UnknownRule
from .protocol import (
    Data,
    DevLine,
    DeviceState as D,
    DthReq,
    DthReqKind as Rq,
    DthResp,
    DthRespKind as Rs,
    HostLine,
    HostState as H,
    HtdReq,
    HtdReqKind as Snp,
    HtdResp,
    HtdRespKind as Go,
    Instruction,
    SystemState,
)

RELAX_FLAGS = ("snoop_pushes_go", "go_cannot_tailgate", "one_snoop_per_addr")

# perfect tracking: device states the host treats as holding no copy
_NO_COPY = (D.I, D.IIA)
_HOST_STABLE = (H.I, H.SH, H.EM)


class Family(str, Enum):
    InstrIssue = "InstrIssue"
    LocalHit = "LocalHit"
    HostD2HReq = "HostD2HReq"
    DeviceSnoop = "DeviceSnoop"
    DeviceH2DResp = "DeviceH2DResp"
    HostD2HResp = "HostD2HResp"
    HostData = "HostData"
    DeviceData = "DeviceData"


@dataclass(frozen=True)
class RelaxConfig:
    """Which ordering restrictions are enforced (True) or dropped (False)."""

    snoop_pushes_go: bool = True
    go_cannot_tailgate: bool = True
    one_snoop_per_addr: bool = True

    @classmethod
    def relaxing(cls, *flags: str) -> "RelaxConfig":
        for f in flags:
            if f not in RELAX_FLAGS:
                raise ValueError(f"unknown relaxation flag {f!r}; expected one of {RELAX_FLAGS}")
        return cls(**{f: False for f in flags})

    @property
    def relaxed(self) -> tuple:
        return tuple(f for f in RELAX_FLAGS if not getattr(self, f))

    @property
    def faithful(self) -> bool:
        return not self.relaxed


@dataclass(frozen=True)
class Guard:
    text: str
    test: Callable[[SystemState], bool]
    relax: str | None = None


@dataclass(frozen=True)
class Effect:
    text: str
    field: str
    compute: Callable[[SystemState], object]


@dataclass(frozen=True)
class Rule:
    id: int
    name: str
    device: int
    host_side: bool
    family: Family
    guards: tuple
    effects: tuple
    dropped: tuple = ()
    tracking: bool = False
    anchor: str | None = None
    _tests: tuple = field(default=(), repr=False, compare=False)

    @property
    def relaxable_guards(self) -> frozenset:
        return frozenset(g.relax for g in self.guards + self.dropped if g.relax)

    @property
    def writes(self) -> frozenset:
        return frozenset(e.field for e in self.effects)


@dataclass(frozen=True)
class RuleCatalog:
    rules: tuple
    config: RelaxConfig
    store_value: int = 42

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {r.name: r for r in self.rules})

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def get(self, name: str) -> Rule:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownRule(name) from None

    @property
    def names(self) -> list:
        return [r.name for r in self.rules]


def guard_holds(r: Rule, s: SystemState) -> bool:
    for t in r._tests:
        if not t(s):
            return False
    return True


def apply_rule(r: Rule, s: SystemState) -> SystemState:
    if not guard_holds(r, s):
        raise RuleNotEnabled(r.name)
    return _fire(r, s)


def _fire(r: Rule, s: SystemState) -> SystemState:
    return replace(s, **{e.field: e.compute(s) for e in r.effects})


def enabled_rules(c: RuleCatalog, s: SystemState) -> list:
    return [r.id for r in c.rules if guard_holds(r, s)]


def successors(c: RuleCatalog, s: SystemState):
    """Yield ``(rule, next_state)`` for every enabled rule, by ascending id."""
    for r in c.rules:
        if guard_holds(r, s):
            yield r, _fire(r, s)


# -- guard and effect builders --------------------------------------------

def state_is(fld: str, *states) -> Guard:
    get = attrgetter(fld)
    if len(states) == 1:
        st = states[0]
        return Guard(f"{fld}.state = {st}", lambda s: get(s).state is st)
    names = ", ".join(map(str, states))
    return Guard(f"{fld}.state ∈ {{{names}}}", lambda s: get(s).state in states)


def state_not(fld: str, *states) -> Guard:
    get = attrgetter(fld)
    names = ", ".join(map(str, states))
    return Guard(f"{fld}.state ∉ {{{names}}}", lambda s: get(s).state not in states)


def head_is(fld: str, *kinds) -> Guard:
    get = attrgetter(fld)
    names = " | ".join(map(str, kinds))
    if fld.startswith("dprog"):
        return Guard(f"head({fld}) = {names}", lambda s: bool(get(s)) and get(s)[0] in kinds)
    return Guard(f"head({fld}) = ({names}, utid)",
                 lambda s: bool(get(s)) and get(s)[0].kind in kinds)


def nonempty(fld: str) -> Guard:
    get = attrgetter(fld)
    return Guard(f"{fld} ≠ []", lambda s: bool(get(s)))


def empty(*flds: str, relax: str | None = None) -> Guard:
    gets = [attrgetter(f) for f in flds]
    text = " = ".join(flds) + " = []"
    return Guard(text, lambda s: not any(g(s) for g in gets), relax)


def same_utid(a: str, b: str) -> Guard:
    ga, gb = attrgetter(a), attrgetter(b)
    return Guard(f"head({a}).utid = head({b}).utid", lambda s: ga(s)[0].utid == gb(s)[0].utid)


def pop(fld: str) -> Effect:
    get = attrgetter(fld)
    return Effect(f"{fld} := tail({fld})", fld, lambda s: get(s)[1:])


def push(fld: str, text: str, make) -> Effect:
    get = attrgetter(fld)
    return Effect(f"{fld} := {fld} @ [{text}]", fld, lambda s: get(s) + (make(s),))


def dev_to(fld: str, state=None, val=None, text=None) -> Effect:
    """Set a device line's state (fixed or computed) and optionally its value."""
    get = attrgetter(fld)
    parts = []
    if state is not None:
        parts.append(f"{fld}.state := {text or state}")
    if val is not None:
        parts.append(f"{fld}.val := {val[0]}")

    def compute(s):
        line = get(s)
        st = state(s) if callable(state) else (line.state if state is None else state)
        v = line.val if val is None else val[1](s)
        return DevLine(v, st)

    return Effect(", ".join(parts), fld, compute)


def host_to(state, val=None) -> Effect:
    parts = [f"hcache.state := {state}"]
    if val is not None:
        parts.append(f"hcache.val := {val[0]}")

    def compute(s):
        v = s.hcache.val if val is None else val[1](s)
        return HostLine(v, state)

    return Effect(", ".join(parts), "hcache", compute)


def set_buffer(fld: str, text: str, make) -> Effect:
    return Effect(f"{fld} := {text}", fld, make)


def clear_buffer(fld: str) -> Effect:
    return Effect(f"{fld} := ⊥", fld, lambda s: None)


def bump() -> Effect:
    return Effect("counter := counter + 1", "counter", lambda s: s.counter + 1)


# -- the rules ------------------------------------------------------------

@dataclass
class _Template:
    base: str
    family: Family
    guards: list
    effects: list
    host_side: bool = False
    tracking: bool = False
    anchor: str | None = None


def _rules_for(d: int, o: int, store_value: int) -> list:
    P, C, B = f"dprog{d}", f"devcache{d}", f"dbuffer{d}"
    RQ, RS, DD = f"dthreq{d}", f"dthrsp{d}", f"dthdata{d}"
    HQ, HR, HD = f"htdreq{d}", f"htdrsp{d}", f"htddata{d}"
    oC = f"devcache{o}"
    oRS, oDD, oHQ = f"dthrsp{o}", f"dthdata{o}", f"htdreq{o}"

    g = {n: attrgetter(n) for n in (C, RQ, RS, DD, HQ, HR, HD, oRS, oDD)}
    cval = lambda s: g[C](s).val  # noqa: E731
    hd = lambda n: (lambda s: g[n](s)[0])  # noqa: E731
    utid_of = lambda n: (lambda s: g[n](s)[0].utid)  # noqa: E731

    spg = empty(HR, relax="snoop_pushes_go")
    # GO to device d only once every snoop exchange with d has drained
    tailgate = empty(HQ, RS, DD, relax="go_cannot_tailgate")
    one_snoop = empty(oHQ, oRS, oDD, relax="one_snoop_per_addr")
    SNP_HEAD = (f"head({HQ})", lambda s: g[HQ](s)[0])

    templates: list[_Template] = []

    def add(*args, **kw):
        templates.append(_Template(*args, **kw))

    # ---- instruction issue and local hits
    def issue(base, st, instr, kind, new_state, utid_expr, offset, anchor=None):
        add(base, Family.InstrIssue,
            [state_is(C, st), head_is(P, instr)],
            [push(RQ, f"({kind}, {utid_expr})", lambda s: DthReq(kind, s.counter + offset)),
             dev_to(C, new_state),
             bump()],
            anchor=anchor)

    issue("InvalidLoad", D.I, Instruction.Load, Rq.RdShared, D.ISAD, "counter", 0,
          anchor="worked example")
    issue("InvalidStore", D.I, Instruction.Store, Rq.RdOwn, D.IMAD, "counter", 0,
          anchor="snoop_pushes_go_test trace")
    issue("SharedStore", D.SH, Instruction.Store, Rq.RdOwn, D.SMAD, "counter", 0)
    # evict requests carry the post-increment counter, as in the eviction tables
    issue("SharedEvict", D.SH, Instruction.Evict, Rq.CleanEvict, D.SIA, "counter + 1", 1,
          anchor="clean_evict_test trace")
    issue("SharedEvictNoData", D.SH, Instruction.Evict, Rq.CleanEvictNoData, D.SIAC,
          "counter + 1", 1)
    issue("ModifiedEvict", D.EM, Instruction.Evict, Rq.DirtyEvict, D.MIA, "counter + 1", 1,
          anchor="dirty_evict_test trace")

    def hit(base, st, instr, store=False, anchor=None):
        eff = [dev_to(C, val=("v", lambda s: store_value))] if store else []
        eff += [pop(P), clear_buffer(B), bump()]
        add(base, Family.LocalHit, [state_is(C, st), head_is(P, instr)], eff, anchor=anchor)

    hit("SharedLoad", D.SH, Instruction.Load)
    hit("ModifiedLoad", D.EM, Instruction.Load)
    hit("ModifiedStore", D.EM, Instruction.Store, store=True, anchor="worked example")

    # ---- device handling of snoops
    def snoop(base, st, kind, rsp, new_state=None, forward=False, anchor=None):
        eff = []
        if new_state is not None:
            eff.append(dev_to(C, new_state))
        eff += [pop(HQ),
                set_buffer(B, SNP_HEAD[0], SNP_HEAD[1]),
                push(RS, f"({rsp}, u)", lambda s: DthResp(rsp, g[HQ](s)[0].utid))]
        if forward:
            eff.append(push(DD, f"(u, {C}.val)", lambda s: Data(g[HQ](s)[0].utid, cval(s))))
        add(base, Family.DeviceSnoop, [state_is(C, st), head_is(HQ, kind), spg], eff,
            anchor=anchor)

    snoop("SharedSnpInv", D.SH, Snp.SnpInv, Rs.RspIHitSE, D.I, anchor="worked example")
    snoop("ModifiedSnpInv", D.EM, Snp.SnpInv, Rs.RspIFwdM, D.I, forward=True)
    snoop("ModifiedSnpData", D.EM, Snp.SnpData, Rs.RspSFwdM, D.SH, forward=True)
    snoop("MIASnpInv", D.MIA, Snp.SnpInv, Rs.RspIFwdM, D.IIA, forward=True)
    snoop("MIASnpData", D.MIA, Snp.SnpData, Rs.RspIFwdM, D.IIA, forward=True)
    snoop("SIASnpInv", D.SIA, Snp.SnpInv, Rs.RspIHitSE, D.IIA)
    snoop("SIACSnpInv", D.SIAC, Snp.SnpInv, Rs.RspIHitSE, D.IIA)
    snoop("SMADSnpInv", D.SMAD, Snp.SnpInv, Rs.RspIHitSE, D.IMAD)
    snoop("ISADSnpInv", D.ISAD, Snp.SnpInv, Rs.RspIHitI, anchor="snoop_pushes_go_test trace")
    snoop("IMADSnpInv", D.IMAD, Snp.SnpInv, Rs.RspIHitI)
    snoop("InvalidSnpInv", D.I, Snp.SnpInv, Rs.RspIHitI)

    # ---- device handling of GO responses
    go_state = lambda s: g[HR](s)[0].state  # noqa: E731
    data_val = ("data.val", lambda s: g[HD](s)[0].val)

    def go_half(base, st, mid):
        add(base, Family.DeviceH2DResp, [state_is(C, st), head_is(HR, Go.GO)],
            [dev_to(C, mid), pop(HR), set_buffer(B, f"head({HR})", hd(HR))])

    def go_last(base, st):
        add(base, Family.DeviceH2DResp, [state_is(C, st), head_is(HR, Go.GO)],
            [dev_to(C, go_state, text="GO.state"), pop(HR), clear_buffer(B)])

    def go_both(base, st, anchor=None):
        add(base, Family.DeviceH2DResp,
            [state_is(C, st), head_is(HR, Go.GO), nonempty(HD), same_utid(HR, HD)],
            [dev_to(C, go_state, val=data_val, text="GO.state"), pop(HR), pop(HD),
             clear_buffer(B)],
            anchor=anchor)

    for pre, a_state, d_state in (("ISAD", D.ISA, D.ISD), ("IMAD", D.IMA, D.IMD),
                                  ("SMAD", D.SMA, D.SMD)):
        start = D(pre)
        go_half(f"{pre}GO", start, d_state)
        go_last(f"{a_state}GO", a_state)
        anchor = "snoop_pushes_go_test trace" if pre != "SMAD" else None
        go_both(f"{pre}GO+Data", start, anchor=anchor)

    def writepull(base, st, kind, send_data=False, anchor=None):
        eff = [dev_to(C, go_state, text="GO.state"), pop(HR), pop(P), clear_buffer(B)]
        if send_data:
            eff.append(push(DD, f"(u, {C}.val)", lambda s: Data(g[HR](s)[0].utid, cval(s))))
        add(base, Family.DeviceH2DResp, [state_is(C, st), head_is(HR, kind)], eff,
            anchor=anchor)

    writepull("SIA_GO_WritePullDrop", D.SIA, Go.GO_WritePullDrop,
              anchor="clean_evict_test trace")
    writepull("SIAC_GO_WritePullDrop", D.SIAC, Go.GO_WritePullDrop)
    writepull("MIA_GO_WritePull", D.MIA, Go.GO_WritePull, send_data=True,
              anchor="dirty_evict_test trace")
    writepull("IIA_GO_WritePullDrop", D.IIA, Go.GO_WritePullDrop)

    # ---- device handling of data
    def data_in(base, st, new_state, done):
        eff = [dev_to(C, new_state, val=data_val), pop(HD)]
        if done:
            eff.append(clear_buffer(B))
        add(base, Family.DeviceData, [state_is(C, st), nonempty(HD)], eff)

    data_in("ISADData", D.ISAD, D.ISA, False)
    data_in("ISDData", D.ISD, D.SH, True)
    data_in("IMADData", D.IMAD, D.IMA, False)
    data_in("IMDData", D.IMD, D.EM, True)
    data_in("SMADData", D.SMAD, D.SMA, False)
    data_in("SMDData", D.SMD, D.EM, True)

    # ---- host handling of device requests
    hval = ("data.val", lambda s: s.hcache.val)
    req_utid = utid_of(RQ)

    def grant(state):
        return [push(HR, f"(GO, {state}, u)", lambda s: HtdResp(Go.GO, state, req_utid(s))),
                push(HD, "(u, hcache.val)", lambda s: Data(req_utid(s), s.hcache.val))]

    def host_req(base, hstate, kind, guards, effects, tracking=False, anchor=None):
        hstates = hstate if isinstance(hstate, tuple) else (hstate,)
        kinds = kind if isinstance(kind, tuple) else (kind,)
        add(base, Family.HostD2HReq,
            [state_is("hcache", *hstates), head_is(RQ, *kinds)] + guards,
            [pop(RQ)] + effects, host_side=True, tracking=tracking, anchor=anchor)

    host_req("InvalidRdShared", H.I, Rq.RdShared, [tailgate],
             grant(D.SH) + [host_to(H.SH)], anchor="snoop_pushes_go_test trace")
    host_req("SharedRdShared", H.SH, Rq.RdShared, [tailgate], grant(D.SH))
    host_req("ModifiedRdShared", H.EM, Rq.RdShared, [one_snoop],
             [push(oHQ, "(SnpData, u)", lambda s: HtdReq(Snp.SnpData, req_utid(s))),
              host_to(H.SAD)])
    host_req("InvalidRdOwn", H.I, Rq.RdOwn, [tailgate], grant(D.EM) + [host_to(H.EM)])
    host_req("SharedRdOwn", H.SH, Rq.RdOwn, [state_not(oC, *_NO_COPY), one_snoop],
             [push(HD, "(u, hcache.val)", lambda s: Data(req_utid(s), s.hcache.val)),
              push(oHQ, "(SnpInv, u)", lambda s: HtdReq(Snp.SnpInv, req_utid(s))),
              host_to(H.MA)],
             tracking=True, anchor="snoop_pushes_go_test trace")
    host_req("SharedRdOwnLast", H.SH, Rq.RdOwn, [state_is(oC, *_NO_COPY), tailgate],
             grant(D.EM) + [host_to(H.EM)], tracking=True)
    host_req("ModifiedRdOwn", H.EM, Rq.RdOwn, [one_snoop],
             [push(oHQ, "(SnpInv, u)", lambda s: HtdReq(Snp.SnpInv, req_utid(s))),
              host_to(H.MAD)])

    def drop():
        return push(HR, "(GO_WritePullDrop, I, u)",
                    lambda s: HtdResp(Go.GO_WritePullDrop, D.I, req_utid(s)))

    for kind, dev_state, tag in ((Rq.CleanEvict, D.SIA, "CleanEvict"),
                                 (Rq.CleanEvictNoData, D.SIAC, "CleanEvictNoData")):
        anchor = "clean_evict_test trace" if kind is Rq.CleanEvict else None
        host_req(f"Shared_{tag}_NotLastDrop", H.SH, kind,
                 [state_is(C, dev_state), state_not(oC, *_NO_COPY), tailgate],
                 [drop()], tracking=True, anchor=anchor)
        host_req(f"Shared_{tag}_LastDrop", H.SH, kind,
                 [state_is(C, dev_state), state_is(oC, *_NO_COPY), tailgate],
                 [drop(), host_to(H.I)], tracking=True)

    host_req("HostModifiedDirtyEvict", H.EM, Rq.DirtyEvict,
             [state_is(C, D.MIA), empty(HD, RS, relax="go_cannot_tailgate")],
             [host_to(H.ID),
              push(HR, "(GO_WritePull, I, u)",
                   lambda s: HtdResp(Go.GO_WritePull, D.I, req_utid(s))),
              clear_buffer(B)],
             tracking=True, anchor="worked example")
    # the evictor was snooped meanwhile; its copy is stale, so nothing is pulled
    host_req("HostStaleEvictDrop", _HOST_STABLE,
             (Rq.CleanEvict, Rq.CleanEvictNoData, Rq.DirtyEvict),
             [state_is(C, D.IIA), tailgate], [drop()], tracking=True)

    # ---- host handling of snoop responses (from o, on behalf of requester d)
    rsp_utid = utid_of(oRS)

    def host_rsp(base, hstate, kinds, new_state, go=None, anchor=None):
        guards = [state_is("hcache", hstate), head_is(oRS, *kinds)]
        eff = [pop(oRS), host_to(new_state)]
        if go is not None:
            guards.append(tailgate)
            eff.append(push(HR, f"(GO, {go}, u)", lambda s: HtdResp(Go.GO, go, rsp_utid(s))))
        add(base, Family.HostD2HResp, guards, eff, host_side=True, anchor=anchor)

    host_rsp("MARspIHitI", H.MA, (Rs.RspIHitI,), H.EM, go=D.EM,
             anchor="snoop_pushes_go_test trace")
    host_rsp("MARspIHitSE", H.MA, (Rs.RspIHitSE,), H.EM, go=D.EM)
    host_rsp("MARspIFwdM", H.MA, (Rs.RspIFwdM,), H.EM, go=D.EM)
    host_rsp("MADRspIFwdM", H.MAD, (Rs.RspIFwdM,), H.MD)
    host_rsp("SADRspSFwdM", H.SAD, (Rs.RspSFwdM,), H.SD)
    host_rsp("SADRspIFwdM", H.SAD, (Rs.RspIFwdM,), H.SD)
    host_rsp("SARspSFwdM", H.SA, (Rs.RspSFwdM,), H.SH, go=D.SH)
    host_rsp("SARspIFwdM", H.SA, (Rs.RspIFwdM,), H.SH, go=D.SH)

    # ---- host handling of writeback data
    odata = lambda s: g[oDD](s)[0]  # noqa: E731
    fwd_val = ("data.val", lambda s: odata(s).val)

    def host_data(base, hstate, new_state, go=None):
        guards = [state_is("hcache", hstate), nonempty(oDD)]
        eff = [pop(oDD), host_to(new_state, val=fwd_val)]
        if go is not None:
            guards.append(tailgate)
            eff.append(push(HR, f"(GO, {go}, u)",
                            lambda s: HtdResp(Go.GO, go, odata(s).utid)))
        eff.append(push(HD, "(u, data.val)", lambda s: Data(odata(s).utid, odata(s).val)))
        add(base, Family.HostData, guards, eff, host_side=True)

    host_data("MADData", H.MAD, H.MA)
    host_data("MDData", H.MD, H.EM, go=D.EM)
    host_data("SADData", H.SAD, H.SA)
    host_data("SDData", H.SD, H.SH, go=D.SH)
    add("IDData", Family.HostData, [state_is("hcache", H.ID), nonempty(DD)],
        [pop(DD), host_to(H.I, val=("data.val", lambda s: g[DD](s)[0].val))],
        host_side=True, anchor="dirty_evict_test trace")

    return templates


def build_catalog(config: RelaxConfig | None = None, store_value: int = 42) -> RuleCatalog:
    """Instantiate every rule for both devices, dropping relaxed guard conjuncts.

    Rule ids follow definition order, device 1 before device 2 for each rule.
    """
    config = config or RelaxConfig()
    one = _rules_for(1, 2, store_value)
    two = _rules_for(2, 1, store_value)
    rules = []
    for a, b in zip(one, two):
        for d, tpl in ((1, a), (2, b)):
            kept = tuple(g for g in tpl.guards if g.relax is None or getattr(config, g.relax))
            dropped = tuple(g for g in tpl.guards if g not in kept)
            rules.append(Rule(
                id=len(rules),
                name=f"{tpl.base}{d}",
                device=d,
                host_side=tpl.host_side,
                family=tpl.family,
                guards=kept,
                effects=tuple(tpl.effects),
                dropped=dropped,
                tracking=tpl.tracking,
                anchor=tpl.anchor,
                _tests=tuple(g.test for g in kept),
            ))
    return RuleCatalog(tuple(rules), config, store_value)


def catalog_markdown(c: RuleCatalog) -> str:
    """Reference document: one section per rule with guards, tags and actions."""
    relaxed = ", ".join(c.config.relaxed) or "none"
    lines = [
        "# Rule catalog",
        "",
        f"Total rules: {len(c)} ({len(c) // 2} per device).  Relaxed restrictions: {relaxed}.",
        f"Rules relying on perfect tracking: {sum(r.tracking for r in c)}.",
        "",
    ]
    for r in c:
        lines.append(f"## {r.name}")
        lines.append("")
        side = "host" if r.host_side else "device"
        lines.append(f"- id: {r.id}")
        lines.append(f"- family: {r.family.value} ({side}-side, device {r.device})")
        tags = ", ".join(sorted(r.relaxable_guards)) or "none"
        lines.append(f"- relaxable guards: {tags}")
        if r.tracking:
            lines.append("- perfect tracking: reads device cache state from a host guard")
        if r.anchor:
            lines.append(f"- appears in: {r.anchor}")
        lines.append("- guards:")
        for gd in r.guards:
            tag = f"  [{gd.relax}]" if gd.relax else ""
            lines.append(f"  - {gd.text}{tag}")
        for gd in r.dropped:
            lines.append(f"  - ~~{gd.text}~~  [{gd.relax}, relaxed]")
        lines.append("- actions:")
        for e in r.effects:
            lines.append(f"  - {e.text}")
        lines.append("")
    return "\n".join(lines)
