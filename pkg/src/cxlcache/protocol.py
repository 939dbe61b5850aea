"""State model for a two-device, one-line CXL.cache system.

Everything here is an immutable value: messages and cache lines are named
tuples, channels are tuples used as FIFOs, and :class:`SystemState` is a frozen
dataclass.  Transitions build new states with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Union


class DeviceState(str, Enum):
    I = "I"
    SH = "SH"
    EM = "EM"
    IMAD = "IMAD"
    IMA = "IMA"
    IMD = "IMD"
    SMAD = "SMAD"
    SMD = "SMD"
    SMA = "SMA"
    ISD = "ISD"
    ISAD = "ISAD"
    ISA = "ISA"
    MIA = "MIA"
    SIA = "SIA"
    IIA = "IIA"
    SIAC = "SIAC"
    ISDI = "ISDI"

    def __str__(self) -> str:
        return self.value


class HostState(str, Enum):
    I = "I"
    SH = "SH"
    EM = "EM"
    MAD = "MAD"
    MA = "MA"
    MD = "MD"
    SAD = "SAD"
    SD = "SD"
    SA = "SA"
    ID = "ID"
    IB = "IB"
    SB = "SB"
    MB = "MB"

    def __str__(self) -> str:
        return self.value


STABLE = frozenset({"I", "SH", "EM"})


class Instruction(str, Enum):
    Load = "Load"
    Store = "Store"
    Evict = "Evict"

    def __str__(self) -> str:
        return self.value


class DthReqKind(str, Enum):
    RdShared = "RdShared"
    RdOwn = "RdOwn"
    CleanEvict = "CleanEvict"
    DirtyEvict = "DirtyEvict"
    CleanEvictNoData = "CleanEvictNoData"

    def __str__(self) -> str:
        return self.value


class DthRespKind(str, Enum):
    RspIHitSE = "RspIHitSE"
    RspIFwdM = "RspIFwdM"
    RspSFwdM = "RspSFwdM"
    RspIHitI = "RspIHitI"

    def __str__(self) -> str:
        return self.value


class HtdReqKind(str, Enum):
    SnpData = "SnpData"
    SnpInv = "SnpInv"

    def __str__(self) -> str:
        return self.value


class HtdRespKind(str, Enum):
    GO = "GO"
    GO_WritePull = "GO_WritePull"
    GO_WritePullDrop = "GO_WritePullDrop"

    def __str__(self) -> str:
        return self.value


DEFAULT_VALUES = (-1, 0, 1, 42)


class DevLine(NamedTuple):
    val: int
    state: DeviceState

    def __str__(self) -> str:
        return f"({self.val}, {self.state})"


class HostLine(NamedTuple):
    val: int
    state: HostState

    def __str__(self) -> str:
        return f"({self.val}, {self.state})"


class DthReq(NamedTuple):
    kind: DthReqKind
    utid: int

    def __str__(self) -> str:
        return f"({self.kind}, {self.utid})"


class DthResp(NamedTuple):
    kind: DthRespKind
    utid: int

    def __str__(self) -> str:
        return f"({self.kind}, {self.utid})"


class HtdReq(NamedTuple):
    kind: HtdReqKind
    utid: int

    def __str__(self) -> str:
        return f"({self.kind}, {self.utid})"


class HtdResp(NamedTuple):
    kind: HtdRespKind
    state: DeviceState
    utid: int

    def __str__(self) -> str:
        # write-pull responses always carry I; tables print them without it
        if self.kind is HtdRespKind.GO:
            return f"({self.kind}, {self.state}, {self.utid})"
        return f"({self.kind}, {self.utid})"


class Data(NamedTuple):
    utid: int
    val: int

    def __str__(self) -> str:
        return f"(Data({self.val}), {self.utid})"


Buffer = Optional[Union[HtdReq, HtdResp]]


@dataclass(frozen=True)
class SystemState:
    dprog1: tuple
    dprog2: tuple
    devcache1: DevLine
    devcache2: DevLine
    dthreq1: tuple = ()
    dthreq2: tuple = ()
    dthrsp1: tuple = ()
    dthrsp2: tuple = ()
    dthdata1: tuple = ()
    dthdata2: tuple = ()
    htdreq1: tuple = ()
    htdreq2: tuple = ()
    htdrsp1: tuple = ()
    htdrsp2: tuple = ()
    htddata1: tuple = ()
    htddata2: tuple = ()
    dbuffer1: Buffer = None
    dbuffer2: Buffer = None
    hcache: HostLine = HostLine(0, HostState.I)
    counter: int = 0


FIELD_NAMES = tuple(f.name for f in fields(SystemState))
CHANNELS = (
    "dthreq1", "dthreq2", "dthrsp1", "dthrsp2", "dthdata1", "dthdata2",
    "htdreq1", "htdreq2", "htdrsp1", "htdrsp2", "htddata1", "htddata2",
)


def is_stable(state) -> bool:
    """True for I, SH and EM, for device and host states alike."""
    return str(state) in STABLE


def mk_initial_state(dev1, dev2, host, prog1: Sequence = (), prog2: Sequence = (),
                     values: Sequence[int] = DEFAULT_VALUES) -> SystemState:
    """Build a quiescent starting state: empty channels, empty buffers, counter 0.

    Cache lines may be given as ``(val, state)`` pairs with state names as
    strings.  Transient starting states and values outside ``values`` are
    rejected with :class:`ValueError`.
    """
    d1 = DevLine(int(dev1[0]), DeviceState(str(dev1[1])))
    d2 = DevLine(int(dev2[0]), DeviceState(str(dev2[1])))
    h = HostLine(int(host[0]), HostState(str(host[1])))
    for name, line in (("dev1", d1), ("dev2", d2), ("host", h)):
        if not is_stable(line.state):
            raise ValueError(f"{name} must start in a stable state, got {line.state}")
        if line.val not in values:
            raise ValueError(f"{name} value {line.val} not in value domain {tuple(values)}")
    return SystemState(
        dprog1=tuple(Instruction(str(i)) for i in prog1),
        dprog2=tuple(Instruction(str(i)) for i in prog2),
        devcache1=d1,
        devcache2=d2,
        hcache=h,
    )


def mirror(s: SystemState) -> SystemState:
    """Swap every device-1 field with its device-2 twin."""
    swapped = {}
    for name in FIELD_NAMES:
        if name.endswith("1"):
            swapped[name] = getattr(s, name[:-1] + "2")
        elif name.endswith("2"):
            swapped[name] = getattr(s, name[:-1] + "1")
    return replace(s, **swapped)


# -- JSON -----------------------------------------------------------------

def _msg_to_json(m):
    if m is None:
        return None
    if isinstance(m, Data):
        return {"utid": m.utid, "val": m.val}
    if isinstance(m, HtdResp):
        return {"kind": m.kind.value, "state": m.state.value, "utid": m.utid}
    return {"kind": m.kind.value, "utid": m.utid}


def state_to_json(s: SystemState) -> dict:
    out = {}
    for name in FIELD_NAMES:
        v = getattr(s, name)
        if name.startswith("dprog"):
            out[name] = [i.value for i in v]
        elif name in CHANNELS:
            out[name] = [_msg_to_json(m) for m in v]
        elif name.startswith("dbuffer"):
            out[name] = _msg_to_json(v)
        elif name == "counter":
            out[name] = v
        else:
            out[name] = {"val": v.val, "state": v.state.value}
    return out


def _msg_from_json(channel: str, obj):
    if obj is None:
        return None
    channel = channel.rstrip("12")
    if channel.endswith("data"):
        return Data(int(obj["utid"]), int(obj["val"]))
    if channel.startswith("dthreq"):
        return DthReq(DthReqKind(obj["kind"]), int(obj["utid"]))
    if channel.startswith("dthrsp"):
        return DthResp(DthRespKind(obj["kind"]), int(obj["utid"]))
    if channel.startswith("htdreq"):
        return HtdReq(HtdReqKind(obj["kind"]), int(obj["utid"]))
    if channel.startswith("htdrsp"):
        return HtdResp(HtdRespKind(obj["kind"]), DeviceState(obj["state"]), int(obj["utid"]))
    # buffers hold either a snoop or a response
    if obj["kind"] in HtdReqKind.__members__:
        return HtdReq(HtdReqKind(obj["kind"]), int(obj["utid"]))
    return HtdResp(HtdRespKind(obj["kind"]), DeviceState(obj["state"]), int(obj["utid"]))


def state_from_json(obj: dict) -> SystemState:
    unknown = set(obj) - set(FIELD_NAMES)
    if unknown:
        raise ValueError(f"unknown state fields: {sorted(unknown)}")
    kw = {}
    for name in FIELD_NAMES:
        v = obj[name]
        if name.startswith("dprog"):
            kw[name] = tuple(Instruction(i) for i in v)
        elif name in CHANNELS:
            kw[name] = tuple(_msg_from_json(name, m) for m in v)
        elif name.startswith("dbuffer"):
            kw[name] = _msg_from_json(name, v)
        elif name == "counter":
            kw[name] = int(v)
        elif name == "hcache":
            kw[name] = HostLine(int(v["val"]), HostState(v["state"]))
        else:
            kw[name] = DevLine(int(v["val"]), DeviceState(v["state"]))
    return SystemState(**kw)


def state_fingerprint(s: SystemState) -> bytes:
    """128-bit digest over the canonical JSON form of every field."""
    blob = json.dumps(state_to_json(s), sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(blob.encode(), digest_size=16).digest()


# -- UTID relabeling --------------------------------------------------------

def utids_in_flight(s: SystemState) -> set:
    """Every UTID held by a channel message or a buffer."""
    out = {m.utid for ch in CHANNELS for m in getattr(s, ch)}
    for b in (s.dbuffer1, s.dbuffer2):
        if b is not None:
            out.add(b.utid)
    return out


def canonical_utids(s: SystemState) -> SystemState:
    """Relabel UTIDs so states differing only in transaction numbering coincide.

    Rules only compare UTIDs for equality and mint new ones from ``counter``
    upward, so any injective relabeling that fixes the offsets of values at or
    above ``counter`` yields a state with identical behaviour.  Values below
    ``counter`` are packed into ``0..k-1`` in order, ``counter`` becomes ``k``
    and larger values keep their distance from it.  The result is a finite
    representative even when a livelock keeps minting fresh UTIDs.
    """
    old = sorted(u for u in utids_in_flight(s) if u < s.counter)
    k = len(old)
    if k == s.counter and old == list(range(k)):
        return s
    table = {u: i for i, u in enumerate(old)}
    shift = k - s.counter

    def re(u):
        return table[u] if u < s.counter else u + shift

    def msg(m):
        return None if m is None else m._replace(utid=re(m.utid))

    kw = {ch: tuple(msg(m) for m in getattr(s, ch)) for ch in CHANNELS}
    return replace(s, dbuffer1=msg(s.dbuffer1), dbuffer2=msg(s.dbuffer2),
                   counter=k, **kw)
