"""Seeded random generator of well-formed system states.

Used as a state source for the preservation matrix and by the property tests.
States are well formed in the type sense only: every channel holds at most one
message of the right type, UTIDs do not exceed the counter, and values come
from the model's value domain.  They need not be reachable.
"""

from __future__ import annotations

import random
from typing import Iterator

from .protocol import (
    CHANNELS,
    DEFAULT_VALUES,
    Data,
    DevLine,
    DeviceState,
    DthReq,
    DthReqKind,
    DthResp,
    DthRespKind,
    HostLine,
    HostState,
    HtdReq,
    HtdReqKind,
    HtdResp,
    HtdRespKind,
    Instruction,
    SystemState,
)


def _message(rng: random.Random, channel: str, utid: int, values):
    channel = channel.rstrip("12")
    if channel.endswith("data"):
        return Data(utid, rng.choice(values))
    if channel.startswith("dthreq"):
        return DthReq(rng.choice(list(DthReqKind)), utid)
    if channel.startswith("dthrsp"):
        return DthResp(rng.choice(list(DthRespKind)), utid)
    if channel.startswith("htdreq"):
        return HtdReq(rng.choice(list(HtdReqKind)), utid)
    kind = rng.choice(list(HtdRespKind))
    state = rng.choice((DeviceState.SH, DeviceState.EM)) if kind is HtdRespKind.GO else DeviceState.I
    return HtdResp(kind, state, utid)


def random_state(rng: random.Random, values=DEFAULT_VALUES, max_counter: int = 4,
                 max_prog: int = 2, fill: float = 0.35) -> SystemState:
    """One state; each channel is non-empty with probability ``fill``."""
    counter = rng.randint(0, max_counter)

    def utid():
        return rng.randint(0, counter)

    def prog():
        return tuple(rng.choice(list(Instruction)) for _ in range(rng.randint(0, max_prog)))

    def buffer(n):
        r = rng.random()
        if r < 0.5:
            return None
        if r < 0.75:
            return HtdReq(rng.choice(list(HtdReqKind)), utid())
        return _message(rng, f"htdrsp{n}", utid(), values)

    kw = {ch: ((_message(rng, ch, utid(), values),) if rng.random() < fill else ())
          for ch in CHANNELS}
    return SystemState(
        dprog1=prog(),
        dprog2=prog(),
        devcache1=DevLine(rng.choice(values), rng.choice(list(DeviceState))),
        devcache2=DevLine(rng.choice(values), rng.choice(list(DeviceState))),
        dbuffer1=buffer(1),
        dbuffer2=buffer(2),
        hcache=HostLine(rng.choice(values), rng.choice(list(HostState))),
        counter=counter,
        **kw,
    )


def random_states(n: int, seed: int = 0, **kw) -> Iterator[SystemState]:
    rng = random.Random(seed)
    for _ in range(n):
        yield random_state(rng, **kw)
