import json
from dataclasses import replace

import pytest

from cxlcache.protocol import (
    CHANNELS,
    FIELD_NAMES,
    Data,
    DevLine,
    DeviceState as D,
    DthReq,
    DthReqKind,
    DthResp,
    DthRespKind,
    HostLine,
    HostState as H,
    HtdReq,
    HtdReqKind,
    HtdResp,
    HtdRespKind,
    Instruction,
    canonical_utids,
    is_stable,
    mirror,
    mk_initial_state,
    state_fingerprint,
    state_from_json,
    state_to_json,
    utids_in_flight,
)


class TestInitialState:
    def test_clean_evict_first_row(self):
        s = mk_initial_state((0, "SH"), (0, "SH"), (0, "SH"), ["Evict", "Evict"], [])
        assert s.dprog1 == (Instruction.Evict, Instruction.Evict)
        assert s.dprog2 == ()
        assert s.devcache1 == DevLine(0, D.SH) == s.devcache2
        assert s.hcache == HostLine(0, H.SH)
        assert s.counter == 0
        assert all(getattr(s, ch) == () for ch in CHANNELS)
        assert s.dbuffer1 is None and s.dbuffer2 is None

    def test_dirty_evict_first_row(self):
        s = mk_initial_state((1, "EM"), (0, "I"), (0, "EM"), ["Evict"], [])
        assert s.devcache1 == DevLine(1, D.EM)
        assert s.devcache2 == DevLine(0, D.I)
        assert s.hcache == HostLine(0, H.EM)

    def test_empty_configuration(self):
        s = mk_initial_state((0, "I"), (0, "I"), (0, "I"))
        assert s.counter == 0 and s.dprog1 == () and s.dprog2 == ()

    @pytest.mark.parametrize("bad", [(0, "ISAD"), (0, "MIA")])
    def test_rejects_transient_device(self, bad):
        with pytest.raises(ValueError):
            mk_initial_state(bad, (0, "I"), (0, "I"))

    def test_rejects_transient_host(self):
        with pytest.raises(ValueError):
            mk_initial_state((0, "I"), (0, "I"), (0, "MA"))

    def test_rejects_value_outside_domain(self):
        with pytest.raises(ValueError):
            mk_initial_state((7, "I"), (0, "I"), (0, "I"))

    def test_rejects_unknown_instruction(self):
        with pytest.raises(ValueError):
            mk_initial_state((0, "I"), (0, "I"), (0, "I"), ["Flush"])


class TestStates:
    def test_stable_partition(self):
        assert {s for s in D if is_stable(s)} == {D.I, D.SH, D.EM}
        assert {s for s in H if is_stable(s)} == {H.I, H.SH, H.EM}

    def test_twenty_fields(self):
        assert len(FIELD_NAMES) == 20
        assert len(CHANNELS) == 12

    def test_display_forms(self):
        assert str(DevLine(0, D.SIA)) == "(0, SIA)"
        assert str(DthReq(DthReqKind.CleanEvict, 1)) == "(CleanEvict, 1)"
        assert str(HtdResp(HtdRespKind.GO, D.SH, 1)) == "(GO, SH, 1)"
        assert str(HtdResp(HtdRespKind.GO_WritePull, D.I, 1)) == "(GO_WritePull, 1)"
        assert str(Data(0, 42)) == "(Data(42), 0)"


class TestMirror:
    def test_swaps_device_fields(self):
        s = mk_initial_state((1, "EM"), (0, "I"), (0, "EM"), ["Evict"], ["Load"])
        m = mirror(s)
        assert m.devcache1 == s.devcache2 and m.devcache2 == s.devcache1
        assert m.dprog1 == s.dprog2 and m.hcache == s.hcache

    def test_involution(self):
        s = mk_initial_state((1, "EM"), (0, "I"), (0, "EM"), ["Evict"], [])
        assert mirror(mirror(s)) == s


class TestJson:
    def test_round_trip_with_messages(self):
        s = mk_initial_state((0, "I"), (0, "I"), (0, "I"))
        s = replace(s,
                    dthreq1=(DthReq(DthReqKind.RdOwn, 0),),
                    dthdata2=(Data(3, 1),),
                    htddata1=(Data(0, 42),),
                    htdrsp2=(HtdResp(HtdRespKind.GO, D.SH, 1),),
                    dbuffer1=HtdReq(HtdReqKind.SnpInv, 0),
                    dbuffer2=HtdResp(HtdRespKind.GO_WritePullDrop, D.I, 2),
                    counter=4)
        text = json.dumps(state_to_json(s))
        assert state_from_json(json.loads(text)) == s

    def test_rejects_unknown_field(self):
        obj = state_to_json(mk_initial_state((0, "I"), (0, "I"), (0, "I")))
        obj["dprog3"] = []
        with pytest.raises(ValueError):
            state_from_json(obj)

    def test_missing_field_is_an_error(self):
        obj = state_to_json(mk_initial_state((0, "I"), (0, "I"), (0, "I")))
        del obj["counter"]
        with pytest.raises(KeyError):
            state_from_json(obj)


class TestFingerprint:
    def test_equal_states_equal_keys(self):
        a = mk_initial_state((0, "SH"), (0, "SH"), (0, "SH"), ["Evict"])
        b = mk_initial_state((0, "SH"), (0, "SH"), (0, "SH"), ["Evict"])
        assert state_fingerprint(a) == state_fingerprint(b)
        assert len(state_fingerprint(a)) == 16

    def test_counter_sensitive(self):
        a = mk_initial_state((0, "SH"), (0, "SH"), (0, "SH"))
        assert state_fingerprint(a) != state_fingerprint(replace(a, counter=1))

    def test_no_collisions_on_reachable_set(self):
        from conftest import reachable_corpus

        corpus = reachable_corpus("snoop_pushes_go")
        assert len({state_fingerprint(s) for s in corpus}) == len(corpus)


class TestCanonicalUtids:
    def _state(self, counter, **kw):
        s = mk_initial_state((0, "I"), (0, "I"), (0, "I"))
        return replace(s, counter=counter, **kw)

    def test_identity_on_compact_states(self):
        s = self._state(1, dthreq1=(DthReq(DthReqKind.RdOwn, 0),))
        assert canonical_utids(s) is s

    def test_packs_old_utids_and_shifts_counter(self):
        s = self._state(237, htdreq2=(HtdReq(HtdReqKind.SnpInv, 236),),
                        dbuffer1=HtdReq(HtdReqKind.SnpData, 12))
        c = canonical_utids(s)
        assert c.counter == 2
        assert c.dbuffer1.utid == 0 and c.htdreq2[0].utid == 1

    def test_keeps_offsets_at_or_above_counter(self):
        s = self._state(10, dthreq1=(DthReq(DthReqKind.CleanEvict, 11),),
                        htdrsp1=(HtdResp(HtdRespKind.GO, D.EM, 10),))
        c = canonical_utids(s)
        assert c.counter == 0
        assert c.dthreq1[0].utid == 1 and c.htdrsp1[0].utid == 0

    def test_equal_utids_stay_equal(self):
        s = self._state(9, htdrsp1=(HtdResp(HtdRespKind.GO, D.SH, 4),), htddata1=(Data(4, 0),),
                        dthrsp2=(DthResp(DthRespKind.RspIHitI, 5),))
        c = canonical_utids(s)
        assert c.htdrsp1[0].utid == c.htddata1[0].utid != c.dthrsp2[0].utid

    def test_idempotent(self):
        s = self._state(50, htddata2=(Data(7, 1),), dbuffer2=HtdReq(HtdReqKind.SnpInv, 3))
        c = canonical_utids(s)
        assert canonical_utids(c) == c
        assert utids_in_flight(c) == {0, 1}
