from dataclasses import replace

import pytest

from cxlcache.errors import UnknownProperty
from cxlcache.explorer import Limits
from cxlcache.invariants import (
    ALL_PROPERTIES,
    CONJUNCTS,
    PROPERTIES,
    PropertyDef,
    conjunct_data_no_conflict,
    conjunct_honest_snoop,
    conjunct_singleton_channels,
    conjunct_transient_swmr,
    get_property,
    matrix_check,
    register,
    resolve,
    swmr,
)
from cxlcache.litmus import reachable_matrix
from cxlcache.protocol import (
    Data,
    DevLine,
    DeviceState as D,
    DthReq,
    DthReqKind,
    DthResp,
    DthRespKind,
    HtdReq,
    HtdReqKind,
    HtdResp,
    HtdRespKind,
    canonical_utids,
    mk_initial_state,
)

from conftest import builtin_reports


def blank(**kw):
    return replace(mk_initial_state((0, "I"), (0, "I"), (0, "I")), **kw)


def lines(a, b):
    return blank(devcache1=DevLine(0, a), devcache2=DevLine(0, b))


def snoop_excuse_state():
    """Device 1 has its GO(EM) queued while device 2 waits in ISAD with a
    GO(SH) queued and a SnpInv ahead of it in the request channel."""
    return blank(
        devcache1=DevLine(-1, D.IMAD),
        devcache2=DevLine(-1, D.ISAD),
        htdrsp1=(HtdResp(HtdRespKind.GO, D.EM, 0),),
        htddata1=(Data(0, 42),),
        htdreq2=(HtdReq(HtdReqKind.SnpInv, 0),),
        htdrsp2=(HtdResp(HtdRespKind.GO, D.SH, 1),),
        counter=2,
    )


class TestSwmr:
    @pytest.mark.parametrize("a,b,ok", [
        (D.EM, D.I, True), (D.EM, D.SH, False), (D.SH, D.SH, True),
        (D.SH, D.EM, False), (D.EM, D.EM, False), (D.EM, D.ISAD, True),
    ])
    def test_examples(self, a, b, ok):
        assert swmr(lines(a, b)) is ok


class TestTransientSwmr:
    def test_upgrading_with_reader(self):
        assert not conjunct_transient_swmr(lines(D.IMD, D.SH))

    def test_snoop_excuses(self):
        s = replace(lines(D.IMD, D.SH), htdreq2=(HtdReq(HtdReqKind.SnpInv, 0),))
        assert conjunct_transient_swmr(s)

    def test_snpdata_does_not_excuse(self):
        s = replace(lines(D.IMD, D.SH), htdreq2=(HtdReq(HtdReqKind.SnpData, 0),))
        assert not conjunct_transient_swmr(s)

    def test_quiescent(self):
        assert conjunct_transient_swmr(blank())

    def test_imad_needs_response(self):
        assert conjunct_transient_swmr(lines(D.IMAD, D.SH))
        s = replace(lines(D.IMAD, D.SH), htdrsp1=(HtdResp(HtdRespKind.GO, D.EM, 0),))
        assert not conjunct_transient_swmr(s)

    def test_other_awaiting_both(self):
        s = lines(D.IMD, D.ISAD)
        assert conjunct_transient_swmr(s)
        assert not conjunct_transient_swmr(
            replace(s, htdrsp2=(HtdResp(HtdRespKind.GO, D.SH, 1),)))

    def test_other_data_in_flight(self):
        s = replace(lines(D.IMD, D.I), htddata2=(Data(1, 0),))
        assert not conjunct_transient_swmr(s)

    def test_mirrored_form(self):
        assert not conjunct_transient_swmr(lines(D.SH, D.SMD))


class TestHonestSnoop:
    def _rsp(self, kind, state):
        return blank(devcache1=DevLine(0, state), dthrsp1=(DthResp(kind, 0),))

    def test_invalid_responder(self):
        assert conjunct_honest_snoop(self._rsp(DthRespKind.RspIHitSE, D.I))

    def test_shared_responder(self):
        assert not conjunct_honest_snoop(self._rsp(DthRespKind.RspIHitSE, D.SH))

    def test_empty(self):
        assert conjunct_honest_snoop(blank())

    def test_non_invalidating_reply_unconstrained(self):
        assert conjunct_honest_snoop(self._rsp(DthRespKind.RspSFwdM, D.SH))


class TestSingletonChannels:
    def test_two_requests(self):
        s = blank(dthreq1=(DthReq(DthReqKind.RdShared, 0), DthReq(DthReqKind.RdOwn, 1)))
        assert not conjunct_singleton_channels(s)

    def test_empty(self):
        assert conjunct_singleton_channels(blank())

    def test_builtin_runs(self):
        for rep in builtin_reports().values():
            assert rep.verdicts["singleton_channels"] is None


class TestDataNoConflict:
    def test_one_side(self):
        assert conjunct_data_no_conflict(blank(dthdata1=(Data(1, 0),)))

    def test_both_sides(self):
        assert not conjunct_data_no_conflict(blank(dthdata1=(Data(1, 0),), htddata2=(Data(2, 0),)))

    def test_same_device_is_fine(self):
        assert conjunct_data_no_conflict(blank(dthdata1=(Data(1, 0),), htddata1=(Data(2, 0),)))

    def test_empty(self):
        assert conjunct_data_no_conflict(blank())


class TestRegistry:
    def test_aliases(self):
        for p in CONJUNCTS:
            assert get_property("conjunct_" + p.name) is p
        assert len(ALL_PROPERTIES) == 5

    def test_unknown(self):
        with pytest.raises(UnknownProperty):
            get_property("bogus")

    def test_anchors_present(self):
        assert all(p.anchor for p in ALL_PROPERTIES)

    def test_open_for_extension(self):
        p = register(PropertyDef("host_never_ma", lambda s: s.hcache.state.value != "MA", "x"))
        try:
            assert resolve(["host_never_ma"]) == (p,)
        finally:
            del PROPERTIES["host_never_ma"]


class TestMatrix:
    def test_empty_source(self, faithful):
        m = matrix_check(faithful, ALL_PROPERTIES, [])
        assert m.all_pass and m.states_checked == 0
        assert len(m.cells) == len(faithful) * 5

    def test_faithful_reachable_all_pass(self, faithful):
        m = reachable_matrix(faithful, ALL_PROPERTIES)
        assert m.all_pass
        assert m.states_checked > 1000

    def test_relaxed_reachable_has_failures(self, relaxed):
        m = reachable_matrix(relaxed, ALL_PROPERTIES)
        assert not m.all_pass
        for (rule, prop), (pre, post) in m.failures.items():
            assert all(p(pre) for p in ALL_PROPERTIES)
            assert not get_property(prop)(post)
            trace = m.traces[(rule, prop)]
            assert trace.validate(relaxed) and canonical_utids(trace.final) == pre

    def test_relaxed_failure_path_uses_isad_snpinv(self, relaxed):
        m = reachable_matrix(relaxed, ALL_PROPERTIES)
        paths = [t.rules + [r] for (r, _), t in m.traces.items()]
        assert any(any(n.startswith("ISADSnpInv") for n in p) for p in paths)

    def test_isad_snpinv_cell_on_excuse_state(self, faithful, relaxed):
        s = snoop_excuse_state()
        assert all(p(s) for p in ALL_PROPERTIES)
        m = matrix_check(relaxed, ALL_PROPERTIES, [s])
        pre, post = m.cells[("ISADSnpInv2", "transient_swmr")]
        assert pre == s and not conjunct_transient_swmr(post)
        f = matrix_check(faithful, ALL_PROPERTIES, [s])
        assert f.fired.get("ISADSnpInv2", 0) == 0
        assert f.cells[("ISADSnpInv2", "transient_swmr")] is None

    def test_prefilter_skips_bad_states(self, faithful):
        m = matrix_check(faithful, ALL_PROPERTIES, [lines(D.EM, D.SH)])
        assert m.states_checked == 0

    def test_renderings(self, relaxed):
        m = reachable_matrix(relaxed, ALL_PROPERTIES, Limits())
        md = m.to_markdown()
        assert md.startswith("| rule | fired | swmr |")
        assert "FAIL" in md and "reached by:" in md
        obj = m.to_json()
        assert len(obj["rules"]) == len(relaxed)
        failing = [c for r in obj["rules"] for c in r["cells"].values() if c != "pass"]
        assert failing and all({"pre", "post", "path"} <= set(c["fail"]) for c in failing)

    def test_only_fired(self, faithful):
        m = reachable_matrix(faithful, ALL_PROPERTIES)
        md = m.to_markdown(only_fired=True)
        assert "| ModifiedLoad1 |" not in md
        assert "| SharedEvict1 |" in md
