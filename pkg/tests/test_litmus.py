from dataclasses import replace

import pytest

from cxlcache.errors import ParseError, ScheduleStuck, UnknownField, UnknownRuleName
from cxlcache.explorer import Limits
from cxlcache.litmus import (
    builtin,
    builtin_paths,
    builtin_suite,
    load_litmus,
    parse_litmus,
    run_litmus,
    to_text,
)
from cxlcache.protocol import DeviceState as D
from cxlcache.rules import RelaxConfig

CLEAN = """\
# comment line
test clean_evict_test
devcache1 = (0, SH)
devcache2 = (0, SH)
hcache = (0, SH)
prog1 = [Evict, Evict]
schedule = [SharedEvict1, Shared_CleanEvict_NotLastDrop1, SIA_GO_WritePullDrop1]
expect coherent
expect terminal devcache1.state = I
expect terminal counter = 1
"""

FAITHFUL = ("clean_evict_test", "clean_evict_all", "dirty_evict_test", "dirty_evict_all",
            "snoop_pushes_go_faithful", "store_load", "multiple_reads", "multiple_writes",
            "multiple_evicts", "alternating")


def _error(text):
    with pytest.raises(ParseError) as exc:
        parse_litmus(text)
    return exc.value


class TestParse:
    def test_clean_evict(self):
        t = parse_litmus(CLEAN)
        assert t.name == "clean_evict_test" and t.mode == "guided"
        assert t.prog1 == ("Evict", "Evict") and t.prog2 == ()
        assert t.devcache1 == t.devcache2 == t.hcache == (0, "SH")
        assert t.coherent and t.relax == RelaxConfig()
        assert [a.path for a in t.terminal] == ["devcache1.state", "counter"]

    def test_relax_forms(self):
        for directive in ("relax snoop_pushes_go", "relax: snoop_pushes_go"):
            t = parse_litmus(f"test x\n{directive}\nprog1 = [Store]\nexpect violation swmr\n")
            assert t.relax == RelaxConfig(snoop_pushes_go=False)
            assert t.mode == "exhaustive" and t.violations == ("swmr",)

    def test_conjunct_alias_resolves(self):
        t = parse_litmus("test x\nexpect violation conjunct_transient_swmr\n")
        assert t.violations == ("transient_swmr",)

    def test_unknown_rule(self):
        e = _error("test x\nschedule = [SharedEvict1, Bogus1]\nexpect coherent\n")
        assert isinstance(e, UnknownRuleName)
        assert (e.line, e.column) == (2, 27)

    def test_unknown_field(self):
        e = _error("test x\nexpect terminal devcache3 = (0, I)\n")
        assert isinstance(e, UnknownField)
        assert e.line == 2 and e.column == 17

    def test_bad_sub_field(self):
        assert isinstance(_error("test x\nexpect terminal counter.val = 1\n"), UnknownField)

    def test_unknown_key(self):
        e = _error("test x\n  colour = blue\nexpect coherent\n")
        assert (e.line, e.column) == (2, 3)
        assert "colour" in str(e)

    def test_unknown_state(self):
        e = _error("test x\ndevcache1 = (0, Q)\nexpect coherent\n")
        assert (e.line, e.column) == (2, 17)

    def test_transient_initial_rejected(self):
        assert _error("test x\ndevcache1 = (0, ISAD)\nexpect coherent\n")

    def test_unknown_instruction(self):
        e = _error("test x\nprog1 = [Load, Flush]\nexpect coherent\n")
        assert (e.line, e.column) == (2, 16)

    def test_unknown_relax_flag(self):
        e = _error("test x\nrelax everything\nexpect coherent\n")
        assert (e.line, e.column) == (2, 7)

    def test_unknown_property(self):
        assert "bogus" in str(_error("test x\nexpect violation bogus\n"))

    def test_missing_name_and_expectation(self):
        assert "test" in str(_error("expect coherent\n"))
        assert "expect" in str(_error("test x\n"))

    def test_duplicates(self):
        assert _error("test x\nprog1 = []\nprog1 = []\nexpect coherent\n").line == 3

    def test_round_trip(self):
        for t in builtin_suite():
            assert parse_litmus(to_text(t)) == t


class TestRun:
    def test_clean_evict(self):
        r = run_litmus(builtin("clean_evict_test"))
        assert r.passed, r.details
        assert r.trace.final.devcache1.state is D.I and r.trace.final.counter == 1

    def test_dirty_evict(self):
        r = run_litmus(builtin("dirty_evict_test"))
        assert r.passed, r.details
        assert str(r.trace.final.hcache) == "(1, I)" and str(r.trace.final.devcache1) == "(1, I)"

    def test_snoop_pushes_go(self):
        r = run_litmus(builtin("snoop_pushes_go_test"))
        assert r.passed, r.details
        f = r.trace.final
        assert (f.devcache1.state, f.devcache2.state) == (D.EM, D.SH)

    def test_contrast_without_relaxation(self):
        t = replace(builtin("snoop_pushes_go_test"), relax=RelaxConfig())
        r = run_litmus(t)
        assert not r.passed
        assert r.details == ["expected a swmr violation, none found"]
        assert run_litmus(builtin("snoop_pushes_go_faithful")).passed

    @pytest.mark.parametrize("name", FAITHFUL)
    def test_faithful_suite_coherent(self, name):
        t = builtin(name)
        assert t.relax.faithful and t.coherent
        r = run_litmus(t)
        assert r.passed, r.details

    def test_failed_assertion_reported(self):
        t = parse_litmus(CLEAN.replace("counter = 1", "counter = 7"))
        r = run_litmus(t)
        assert not r.passed and r.details == ["terminal counter is 1, expected 7"]
        assert r.summary().startswith("FAIL clean_evict_test")

    def test_truncation_fails(self):
        r = run_litmus(builtin("store_load"), Limits(max_states=3))
        assert not r.passed and "exploration truncated" in r.details

    def test_stuck_schedule_propagates(self):
        t = parse_litmus(CLEAN.replace("SharedEvict1,", "SharedEvict1, SharedEvict1,"))
        with pytest.raises(ScheduleStuck):
            run_litmus(t)

    def test_exhaustive_terminal_assertions(self):
        r = run_litmus(builtin("clean_evict_all"))
        assert r.passed and r.report.terminal_count >= 1


class TestSuite:
    def test_size_and_required_members(self):
        names = {t.name for t in builtin_suite()}
        assert len(names) >= 8
        assert {"clean_evict_test", "dirty_evict_test", "snoop_pushes_go_test", "store_load",
                "multiple_reads", "multiple_writes", "multiple_evicts", "alternating"} <= names

    def test_table_scenarios_have_twins(self):
        for name in ("clean_evict", "dirty_evict"):
            assert builtin(f"{name}_test").mode == "guided"
            assert builtin(f"{name}_all").mode == "exhaustive"

    def test_files_named_after_tests(self):
        for p in builtin_paths():
            assert load_litmus(p).name == p.name[:-4]

    def test_unknown_builtin(self):
        with pytest.raises(KeyError):
            builtin("nope")

    def test_deterministic_verdicts(self):
        a = [run_litmus(t).passed for t in builtin_suite()]
        b = [run_litmus(t).passed for t in builtin_suite()]
        assert a == b == [True] * len(a)
