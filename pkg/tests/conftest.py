import functools

import pytest
from hypothesis import strategies as st

from cxlcache.explorer import Limits, explore
from cxlcache.generate import random_state
from cxlcache.invariants import ALL_PROPERTIES
from cxlcache.litmus import builtin_suite
from cxlcache.rules import RelaxConfig, build_catalog

# lines printed by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def catalog(*relax):
    return build_catalog(RelaxConfig.relaxing(*relax))


@functools.lru_cache(maxsize=None)
def builtin_reports(*relax):
    """Exploration of every built-in initial state, keyed by test name."""
    cat = catalog(*relax)
    props = tuple(p.name for p in ALL_PROPERTIES)
    return {t.name: explore(cat, t.initial_state(), Limits(properties=props))
            for t in builtin_suite()}


@functools.lru_cache(maxsize=None)
def reachable_corpus(*relax):
    out = set()
    for rep in builtin_reports(*relax).values():
        out |= set(rep.depths)
    return tuple(sorted(out, key=repr))


@pytest.fixture(scope="session")
def faithful():
    return catalog()


@pytest.fixture(scope="session")
def relaxed():
    return catalog("snoop_pushes_go")


# -- hypothesis strategies ----------------------------------------------------

# the package generator driven by a hypothesis-controlled Random: one draw per
# state keeps generation cheap enough for thousands of examples per property
random_states = st.randoms(use_true_random=False).map(random_state)


def states(*relax):
    """Random well-formed states mixed with reachable ones."""
    return st.one_of(random_states, st.sampled_from(reachable_corpus(*relax)))
