"""Executable model of the CXL.cache protocol for one cache line shared by two
devices and a host, with an exhaustive explorer and coherence checks."""

from .engine import Trace, is_terminal, run_schedule, step
from .errors import (
    ModelError,
    ParseError,
    RuleNotEnabled,
    ScheduleStuck,
    UnknownField,
    UnknownProperty,
    UnknownRule,
    UnknownRuleName,
)
from .explorer import ExploreReport, Limits, enumerate_oracle, explore, find_violation
from .invariants import (
    ALL_PROPERTIES,
    CONJUNCTS,
    MatrixReport,
    PropertyDef,
    conjunct_data_no_conflict,
    conjunct_honest_snoop,
    conjunct_singleton_channels,
    conjunct_transient_swmr,
    matrix_check,
    register,
    swmr,
)
from .litmus import LitmusResult, LitmusTest, builtin_suite, parse_litmus, run_litmus
from .protocol import (
    DeviceState,
    HostState,
    Instruction,
    SystemState,
    canonical_utids,
    mirror,
    mk_initial_state,
    state_fingerprint,
    state_from_json,
    state_to_json,
)
from .render import render_trace
from .rules import RelaxConfig, RuleCatalog, apply_rule, build_catalog, enabled_rules, guard_holds

__version__ = "0.1.0"
