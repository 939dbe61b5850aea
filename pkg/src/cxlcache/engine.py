"""Single-step and scheduled execution producing replayable traces."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RuleNotEnabled, ScheduleStuck
from .protocol import SystemState, state_from_json, state_to_json
from .rules import RuleCatalog, apply_rule, enabled_rules


@dataclass(frozen=True)
class Trace:
    initial: SystemState
    steps: tuple = ()  # of (rule name, resulting state)

    @property
    def final(self) -> SystemState:
        return self.steps[-1][1] if self.steps else self.initial

    @property
    def rules(self) -> list:
        return [name for name, _ in self.steps]

    @property
    def states(self) -> list:
        return [self.initial] + [st for _, st in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def extend(self, name: str, state: SystemState) -> "Trace":
        return Trace(self.initial, self.steps + ((name, state),))

    def validate(self, c: RuleCatalog) -> bool:
        """Re-fire every step and check it reproduces the stored state."""
        prev = self.initial
        for name, state in self.steps:
            try:
                if step(c, prev, name) != state:
                    return False
            except RuleNotEnabled:
                return False
            prev = state
        return True

    def to_json(self) -> dict:
        return {
            "initial": state_to_json(self.initial),
            "steps": [{"rule": n, "state": state_to_json(s)} for n, s in self.steps],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Trace":
        return cls(
            state_from_json(obj["initial"]),
            tuple((st["rule"], state_from_json(st["state"])) for st in obj["steps"]),
        )


def step(c: RuleCatalog, s: SystemState, rule_name: str) -> SystemState:
    return apply_rule(c.get(rule_name), s)


def run_schedule(c: RuleCatalog, s0: SystemState, schedule) -> Trace:
    trace = Trace(s0)
    for i, name in enumerate(schedule):
        try:
            nxt = step(c, trace.final, name)
        except RuleNotEnabled:
            raise ScheduleStuck(i, name, trace.final, trace) from None
        trace = trace.extend(name, nxt)
    return trace


def is_terminal(c: RuleCatalog, s: SystemState) -> bool:
    return not enabled_rules(c, s)
