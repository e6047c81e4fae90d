from __future__ import annotations

from typing import Optional

from ..engine.semantics import IllegalTransition, Transition, apply_transition, command_enabled, command_rule, schedule_rule
from ..engine.state import ExecState
from ..ir import Label


def apply_command(state: ExecState, label: Label, rules: tuple[str, ...]) -> ExecState:
    if not command_enabled(state, label):
        raise IllegalTransition(f"no command of {label!r} is enabled")
    rule = command_rule(state, label)
    if rule not in rules:
        raise IllegalTransition(f"head command of {label!r} fires {rule}, expected one of {rules}")
    return apply_transition(state, Transition(rule, label))


def apply_schedule(state: ExecState, rules: tuple[str, ...]) -> ExecState:
    rule: Optional[str] = schedule_rule(state)
    if rule not in rules:
        raise IllegalTransition(f"enabled schedule rule is {rule}, expected one of {rules}")
    return apply_transition(state, Transition(rule))
