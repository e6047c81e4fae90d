"""Execution driver: repeatedly takes a policy-chosen enabled transition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..ir import render_value
from ..syntax.checker import ValidatedProgram
from .policies import LockstepRoundRobin, Policy, SeededRandom, SequentialByLabel
from .races import StepRaces, detect_races
from .semantics import (
    CommandBlocked,
    RuntimeFault,
    exec_command,
    exec_schedule,
    iter_iter_enabled,
    schedule_rule,
)
from .state import AFix, AIter, ExecState, Machine, initial_state

COMPLETED = "Completed"
DIVERGENCE = "DivergenceSuspected"
STUCK = "Stuck"
FAULT = "RuntimeFault"
STOPPED = "Stopped"

EXIT_CODES = {COMPLETED: 0, STOPPED: 0, DIVERGENCE: 2, STUCK: 3, FAULT: 4}

_WRITE_RULES = ("ComWr", "ComWrN", "ComWrA")


@dataclass(frozen=True)
class Limits:
    max_fix_iterations: int = 10_000
    max_transitions: int = 50_000_000


@dataclass
class TraceEvent:
    index: int
    rule: str
    label: Optional[str] = None
    command: Optional[str] = None
    changed: Optional[dict] = None
    stab: list[bool] = field(default_factory=list)
    idle: bool = False
    loaded: Optional[list[str]] = None
    still_busy: Optional[list[str]] = None

    def to_json(self) -> str:
        d = {"index": self.index, "rule": self.rule}
        if self.label is not None:
            d["label"] = self.label
            d["command"] = self.command
        if self.changed is not None:
            d["changed"] = self.changed
        d["stab"] = self.stab
        if self.label is None:
            d["idle"] = self.idle
        if self.loaded is not None:
            d["loaded"] = self.loaded
        if self.still_busy is not None:
            d["still_busy"] = self.still_busy
        return json.dumps(d)


@dataclass
class RunResult:
    status: str
    state: ExecState
    transitions: int
    trace: list[TraceEvent]
    races: list[StepRaces]
    message: str = ""
    fault: Optional[RuntimeFault] = None
    asynchrony: bool = False

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


Observer = Callable[[ExecState, str], Optional[bool]]


class _Stop(Exception):
    def __init__(self, status: str, message: str = ""):
        self.status = status
        self.message = message


class Runner:
    """Drives one execution.

    ``observer(state, rule)`` is called just before every schedule transition;
    returning ``True`` ends the run with status ``Stopped``.
    """

    def __init__(
        self,
        program: ValidatedProgram | Machine,
        policy: Policy = LockstepRoundRobin(),
        limits: Limits = Limits(),
        *,
        trace: bool = False,
        race_check: bool = False,
        observer: Optional[Observer] = None,
        strict_null_array: bool = False,
        state: Optional[ExecState] = None,
    ):
        self.state = state if state is not None else initial_state(program, strict_null_array)
        self.policy = policy
        self.limits = limits
        self.tracing = trace
        self.race_check = race_check
        self.observer = observer
        self.trace: list[TraceEvent] = []
        self.races: list[StepRaces] = []
        self.transitions = 0
        self.asynchrony = False
        self._window: Optional[StepRaces] = None

    # -- bookkeeping ---------------------------------------------------------

    def _command(self, label) -> str:
        st = self.state
        if self.tracing:
            cmd = str(st.structs[label].cmds[-1])
        rule = exec_command(st, label)
        self.transitions += 1
        if self.tracing:
            changed = None
            if rule in _WRITE_RULES and st.last_write is not None and st.last_write[3]:
                target, loc, v, _ = st.last_write
                changed = {"target": repr(target), "param": loc, "value": render_value(v)}
            self.trace.append(
                TraceEvent(self.transitions, rule, repr(label), cmd, changed, list(st.stab))
            )
        if not st.busy and self._window is not None:
            self._close_window()
        if self.transitions >= self.limits.max_transitions:
            raise _Stop(DIVERGENCE, f"transition limit {self.limits.max_transitions} reached")
        return rule

    def _schedule(self, rule: str) -> None:
        st = self.state
        if self.observer is not None and self.observer(st, rule):
            raise _Stop(STOPPED, f"stopped by observer before {rule}")
        idle = not st.busy
        before_busy = set(st.busy) if rule == "IterIter" else None
        head = st.schedule[0]
        if rule in ("InitG", "InitL") and self.race_check:
            self._window = StepRaces(len(self.races), str(head))
            st.access_log = []
        loaded = exec_schedule(st, rule)
        self.transitions += 1
        still_busy = None
        if rule == "IterIter":
            m = st.machine
            steps = head.steps
            got = set(loaded)
            still_busy = sorted(
                lab for lab in before_busy
                if lab not in got and m.iter_block_rev(st.structs[lab].struct, steps)
            )
            if loaded and still_busy:
                self.asynchrony = True
        if self.tracing:
            self.trace.append(
                TraceEvent(
                    self.transitions, rule, stab=list(st.stab), idle=idle,
                    loaded=None if loaded is None else [repr(x) for x in sorted(loaded)],
                    still_busy=None if still_busy is None else [repr(x) for x in still_busy],
                )
            )
        if self._window is not None and not st.busy:
            self._close_window()
        if rule in ("FixIter", "FixIterN", "IterIter") and st.iters[-1] > self.limits.max_fix_iterations:
            marker = next((e for e in st.schedule if isinstance(e, (AFix, AIter))), None)
            raise _Stop(
                DIVERGENCE,
                f"{marker} exceeded {self.limits.max_fix_iterations} iterations",
            )
        if self.transitions >= self.limits.max_transitions:
            raise _Stop(DIVERGENCE, f"transition limit {self.limits.max_transitions} reached")

    def _close_window(self) -> None:
        st = self.state
        self._window.races = detect_races(st.access_log)
        self.races.append(self._window)
        self._window = None
        st.access_log = None

    # -- policies ------------------------------------------------------------

    def _idle_step(self) -> bool:
        """Take the schedule transition of a Done state; False when finished."""
        st = self.state
        rule = schedule_rule(st)
        if rule is None:
            if not st.schedule:
                return False
            raise _Stop(STUCK, f"no transition enabled at schedule head {st.schedule[0]}")
        self._schedule(rule)
        return True

    def _run_lockstep(self) -> None:
        st = self.state
        while True:
            if not st.busy:
                if not self._idle_step():
                    return
                continue
            moved = False
            for lab in sorted(st.busy):
                if lab in st.busy:
                    try:
                        self._command(lab)
                        moved = True
                    except CommandBlocked:
                        pass
            if not moved:
                raise _Stop(STUCK, "every busy instance is blocked")
            if st.schedule and isinstance(st.schedule[0], AIter) and iter_iter_enabled(st):
                self._schedule("IterIter")

    def _run_sequential(self) -> None:
        st = self.state
        while True:
            if not st.busy:
                if not self._idle_step():
                    return
                continue
            for lab in sorted(st.busy):
                try:
                    while lab in st.busy:
                        self._command(lab)
                    break
                except CommandBlocked:
                    continue
            else:
                raise _Stop(STUCK, "every busy instance is blocked")

    def _run_random(self, seed: int) -> None:
        import random

        rnd = random.Random(seed).random
        st = self.state
        while True:
            if not st.busy:
                if not self._idle_step():
                    return
                continue
            options: list = sorted(st.busy)
            if isinstance(st.schedule[0], AIter) if st.schedule else False:
                if iter_iter_enabled(st):
                    options.append(None)
            while True:
                i = int(rnd() * len(options))
                choice = options[i]
                if choice is None:
                    self._schedule("IterIter")
                    break
                try:
                    self._command(choice)
                    break
                except CommandBlocked:
                    options.pop(i)
                    if not options:
                        raise _Stop(STUCK, "every busy instance is blocked")

    def run(self) -> RunResult:
        status, message, fault = COMPLETED, "", None
        try:
            if isinstance(self.policy, SeededRandom):
                self._run_random(self.policy.seed)
            elif isinstance(self.policy, SequentialByLabel):
                self._run_sequential()
            else:
                self._run_lockstep()
        except _Stop as s:
            status, message = s.status, s.message
        except RuntimeFault as f:
            status, message, fault = FAULT, str(f), f
        return RunResult(
            status, self.state, self.transitions, self.trace, self.races, message, fault,
            self.asynchrony,
        )


def run(
    program: ValidatedProgram | Machine,
    policy: Policy = LockstepRoundRobin(),
    limits: Limits = Limits(),
    **options,
) -> RunResult:
    """Run ``program`` to completion, a limit, a fault or a stuck state."""
    return Runner(program, policy, limits, **options).run()
