"""Turing machines: reference simulator, compiler to AuDaLa and differential testing."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .engine.policies import LockstepRoundRobin, Policy
from .engine.runner import Limits, Runner
from .engine.state import ExecState
from .ir import Label
from .syntax.checker import load_program


class CompileError(ValueError):
    pass


class NotIdle(Exception):
    pass


class MalformedWorld(Exception):
    pass


# ---------------------------------------------------------------------------
# Machines and the oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuringMachine:
    """Deterministic machine with ``q0 = 0`` and blank ``0``."""

    states: frozenset[int]
    accepting: frozenset[int]
    delta: dict[tuple[int, int], tuple[int, int, str]]
    sigma: Optional[frozenset[int]] = None

    @property
    def input_alphabet(self) -> frozenset[int]:
        if self.sigma is not None:
            return self.sigma
        syms = {s for (_, s) in self.delta} | {s for (_, s, _) in self.delta.values()}
        return frozenset(syms - {0})

    @classmethod
    def from_json(cls, data: dict) -> tuple["TuringMachine", list[int]]:
        """Build a machine from the JSON layout; returns it with its input."""
        delta: dict[tuple[int, int], tuple[int, int, str]] = {}
        for q, s, q2, s2, d in data.get("delta", []):
            if d not in ("L", "R"):
                raise ValueError(f"direction must be L or R, got {d!r}")
            if (q, s) in delta:
                raise ValueError(f"delta({q}, {s}) is defined twice")
            delta[(q, s)] = (q2, s2, d)
        sigma = data.get("sigma")
        tm = cls(
            frozenset(data.get("states", [0])) | {0},
            frozenset(data.get("accepting", [])),
            delta,
            None if sigma is None else frozenset(sigma),
        )
        return tm, list(data.get("input", []))

    def to_json(self, tape_input: Sequence[int]) -> str:
        d = {
            "states": sorted(self.states),
            "accepting": sorted(self.accepting),
            "delta": [[q, s, *v] for (q, s), v in self.delta.items()],
            "input": list(tape_input),
        }
        if self.sigma is not None:
            d["sigma"] = sorted(self.sigma)
        return json.dumps(d)


@dataclass(frozen=True)
class TMConfiguration:
    """State plus tape; ``tape`` lists the non-blank cells by offset from the head."""

    state: int
    tape: tuple[tuple[int, int], ...] = ()

    @classmethod
    def make(cls, state: int, cells: dict[int, int]) -> "TMConfiguration":
        return cls(state, tuple(sorted((i, s) for i, s in cells.items() if s != 0)))

    def read(self, i: int) -> int:
        return dict(self.tape).get(i, 0)


@dataclass(frozen=True)
class Halt:
    config: TMConfiguration
    accepting: bool


def initial_configuration(tape_input: Sequence[int]) -> TMConfiguration:
    return TMConfiguration.make(0, dict(enumerate(tape_input)))


def tm_step(config: TMConfiguration, tm: TuringMachine) -> Union[TMConfiguration, Halt]:
    """One transition; ``Halt`` when delta is undefined at the head."""
    cells = dict(config.tape)
    out = tm.delta.get((config.state, cells.get(0, 0)))
    if out is None:
        return Halt(config, config.state in tm.accepting)
    q2, s2, d = out
    shift = -1 if d == "R" else 1
    moved = {i + shift: s for i, s in cells.items() if i != 0}
    moved[shift] = s2
    return TMConfiguration.make(q2, moved)


def simulate(tm: TuringMachine, tape_input: Sequence[int], bound: int) -> tuple[list[TMConfiguration], Optional[Halt]]:
    """Configurations ``c0 .. ck`` for up to ``bound`` steps, plus the halt if reached."""
    configs = [initial_configuration(tape_input)]
    for _ in range(bound + 1):
        nxt = tm_step(configs[-1], tm)
        if isinstance(nxt, Halt):
            return configs, nxt
        if len(configs) > bound:
            break
        configs.append(nxt)
    return configs, None


# ---------------------------------------------------------------------------
# Compiler
# ---------------------------------------------------------------------------


def _clause(q: int, s: int, q2: int, s2: int, d: str, accepting: bool, first: bool) -> list[str]:
    near, far = ("right", "left") if d == "R" else ("left", "right")
    new_cell = "TapeCell(head, null, 0)" if d == "R" else "TapeCell(null, head, 0)"
    acc = "true" if accepting else "false"
    lead = "if" if first else "else if"
    return [
        f"\t\t{lead} (state == {q} && head.symbol == {s}) then{{ // transition delta({q},{s})",
        f"\t\t\thead.symbol := {s2};",
        f"\t\t\tstate := {q2};",
        f"\t\t\taccepting := {acc};",
        f"\t\t\tif (head != null && head.{near} == null) then {{",
        f"\t\t\t\thead.{near} := {new_cell};",
        "\t\t\t}",
        f"\t\t\thead := head.{near};",
        "\t\t}",
    ]


def compile_tm(tm: TuringMachine, tape_input: Sequence[int]) -> str:
    """AuDaLa source simulating ``tm`` on ``tape_input``."""
    if not tape_input:
        raise CompileError("the input string must not be empty")
    sigma = tm.input_alphabet
    bad = [s for s in tape_input if s not in sigma or s == 0]
    if bad:
        raise CompileError(f"input symbols {bad} are not in the input alphabet {sorted(sigma)}")
    lines = [
        "struct TapeCell (left: TapeCell, right: TapeCell, symbol: Int){} //def. of TapeCell",
        "struct Control (head: TapeCell, state: Int, accepting: Bool) {",
        "\ttransition {",
    ]
    for i, ((q, s), (q2, s2, d)) in enumerate(tm.delta.items()):
        lines += _clause(q, s, q2, s2, d, q2 in tm.accepting, i == 0)
    lines += ["\t}", "\tinit {"]
    for i, s in enumerate(tape_input):
        lines.append(f"\t\tTapeCell cell{i} := TapeCell(null, null, {s});")
    for i in range(1, len(tape_input)):
        lines.append(f"\t\tcell{i}.left := cell{i - 1};")
        lines.append(f"\t\tcell{i - 1}.right := cell{i};")
    start_acc = "true" if 0 in tm.accepting else "false"
    lines += [
        f"\t\tControl(cell0, 0, {start_acc});",
        "\t}",
        "}",
        "init < Fix(transition)",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Implementation configurations
# ---------------------------------------------------------------------------


def controls(state: ExecState) -> list[Label]:
    return state.labels_of("Control")


def extract_configuration(state: ExecState) -> TMConfiguration:
    """Read the (state, tape) pair off an idle state of a compiled program."""
    if state.busy:
        raise NotIdle("some instance still has commands to execute")
    found = controls(state)
    if len(found) != 1:
        raise MalformedWorld(f"expected exactly one Control instance, found {len(found)}")
    env = state.structs[found[0]].env
    structs = state.structs
    cells: dict[int, int] = {}
    head = env["head"]
    if not head.is_null:
        cells[0] = structs[head].env["symbol"]
        for direction, step in (("right", 1), ("left", -1)):
            cur = structs[head].env[direction]
            i = step
            while not cur.is_null:
                cells[i] = structs[cur].env["symbol"]
                cur = structs[cur].env[direction]
                i += step
    return TMConfiguration.make(env["state"], cells)


def accepting_flag(state: ExecState) -> bool:
    (c,) = controls(state)
    return state.structs[c].env["accepting"]


# ---------------------------------------------------------------------------
# Differential testing
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    agreement: bool
    halted: bool = False
    state: Optional[int] = None
    accepting: Optional[bool] = None
    steps: int = 0
    detail: str = ""
    configs: list[TMConfiguration] = field(default_factory=list)
    race_windows: int = 0
    racy_windows: int = 0

    def __str__(self) -> str:
        if not self.agreement:
            return f"Divergence: {self.detail}"
        if self.halted:
            return f"Agreement: halted in state {self.state} after {self.steps} step(s), accepting={str(self.accepting).lower()}"
        return f"Agreement: no halt within {self.steps} step(s), state {self.state}"


def differential_check(
    tm: TuringMachine,
    tape_input: Sequence[int],
    bound: int = 50,
    policy: Policy = LockstepRoundRobin(),
    *,
    race_check: bool = False,
) -> Verdict:
    """Run the compiled program and the oracle side by side, one transition per fixpoint iteration."""
    program = load_program(compile_tm(tm, tape_input))
    oracle, halt = simulate(tm, tape_input, bound)
    seen: list[TMConfiguration] = []
    verdict = Verdict(agreement=True)

    def fail(msg: str) -> bool:
        verdict.agreement = False
        verdict.detail = msg
        return True

    def observe(state: ExecState, rule: str) -> Optional[bool]:
        if rule == "InitG" and not seen and not state.stab:
            return None  # the idle state before init has no Control yet
        if rule not in ("FixInit", "FixIter", "FixTerm"):
            if len(controls(state)) != 1:
                return fail(f"idle state with {len(controls(state))} Control instances")
            return None
        try:
            got = extract_configuration(state)
        except (NotIdle, MalformedWorld) as e:
            return fail(str(e))
        k = len(seen)
        seen.append(got)
        if rule == "FixTerm":
            # Iteration k changed nothing: the machine must have halted at k - 1.
            if halt is None or len(oracle) != k:
                return fail(f"program stabilised after {k - 1} step(s) but the oracle had not halted")
            if got != oracle[k - 1]:
                return fail(f"after halting: expected {oracle[k - 1]}, got {got}")
            return None
        if k >= len(oracle):
            return fail(f"program still changing at iteration {k} after the oracle halted")
        if got != oracle[k]:
            return fail(f"after {k} step(s): expected {oracle[k]}, got {got}")
        if k >= bound and not (halt is not None and len(oracle) == k + 1):
            verdict.steps = k
            verdict.state = got.state
            return True
        return None

    result = Runner(
        program, policy, Limits(max_fix_iterations=bound + 2),
        observer=observe, race_check=race_check,
    ).run()
    verdict.configs = seen
    verdict.race_windows = len(result.races)
    verdict.racy_windows = sum(1 for w in result.races if w.races)
    if not verdict.agreement:
        return verdict
    if result.status == "Stopped":
        return verdict
    if result.status != "Completed":
        verdict.agreement = False
        verdict.detail = f"engine ended with {result.status}: {result.message}"
        return verdict
    final = seen[-1]
    verdict.halted = True
    verdict.state = final.state
    verdict.steps = len(seen) - 2
    verdict.accepting = accepting_flag(result.state)
    if verdict.accepting != halt.accepting:
        verdict.agreement = False
        verdict.detail = f"accepting flag {verdict.accepting}, oracle says {halt.accepting}"
    return verdict


def random_tm(
    rng: random.Random,
    max_states: int = 4,
    symbols: int = 3,
    max_input: int = 6,
    density: float = 0.6,
) -> tuple[TuringMachine, list[int]]:
    """A random deterministic machine and a nonempty input over ``1..symbols-1``."""
    n = rng.randint(1, max_states)
    states = list(range(n))
    delta = {}
    for q in states:
        for s in range(symbols):
            if rng.random() < density:
                delta[(q, s)] = (rng.choice(states), rng.randrange(symbols), rng.choice("LR"))
    accepting = frozenset(q for q in states if rng.random() < 0.5)
    sigma = frozenset(range(1, symbols))
    tape_input = [rng.randrange(1, symbols) for _ in range(rng.randint(1, max_input))]
    return TuringMachine(frozenset(states), accepting, delta, sigma), tape_input
