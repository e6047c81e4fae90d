"""Execution state: struct instances, schedule markers and the compiled program."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..ir import NULL_ARRAY, Command, Label, Value, default_val, interp_statements, null_label
from ..syntax import ast as A
from ..syntax.checker import ValidatedProgram


@dataclass(frozen=True)
class AFix:
    """Marker for a fixpoint that has started and not yet terminated."""

    body: tuple
    params: Optional[tuple[str, ...]] = None

    def __str__(self) -> str:
        extra = "" if self.params is None else ", " + ", ".join(self.params)
        return f"aFix({schedule_text(self.body)}{extra})"


@dataclass(frozen=True)
class AIter:
    steps: tuple[str, ...]

    def __str__(self) -> str:
        return f"aIter({'; '.join(self.steps)})"


SchedEntry = Union[A.Call, A.Fix, A.Iter, AFix, AIter]


def schedule_text(items) -> str:
    parts = []
    for it in items:
        if isinstance(it, A.Call):
            parts.append(str(it))
        elif isinstance(it, A.Fix):
            extra = "" if it.params is None else ", " + ", ".join(it.params)
            parts.append(f"Fix({schedule_text(it.body)}{extra})")
        elif isinstance(it, A.Iter):
            parts.append(f"Iter({'; '.join(it.steps)})")
        else:
            parts.append(str(it))
    return " < ".join(parts)


class Instance:
    """A struct instance. ``cmds`` is stored reversed: the head is ``cmds[-1]``."""

    __slots__ = ("struct", "cmds", "stack", "env")

    def __init__(self, struct: str, cmds: list, stack: list, env: dict):
        self.struct = struct
        self.cmds = cmds
        self.stack = stack
        self.env = env

    def copy(self) -> "Instance":
        return Instance(self.struct, self.cmds[:], self.stack[:], dict(self.env))

    @property
    def commands(self) -> list[Command]:
        """The command list in program order."""
        return self.cmds[::-1]

    def __repr__(self) -> str:
        return f"Instance({self.struct}, cmds={len(self.cmds)}, stack={self.stack}, env={self.env})"


@dataclass(frozen=True)
class ArrayInstance:
    start: int
    size: int


class Machine:
    """Per-program tables shared by every state of one run."""

    def __init__(self, program: ValidatedProgram, strict_null_array: bool = False):
        self.program = program
        self.extensions = program.extensions
        self.paramfix = "param-fix" in program.extensions
        self.strict_null_array = strict_null_array
        self.struct_names = tuple(s.name for s in program.program.structs)
        self.params: dict[str, tuple[str, ...]] = {}
        self.par: dict[str, frozenset[str]] = {}
        self.env0: dict[str, dict[str, Value]] = {}
        self.blocks: dict[tuple[str, str], tuple[Command, ...]] = {}
        self.blocks_rev: dict[tuple[str, str], tuple[Command, ...]] = {}
        for s in program.program.structs:
            self.params[s.name] = s.param_names
            self.par[s.name] = frozenset(s.param_names)
            self.env0[s.name] = {p: default_val(t) for p, t in s.params}
            for step, body in s.steps:
                cmds = tuple(interp_statements(body))
                self.blocks[(s.name, step)] = cmds
                self.blocks_rev[(s.name, step)] = cmds[::-1]
        self._iter_cache: dict[tuple[str, tuple[str, ...]], tuple[Command, ...]] = {}

    def block(self, struct: str, step: str) -> tuple[Command, ...]:
        return self.blocks.get((struct, step), ())

    def iter_block_rev(self, struct: str, steps: tuple[str, ...]) -> tuple[Command, ...]:
        """The reversed concatenation of the struct's blocks for ``steps``."""
        key = (struct, steps)
        got = self._iter_cache.get(key)
        if got is None:
            fwd: tuple[Command, ...] = ()
            for step in steps:
                fwd += self.block(struct, step)
            got = fwd[::-1]
            self._iter_cache[key] = got
        return got

    def fixon_pairs(self, names: tuple[str, ...]) -> frozenset[tuple[str, str]]:
        """(struct, parameter) pairs named by a parameter-specific fixpoint."""
        return frozenset(
            (s, p) for s in self.struct_names for p in names if p in self.par[s]
        )


class ExecState:
    """Schedule, struct environment, stability stack and extension fields.

    ``sf`` runs parallel to ``stab``: ``None`` is an all-true level, otherwise
    the set of relevant (struct, parameter) pairs. ``iters`` counts iterations
    per level. ``busy`` holds the labels with a nonempty command list, so
    ``Done`` is ``not busy``.
    """

    __slots__ = (
        "machine", "schedule", "structs", "arrays", "mem", "stab", "sf", "iters",
        "next_uid", "next_addr", "busy", "access_log", "last_write", "warnings",
    )

    def __init__(self, machine: Machine):
        self.machine = machine
        self.schedule: tuple[SchedEntry, ...] = ()
        self.structs: dict[Label, Instance] = {}
        self.arrays: dict[Label, ArrayInstance] = {}
        self.mem: dict[int, Value] = {}
        self.stab: list[bool] = []
        self.sf: list[Optional[frozenset]] = []
        self.iters: list[int] = []
        self.next_uid = 1
        self.next_addr = 1
        self.busy: set[Label] = set()
        self.access_log: Optional[list] = None
        self.last_write: Optional[tuple] = None
        self.warnings: list[str] = []

    def copy(self) -> "ExecState":
        s = ExecState(self.machine)
        s.schedule = self.schedule
        s.structs = {k: v.copy() for k, v in self.structs.items()}
        s.arrays = dict(self.arrays)
        s.mem = dict(self.mem)
        s.stab = self.stab[:]
        s.sf = self.sf[:]
        s.iters = self.iters[:]
        s.next_uid = self.next_uid
        s.next_addr = self.next_addr
        s.busy = set(self.busy)
        s.warnings = self.warnings[:]
        return s

    def snapshot(self) -> tuple:
        """A hashable view of everything observable in the state."""
        return (
            self.schedule,
            tuple(
                (lab, i.struct, tuple(i.cmds), tuple(_tv(v) for v in i.stack), _env_key(i.env))
                for lab, i in sorted(self.structs.items())
            ),
            tuple(sorted(self.arrays.items())),
            tuple(sorted((k, _tv(v)) for k, v in self.mem.items())),
            tuple(self.stab),
            tuple(self.sf),
        )

    def labels_of(self, struct: str) -> list[Label]:
        return sorted(lab for lab, i in self.structs.items() if i.struct == struct and not lab.is_null)

    def instance(self, label: Label) -> Instance:
        return self.structs[label]


def _tv(v: Value):
    # Tag values by type so True and 1 stay distinct in keys.
    return (type(v).__name__, v)


def _env_key(env: dict) -> tuple:
    return tuple(sorted((k, _tv(v)) for k, v in env.items()))


def initial_state(program: ValidatedProgram | Machine, strict_null_array: bool = False) -> ExecState:
    """The state before any transition: one null instance per struct type."""
    machine = program if isinstance(program, Machine) else Machine(program, strict_null_array)
    st = ExecState(machine)
    st.schedule = tuple(machine.program.schedule)
    for name in machine.struct_names:
        st.structs[null_label(name)] = Instance(name, [], [], dict(machine.env0[name]))
    if "arrays" in machine.extensions:
        st.arrays[NULL_ARRAY] = ArrayInstance(0, 0)
    return st


def done(state: ExecState) -> bool:
    return not state.busy
