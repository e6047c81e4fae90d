"""Parameter-specific fixpoints.

Each stability level carries the set of (struct, parameter) pairs it depends
on; a plain fixpoint depends on every pair. A write that changes a parameter
only resets the levels for which that parameter is relevant.
"""

from __future__ import annotations

from dataclasses import replace

from ..engine.state import ExecState
from ..ir import Label
from ..syntax import ast as A
from ._apply import apply_command, apply_schedule


def relevant(state: ExecState, level: int, struct: str, param: str) -> bool:
    """The stability function at ``level`` (0 is the outermost fixpoint)."""
    rel = state.sf[level]
    return rel is None or (struct, param) in rel


def write_with_relevance(state: ExecState, label: Label) -> ExecState:
    """Execute ``label``'s head ``Wr`` under relevance-restricted stability."""
    return apply_command(state, label, ("ComWrN", "ComWrNSkip"))


def fix_init(state: ExecState) -> ExecState:
    """Start the fixpoint at the schedule head and initialise its level."""
    return apply_schedule(state, ("FixInitG", "FixInitS"))


def fix_iter_term_n(state: ExecState) -> ExecState:
    """Iterate or leave the innermost fixpoint, depending on its stability."""
    return apply_schedule(state, ("FixIterN", "FixTermN"))


def fixon_all_params(program: A.Program) -> A.Program:
    """Rewrite every plain ``Fix`` as a fixpoint over all declared parameters."""
    names: list[str] = []
    for s in program.structs:
        for p in s.param_names:
            if p not in names:
                names.append(p)

    def rewrite(items):
        out = []
        for it in items:
            if isinstance(it, A.Fix):
                params = it.params if it.params is not None else tuple(names)
                out.append(replace(it, body=rewrite(it.body), params=params))
            else:
                out.append(it)
        return tuple(out)

    return A.Program(program.structs, rewrite(program.schedule))
