"""Iterators: loops that synchronise only on entry and exit.

Between ``IterInit`` and ``IterTerm`` an instance that has finished its block
is topped up with a fresh copy as soon as the innermost stability entry is
false, without waiting for the others.
"""

from __future__ import annotations

from ..engine.semantics import iter_iter_enabled
from ..engine.state import ExecState
from ..ir import Command, Label
from ._apply import apply_schedule


def block(state: ExecState, label: Label, steps: tuple[str, ...]) -> tuple[Command, ...]:
    """The concatenated commands of ``steps`` for the struct of ``label``."""
    struct = state.structs[label].struct
    return state.machine.iter_block_rev(struct, tuple(steps))[::-1]


def iter_init(state: ExecState) -> ExecState:
    return apply_schedule(state, ("IterInit",))


def iter_iter(state: ExecState) -> ExecState:
    return apply_schedule(state, ("IterIter",))


def iter_term(state: ExecState) -> ExecState:
    return apply_schedule(state, ("IterTerm",))


__all__ = ["block", "iter_init", "iter_iter", "iter_term", "iter_iter_enabled"]
