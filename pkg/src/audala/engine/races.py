"""Race detection over the parameter accesses of one step execution.

An access record is ``(accessor, target, location, is_write)`` where
``location`` is a parameter name, or a cell index when ``target`` is an array.
Writes absorbed by null instances never reach the log.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from ..ir import Label

Access = tuple[Label, Label, Union[str, int], bool]


@dataclass(frozen=True)
class RaceReport:
    target: Label
    location: Union[str, int]
    kind: str  # "write-write" or "read-write"
    writers: tuple[Label, ...]
    readers: tuple[Label, ...]

    def to_json(self) -> dict:
        return {
            "target": repr(self.target),
            "location": self.location,
            "kind": self.kind,
            "writers": [repr(x) for x in self.writers],
            "readers": [repr(x) for x in self.readers],
        }


@dataclass
class StepRaces:
    """Races found in one step execution (Init transition up to the first Done)."""

    window: int
    step: str
    races: list[RaceReport] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"window": self.window, "step": self.step, "races": [r.to_json() for r in self.races]}


def detect_races(accesses: Iterable[Access]) -> list[RaceReport]:
    """Report each location touched by two distinct instances with a write among them."""
    readers: dict[tuple, set[Label]] = {}
    writers: dict[tuple, set[Label]] = {}
    for accessor, target, loc, is_write in accesses:
        key = (target, loc)
        (writers if is_write else readers).setdefault(key, set()).add(accessor)
    out = []
    for key in sorted(writers, key=lambda k: (k[0], str(k[1]))):
        w = writers[key]
        r = readers.get(key, set())
        if len(w) >= 2:
            kind = "write-write"
        elif r - w:
            kind = "read-write"
        else:
            continue
        out.append(RaceReport(key[0], key[1], kind, tuple(sorted(w)), tuple(sorted(r))))
    return out
