from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

from .ast import Pos


@dataclass(frozen=True)
class Diagnostic:
    """One frontend finding.

    ``rule`` is ``"rule-1"`` .. ``"rule-6"`` for the numbered well-formedness
    requirements, ``"type"`` for type mismatches, ``"syntax"`` for grammar
    errors and ``"extension"`` when a construct needs a disabled extension.
    """

    rule: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None

    @classmethod
    def at(cls, rule: str, message: str, pos: Optional[Pos]) -> "Diagnostic":
        if pos is None:
            return cls(rule, message)
        return cls(rule, message, pos.line, pos.col)

    def __str__(self) -> str:
        where = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{where}[{self.rule}] {self.message}"


class FrontendError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    def to_json(self) -> str:
        return json.dumps([asdict(d) for d in self.diagnostics], indent=2)


class ParseError(FrontendError):
    def __init__(self, message: str, line: int, col: int, rule: str = "syntax"):
        self.line = line
        self.col = col
        self.rule = rule
        super().__init__([Diagnostic(rule, message, line, col)])


class WellFormednessError(FrontendError):
    """Raised by the checker with every violation found."""
