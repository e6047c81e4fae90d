"""Scheduler policies: which enabled transition to take next."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class LockstepRoundRobin:
    """Every busy instance executes one command per round, in label order."""

    name: str = field(default="lockstep", init=False)


@dataclass(frozen=True)
class SeededRandom:
    """Uniform choice among enabled transitions, reproducible from ``seed``."""

    seed: int = 0
    name: str = field(default="random", init=False)

    def rng(self) -> random.Random:
        return random.Random(self.seed)


@dataclass(frozen=True)
class SequentialByLabel:
    """The lowest busy label runs until its command list is empty."""

    name: str = field(default="sequential", init=False)


Policy = LockstepRoundRobin | SeededRandom | SequentialByLabel


def make_policy(name: str, seed: Optional[int] = None) -> Policy:
    if name == "lockstep":
        return LockstepRoundRobin()
    if name == "random":
        return SeededRandom(0 if seed is None else seed)
    if name == "sequential":
        return SequentialByLabel()
    raise ValueError(f"unknown policy {name!r}")
