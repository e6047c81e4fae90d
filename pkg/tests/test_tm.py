from __future__ import annotations

import json
import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from audala.engine.policies import LockstepRoundRobin, SeededRandom, SequentialByLabel
from audala.engine.runner import Runner
from audala.syntax.parser import parse_program
from audala.tm import (
    CompileError, Halt, MalformedWorld, NotIdle, TMConfiguration, TuringMachine, compile_tm,
    differential_check, extract_configuration, initial_configuration, random_tm, simulate, tm_step,
)
from audala.syntax.checker import load_program

from conftest import corpus_text


@pytest.fixture
def tex():
    return TuringMachine.from_json(json.loads(corpus_text("tex.json")))


def cfg(state, cells):
    return TMConfiguration.make(state, cells)


# -- oracle --------------------------------------------------------------------------


def test_step_right():
    tm = TuringMachine(frozenset({0, 2}), frozenset(), {(0, 1): (2, 5, "R")})
    assert tm_step(cfg(0, {0: 1, 1: 7, -1: 3}), tm) == cfg(2, {-1: 5, 0: 7, -2: 3})


def test_step_left():
    tm = TuringMachine(frozenset({0, 2}), frozenset(), {(0, 1): (2, 5, "L")})
    assert tm_step(cfg(0, {0: 1, 1: 7}), tm) == cfg(2, {1: 5, 2: 7})


def test_step_writes_blank_and_halts():
    tm = TuringMachine(frozenset({0}), frozenset({0}), {(0, 1): (0, 0, "R")})
    c = tm_step(cfg(0, {0: 1}), tm)
    assert c == cfg(0, {})
    assert tm_step(c, tm) == Halt(c, True)


def test_example_machine_oracle(tex):
    tm, tape = tex
    configs, halt = simulate(tm, tape, 50)
    assert len(configs) == 4
    assert configs[0] == cfg(0, {0: 1, 1: 1, 2: 2, 3: 1})
    assert halt == Halt(cfg(1, {-3: 1, -2: 1, -1: 2, 0: 1}), True)


def test_simulate_respects_bound():
    tm = TuringMachine(frozenset({0}), frozenset(), {(0, 0): (0, 0, "R"), (0, 1): (0, 1, "R")})
    configs, halt = simulate(tm, [1], 5)
    assert halt is None and len(configs) == 6


# -- compiler --------------------------------------------------------------------------


def _strip_trailing_comments(text):
    return "\n".join(re.sub(r"([;)])\s*//.*$", r"\1", line) for line in text.splitlines())


def test_compile_reproduces_listing(tex):
    out = compile_tm(*tex)
    listing = corpus_text("listing6.adl")
    assert _strip_trailing_comments(out) == _strip_trailing_comments(listing)
    assert parse_program(out) == parse_program(listing)


def test_compile_left_moves():
    tm = TuringMachine(frozenset({0}), frozenset(), {(0, 1): (0, 2, "L")})
    out = compile_tm(tm, [1])
    assert "head.left := TapeCell(null, head, 0);" in out
    assert "head := head.left;" in out
    load_program(out)


def test_compile_without_transitions():
    tm = TuringMachine(frozenset({0}), frozenset({0}), {}, frozenset({1}))
    out = compile_tm(tm, [1, 1])
    assert "transition {\n\t}" in out
    v = differential_check(tm, [1, 1])
    assert v.agreement and v.halted and v.steps == 0 and v.accepting is True


def test_compile_rejects_bad_input():
    tm = TuringMachine(frozenset({0}), frozenset(), {}, frozenset({1}))
    with pytest.raises(CompileError):
        compile_tm(tm, [])
    with pytest.raises(CompileError):
        compile_tm(tm, [2])
    with pytest.raises(CompileError):
        compile_tm(tm, [0])


def test_json_round_trip(tex):
    tm, tape = tex
    assert TuringMachine.from_json(json.loads(tm.to_json(tape))) == (tm, tape)
    with pytest.raises(ValueError):
        TuringMachine.from_json({"delta": [[0, 1, 0, 1, "X"]]})
    with pytest.raises(ValueError):
        TuringMachine.from_json({"delta": [[0, 1, 0, 1, "L"], [0, 1, 0, 2, "R"]]})


# -- extraction --------------------------------------------------------------------------


def test_extract_initial(tex):
    program = load_program(compile_tm(*tex))
    s = Runner(program, observer=lambda st, r: r == "FixInit").run().state
    assert extract_configuration(s) == initial_configuration(tex[1])


def test_extract_errors(tex):
    program = load_program(compile_tm(*tex))
    fresh = Runner(program, observer=lambda st, r: True).run().state
    with pytest.raises(MalformedWorld):
        extract_configuration(fresh)
    busy = Runner(program, observer=lambda st, r: r == "FixInit").run().state
    lab = busy.labels_of("Control")[0]
    busy.structs[lab].cmds = list(busy.machine.blocks_rev[("Control", "transition")])
    busy.busy.add(lab)
    with pytest.raises(NotIdle):
        extract_configuration(busy)


# -- differential checks ------------------------------------------------------------------


def test_example_agrees(tex):
    v = differential_check(*tex)
    assert str(v) == "Agreement: halted in state 1 after 3 step(s), accepting=true"
    assert v.configs[:4] == simulate(*tex, 50)[0]


def test_every_iteration_matches_one_step(tex):
    tm, tape = tex
    v = differential_check(tm, tape, policy=SeededRandom(3), race_check=True)
    assert v.agreement and v.racy_windows == 0
    assert v.race_windows == 1 + len(v.configs) - 1


def test_non_halting_machine_within_bound():
    tm = TuringMachine(frozenset({0}), frozenset(), {(0, 0): (0, 1, "R"), (0, 1): (0, 1, "R")})
    v = differential_check(tm, [1], bound=8)
    assert v.agreement and not v.halted
    assert str(v) == "Agreement: no halt within 8 step(s), state 0"


def test_divergence_is_reported(monkeypatch):
    import audala.tm as tm_module

    tm = TuringMachine(frozenset({0, 1}), frozenset({1}), {(0, 1): (1, 2, "R")})
    honest = tm_module.compile_tm
    monkeypatch.setattr(
        tm_module, "compile_tm",
        lambda m, tape: honest(m, tape).replace("head.symbol := 2;", "head.symbol := 3;"),
    )
    v = differential_check(tm, [1])
    assert not v.agreement
    assert str(v).startswith("Divergence: after 1 step(s)")


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.sampled_from(["lockstep", "sequential", "random"]))
def test_random_machines_agree(seed, policy_name):
    rng = random.Random(seed)
    tm, tape = random_tm(rng)
    policy = {"lockstep": LockstepRoundRobin(), "sequential": SequentialByLabel(), "random": SeededRandom(seed)}[policy_name]
    v = differential_check(tm, tape, bound=25, policy=policy)
    assert v.agreement, v.detail
    _, halt = simulate(tm, tape, 25)
    assert v.halted == (halt is not None)
    if halt is not None:
        assert v.accepting == halt.accepting and v.state == halt.config.state
