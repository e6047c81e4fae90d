from __future__ import annotations

import json
from importlib.resources import as_file, files

import pytest

import audala.tm as tm_module
from audala.cli import main

LISTING1_OUT = """\
#1 Edge(in=#5, out=#6)
#2 Edge(in=#5, out=#7)
#3 Edge(in=#6, out=#7)
#4 Edge(in=#7, out=#8)
#5 Node(reach=true)
#6 Node(reach=true)
#7 Node(reach=true)
#8 Node(reach=true)
"""


@pytest.fixture
def corpus():
    with as_file(files("audala.corpus")) as path:
        yield path


def test_run_listing1(corpus, capsys):
    assert main(["run", str(corpus / "listing1.adl")]) == 0
    out, err = capsys.readouterr()
    assert out == LISTING1_OUT
    assert err == "Completed after 182 transitions\n"


@pytest.mark.parametrize("policy", ["sequential", "random"])
def test_run_other_policies_same_output(corpus, capsys, policy):
    assert main(["run", str(corpus / "listing1.adl"), "--policy", policy, "--seed", "4"]) == 0
    assert capsys.readouterr().out == LISTING1_OUT


def test_run_iter_schedule(corpus, capsys):
    assert main(["run", str(corpus / "listing11.adl"), "--ext", "iter", "--seed", "1"]) == 0
    assert capsys.readouterr().out == LISTING1_OUT


def test_listing8_exit_2(corpus, capsys):
    assert main(["run", str(corpus / "listing8.adl"), "--max-fixpoint-iterations", "1000"]) == 2
    assert "DivergenceSuspected" in capsys.readouterr().err


def test_listing9_exit_0(corpus, capsys):
    assert main(["run", str(corpus / "listing9.adl"), "--ext", "param-fix"]) == 0
    assert capsys.readouterr().err.startswith("Completed")


def test_listing10_needs_extension(corpus, capsys):
    assert main(["run", str(corpus / "listing10.adl")]) == 1
    assert "[extension]" in capsys.readouterr().err
    assert main(["run", str(corpus / "listing10.adl"), "--ext", "arrays"]) == 0
    out = capsys.readouterr().out
    assert "Array[" in out and out.count("reach=true") == 4


def test_runtime_fault_exit_4(tmp_path, capsys):
    f = tmp_path / "div.adl"
    f.write_text("struct S (x: Int) { f { x := 1 / x; } init { S(0); } }\ninit < f")
    assert main(["run", str(f)]) == 4
    assert "DivisionByZero" in capsys.readouterr().err


def test_missing_file_and_bad_flags(capsys):
    assert main(["run", "/no/such/file.adl"]) == 1
    assert main(["run", "x.adl", "--ext", "bogus"]) == 1
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_trace_and_race_report(corpus, tmp_path, capsys):
    trace, report = tmp_path / "t.jsonl", tmp_path / "r.json"
    code = main(["run", str(corpus / "listing1.adl"), "--trace", str(trace),
                 "--race-check", "--race-report", str(report)])
    assert code == 0
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert len(events) == 182 and events[0] == {"index": 1, "rule": "InitG", "stab": [], "idle": True, "loaded": ["null<Edge>"]}
    races = json.loads(report.read_text())
    assert {"window": 2, "step": "reachability", "target": "#3", "location": "reach",
            "kind": "write-write", "writers": ["#6", "#7"], "readers": ["#8"]} in races
    assert capsys.readouterr().out == LISTING1_OUT


def test_race_check_command(corpus, capsys):
    assert main(["race-check", str(corpus / "listing6.adl")]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_dump_ir(corpus, capsys):
    assert main(["dump-ir", str(corpus / "listing1.adl"), "--step", "Edge.reachability"]) == 0
    assert capsys.readouterr().out == (
        "Push(this)\nRd(in)\nRd(reach)\nPush(true)\nOp(=)\nIf\n"
        "  Push(true)\n  Push(this)\n  Rd(out)\n  Wr(reach)\n"
    )
    assert main(["dump-ir", str(corpus / "listing1.adl"), "--step", "Edge.nope"]) == 1
    assert main(["dump-ir", str(corpus / "listing1.adl"), "--step", "nodot"]) == 1
    assert main(["dump-ir", str(corpus / "listing1.adl")]) == 0
    out = capsys.readouterr().out
    assert "Edge.reachability:\n  Push(this)" in out and "Node.reachability:" not in out


def test_check(corpus, capsys):
    assert main(["check", str(corpus / "listing9.adl"), "--ext", "param-fix"]) == 0
    assert capsys.readouterr().out == "ok\n"
    assert main(["check", str(corpus / "listing9.adl"), "--json"]) == 1
    (diag,) = json.loads(capsys.readouterr().out)
    assert diag["rule"] == "extension" and diag["line"] == 50


def test_compile_tm(corpus, tmp_path, capsys):
    assert main(["compile-tm", str(corpus / "tex.json")]) == 0
    out = capsys.readouterr().out
    assert out.endswith("init < Fix(transition)\n")
    target = tmp_path / "tm.adl"
    assert main(["compile-tm", str(corpus / "tex.json"), "-o", str(target)]) == 0
    assert target.read_text() == out


def test_diff_check(corpus, capsys):
    assert main(["diff-check", str(corpus / "tex.json")]) == 0
    assert capsys.readouterr().out == "Agreement: halted in state 1 after 3 step(s), accepting=true\n"


def test_diff_check_divergence_exit_5(corpus, capsys, monkeypatch):
    honest = tm_module.compile_tm
    monkeypatch.setattr(tm_module, "compile_tm", lambda m, t: honest(m, t).replace("state := 1;", "state := 0;"))
    assert main(["diff-check", str(corpus / "tex.json"), "--policy", "sequential"]) == 5
    assert capsys.readouterr().out.startswith("Divergence:")


def test_empty_tm_input_is_an_error(tmp_path, capsys):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"states": [0], "delta": [], "input": []}))
    assert main(["compile-tm", str(f)]) == 1
    assert "empty" in capsys.readouterr().err
