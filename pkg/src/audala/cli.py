"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .engine.canon import canonicalize
from .engine.policies import make_policy
from .engine.runner import Limits, Runner
from .engine.state import ExecState, Machine
from .ir import render, render_value
from .syntax.checker import ValidatedProgram, load_program
from .syntax.errors import Diagnostic, FrontendError
from .syntax.parser import EXTENSIONS
from .tm import CompileError, TuringMachine, compile_tm, differential_check

EXIT_FRONTEND = 1
EXIT_DIVERGENT_TM = 5


@dataclass(frozen=True)
class RunConfig:
    path: Path
    policy: str = "lockstep"
    seed: Optional[int] = None
    extensions: frozenset[str] = frozenset()
    limits: Limits = Limits()
    trace_path: Optional[Path] = None
    race_check: bool = False
    race_report_path: Optional[Path] = None
    strict_null_array: bool = False


def _extensions(text: Optional[str]) -> frozenset[str]:
    if not text:
        return frozenset()
    names = frozenset(x.strip() for x in text.split(",") if x.strip())
    unknown = names - EXTENSIONS
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown extension(s) {', '.join(sorted(unknown))}; choose from {', '.join(sorted(EXTENSIONS))}"
        )
    return names


def _load(path: Path, extensions: frozenset[str]) -> ValidatedProgram:
    return load_program(path.read_text(encoding="utf-8"), extensions)


def format_instances(state: ExecState) -> str:
    """Non-null instances with their parameters, in canonical label order."""
    canon = canonicalize(state)
    params = state.machine.params
    lines = []
    for lab, inst in canon.structs.items():
        if lab.is_null:
            continue
        fields = ", ".join(f"{p}={render_value(inst.env[p])}" for p in params[inst.struct])
        lines.append(f"{lab!r} {inst.struct}({fields})")
    for lab, arr in canon.arrays.items():
        if lab.is_null:
            continue
        cells = ", ".join(render_value(canon.mem[a]) for a in range(arr.start, arr.start + arr.size))
        lines.append(f"{lab!r} Array[{cells}]")
    return "\n".join(lines)


def _race_json(races) -> str:
    flat = []
    for window in races:
        for r in window.races:
            flat.append({"window": window.window, "step": window.step, **r.to_json()})
    return json.dumps(flat, indent=2)


def cmd_run(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    program = _load(cfg.path, cfg.extensions)
    runner = Runner(
        Machine(program, cfg.strict_null_array),
        make_policy(cfg.policy, cfg.seed),
        cfg.limits,
        trace=cfg.trace_path is not None,
        race_check=cfg.race_check,
    )
    result = runner.run()
    text = format_instances(result.state)
    if text:
        print(text, file=out)
    if cfg.trace_path is not None:
        cfg.trace_path.write_text("".join(e.to_json() + "\n" for e in result.trace), encoding="utf-8")
    if cfg.race_check:
        report = _race_json(result.races)
        if cfg.race_report_path is not None:
            cfg.race_report_path.write_text(report + "\n", encoding="utf-8")
        else:
            print(report, file=err)
    for w in result.state.warnings:
        print(f"warning: {w}", file=err)
    suffix = f": {result.message}" if result.message else ""
    print(f"{result.status} after {result.transitions} transitions{suffix}", file=err)
    return result.exit_code


def cmd_race_check(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    program = _load(cfg.path, cfg.extensions)
    result = Runner(
        Machine(program, cfg.strict_null_array), make_policy(cfg.policy, cfg.seed), cfg.limits,
        race_check=True,
    ).run()
    print(_race_json(result.races), file=out)
    if result.status != "Completed":
        print(f"{result.status}: {result.message}", file=err)
    return result.exit_code


def cmd_dump_ir(path: Path, step: Optional[str], extensions: frozenset[str], out=None) -> int:
    out = out or sys.stdout
    machine = Machine(_load(path, extensions))
    if step is not None:
        struct, _, name = step.partition(".")
        if (struct, name) not in machine.blocks:
            raise FrontendError([Diagnostic("type", f"no step {step!r} in this program")])
        print(render(machine.blocks[(struct, name)]), file=out)
        return 0
    for (struct, name), cmds in machine.blocks.items():
        print(f"{struct}.{name}:", file=out)
        body = render(cmds, 1)
        if body:
            print(body, file=out)
    return 0


def _read_tm(path: Path) -> tuple[TuringMachine, list[int]]:
    return TuringMachine.from_json(json.loads(path.read_text(encoding="utf-8")))


def cmd_compile_tm(path: Path, output: Optional[Path], out=None) -> int:
    out = out or sys.stdout
    tm, tape = _read_tm(path)
    text = compile_tm(tm, tape)
    if output is None:
        out.write(text)
    else:
        output.write_text(text, encoding="utf-8")
    return 0


def cmd_diff_check(path: Path, steps: int, policy: str, seed: Optional[int], out=None) -> int:
    out = out or sys.stdout
    tm, tape = _read_tm(path)
    verdict = differential_check(tm, tape, steps, make_policy(policy, seed))
    print(verdict, file=out)
    return 0 if verdict.agreement else EXIT_DIVERGENT_TM


def cmd_check(path: Path, extensions: frozenset[str], as_json: bool, out=None) -> int:
    out = out or sys.stdout
    try:
        _load(path, extensions)
    except FrontendError as e:
        print(e.to_json() if as_json else str(e), file=out)
        return EXIT_FRONTEND
    print("[]" if as_json else "ok", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="audala", description="AuDaLa reference interpreter")
    sub = p.add_subparsers(dest="command", required=True)

    def engine_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("file", type=Path)
        sp.add_argument("--policy", choices=["lockstep", "random", "sequential"], default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--ext", type=_extensions, default=frozenset(), help="comma list of param-fix, iter, arrays")
        sp.add_argument("--max-fixpoint-iterations", type=int, default=Limits.max_fix_iterations)
        sp.add_argument("--max-transitions", type=int, default=Limits.max_transitions)
        sp.add_argument("--strict-null-array", action="store_true")

    run_p = sub.add_parser("run", help="execute a program")
    engine_flags(run_p)
    run_p.add_argument("--trace", type=Path, default=None, help="write a JSON Lines trace")
    run_p.add_argument("--race-check", action="store_true")
    run_p.add_argument("--race-report", type=Path, default=None)

    race_p = sub.add_parser("race-check", help="print races of every step execution as JSON")
    engine_flags(race_p)

    ir_p = sub.add_parser("dump-ir", help="print the command lists of steps")
    ir_p.add_argument("file", type=Path)
    ir_p.add_argument("--step", default=None, help="Struct.step")
    ir_p.add_argument("--ext", type=_extensions, default=frozenset())

    ctm = sub.add_parser("compile-tm", help="compile a Turing machine to AuDaLa")
    ctm.add_argument("tm", type=Path)
    ctm.add_argument("-o", "--output", type=Path, default=None)

    dc = sub.add_parser("diff-check", help="compare a compiled machine with the oracle")
    dc.add_argument("tm", type=Path)
    dc.add_argument("--steps", type=int, default=50)
    dc.add_argument("--policy", choices=["lockstep", "random", "sequential"], default=None)
    dc.add_argument("--seed", type=int, default=None)

    chk = sub.add_parser("check", help="parse and check well-formedness")
    chk.add_argument("file", type=Path)
    chk.add_argument("--ext", type=_extensions, default=frozenset())
    chk.add_argument("--json", action="store_true")
    return p


def _policy_name(args) -> str:
    if args.policy is not None:
        return args.policy
    return "random" if args.seed is not None else "lockstep"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse uses 2 for usage errors, which would read as divergence.
        return EXIT_FRONTEND if e.code == 2 else int(e.code or 0)
    try:
        if args.command in ("run", "race-check"):
            cfg = RunConfig(
                path=args.file,
                policy=_policy_name(args),
                seed=args.seed,
                extensions=args.ext,
                limits=Limits(args.max_fixpoint_iterations, args.max_transitions),
                trace_path=getattr(args, "trace", None),
                race_check=getattr(args, "race_check", False),
                race_report_path=getattr(args, "race_report", None),
                strict_null_array=args.strict_null_array,
            )
            return cmd_run(cfg) if args.command == "run" else cmd_race_check(cfg)
        if args.command == "dump-ir":
            if args.step is not None and "." not in args.step:
                print("error: --step expects Struct.step", file=sys.stderr)
                return EXIT_FRONTEND
            return cmd_dump_ir(args.file, args.step, args.ext)
        if args.command == "compile-tm":
            return cmd_compile_tm(args.tm, args.output)
        if args.command == "diff-check":
            return cmd_diff_check(args.tm, args.steps, _policy_name(args), args.seed)
        if args.command == "check":
            return cmd_check(args.file, args.ext, args.json)
    except FrontendError as e:
        print(str(e), file=sys.stderr)
        return EXIT_FRONTEND
    except (OSError, ValueError, CompileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FRONTEND
    return EXIT_FRONTEND


if __name__ == "__main__":
    sys.exit(main())
