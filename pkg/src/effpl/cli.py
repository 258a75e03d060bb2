"""Command-line front end: ``effpl run``, ``effpl emit`` and ``effpl bench``.

Exit status is 0 on success, 1 for an error in the program being processed
(unreadable file, syntax error, runtime error) and 2 for bad usage.
"""

from __future__ import annotations

import argparse
import sys

from .effects import analyze_program, format_effects
from .elaborator import ElaborationError
from .engine import Database, EngineError, solve
from .optimizer import LEVELS, compile_program
from .reader import ReaderError, format_program, format_term, format_value, parse, parse_goal
from .terms import CyclicTermError, term_vars

STAGES = ("source", "elaborated", "effects", "rewritten", "optimized")


class _Echo:
    """Output sink that writes engine output straight through."""

    def __init__(self, stream):
        self.stream = stream

    def append(self, text: str) -> None:
        self.stream.write(text)
        self.stream.flush()


def _read(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise _ProgramError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse(text)
    except ReaderError as e:
        raise _ProgramError(f"{path}:{e}") from None


class _ProgramError(Exception):
    pass


def _print_trace(label: str, trace, stream) -> None:
    for step in trace:
        stream.write(f"% {label}: {step.rule}: {format_term(step.redex)}\n")
        stream.write(f"%   ==> {format_term(step.contractum)}\n")
    if trace.truncated:
        stream.write(f"% {label}: step limit reached\n")


def _traces(compiled, stream) -> None:
    for i, trace in sorted(compiled.traces.items()):
        key = compiled.source.clauses[i].key
        _print_trace(f"{key[0]}/{key[1]}", trace, stream)
    if compiled.query_trace is not None:
        _print_trace("query", compiled.query_trace, stream)
    if compiled.pe is not None:
        for sc in compiled.pe.clauses:
            _print_trace(sc.record.generated_name, sc.trace, stream)


def cmd_run(args, out) -> int:
    program = _read(args.file)
    try:
        goal, names = parse_goal(args.query)
    except ReaderError as e:
        raise _ProgramError(f"query:{e}") from None
    compiled = compile_program(program, goal, args.opt, names=names)
    if args.trace_rewrites:
        _traces(compiled, sys.stderr)
    # report only variables that still mean something after elaboration
    live = {v.id for v in term_vars(compiled.query)}
    shown = {n: v for n, v in names.items() if not n.startswith("_") and v.id in live}
    answers = solve(Database(compiled.elaborated), (compiled.query, shown), out=_Echo(out),
                    max_steps=args.max_steps, limit=args.limit)
    found = False
    for answer in answers:
        if found:
            out.write(" ;\n")
        found = True
        text = ",\n".join(f"{n} = {format_value(t)}" for n, t in answer.items())
        out.write(text or "true")
        out.flush()
    out.write(".\n" if found else "false.\n")
    return 0


def cmd_emit(args, out) -> int:
    program = _read(args.file)
    query = None
    names = None
    if args.query:
        try:
            query, names = parse_goal(args.query)
        except ReaderError as e:
            raise _ProgramError(f"query:{e}") from None
    if args.stage == "source":
        out.write(format_program(program))
        return 0
    if args.stage == "effects":
        out.write(format_effects(analyze_program(program)))
        return 0
    level = {"elaborated": "none", "rewritten": "rewrite", "optimized": "full"}[args.stage]
    compiled = compile_program(program, query, level, names=names)
    if args.trace_rewrites:
        _traces(compiled, out)
    out.write(format_program(compiled.elaborated))
    if compiled.query is not None:
        out.write(f"?- {format_term(compiled.query)}.\n")
    return 0


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size list: {text!r}") from None
    if not sizes or any(n < 0 for n in sizes):
        raise argparse.ArgumentTypeError(f"not a size list: {text!r}")
    return sizes


def cmd_bench(args, out) -> int:
    from .bench import SUITES, format_report, run_bench, write_json

    if args.suite not in SUITES and args.suite not in SUITES["all"]:
        out.write(f"unknown suite {args.suite!r}\n")
        return 2
    reports = run_bench(args.suite, sizes=args.sizes, reps=args.reps, parallel=args.parallel)
    out.write(format_report(reports) + "\n")
    if args.json:
        write_json(reports, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="effpl", description="Prolog with algebraic effect handlers.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a query and print its answers")
    run.add_argument("file")
    run.add_argument("-q", "--query", required=True)
    run.add_argument("--opt", choices=LEVELS, default="none")
    run.add_argument("--limit", type=int, default=None, help="stop after this many answers")
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--trace-rewrites", action="store_true", help="print rewrite steps to stderr")
    run.set_defaults(func=cmd_run)

    emit = sub.add_parser("emit", help="print the program at a pipeline stage")
    emit.add_argument("file")
    emit.add_argument("--stage", choices=STAGES, required=True)
    emit.add_argument("-q", "--query", default=None, help="optimize this query along with the program")
    emit.add_argument("--trace-rewrites", action="store_true", help="print rewrite steps as comments")
    emit.set_defaults(func=cmd_emit)

    bench = sub.add_parser("bench", help="run a benchmark suite (table1, table2, all, or one program)")
    bench.add_argument("suite")
    bench.add_argument("--sizes", type=_sizes, default=[1000, 10000, 100000])
    bench.add_argument("--reps", type=int, default=5)
    bench.add_argument("--json", default=None, metavar="PATH")
    bench.add_argument("--parallel", action="store_true", help="run programs on worker threads")
    bench.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "reps", 1) < 1:
        ap.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args, out)
    except _ProgramError as e:
        sys.stderr.write(f"error: {e}\n")
    except (EngineError, CyclicTermError, ElaborationError, ReaderError, RecursionError) as e:
        sys.stderr.write(f"error: {e}\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
