"""Shared helpers: run a query at an optimization level and capture its transcript."""

from effpl.bench import corpus_source
from effpl.engine import Database, solve
from effpl.optimizer import compile_program
from effpl.oracle import oracle_solve
from effpl.reader import format_value, parse, parse_goal
from effpl.terms import term_vars

HW = corpus_source("hw")


def compile_query(src, query, level="none"):
    program = parse(src) if isinstance(src, str) else src
    goal, names = parse_goal(query)
    compiled = compile_program(program, goal, level, names=names)
    live = {v.id for v in term_vars(compiled.query)}
    shown = {n: v for n, v in names.items() if not n.startswith("_") and v.id in live}
    return compiled, shown


def _texts(answers):
    return [{k: format_value(v) for k, v in a.items()} for a in answers]


def transcript(src, query, level="none", limit=10, max_steps=None, **kw):
    """``(printed text, answers)`` from the engine on the compiled program."""
    compiled, names = compile_query(src, query, level)
    out = []
    answers = list(solve(Database(compiled.elaborated), (compiled.query, names), out=out,
                         limit=limit, max_steps=max_steps, **kw))
    return "".join(out), _texts(answers)


def oracle_transcript(src, query, limit=10, max_steps=None):
    """The same, from the meta-interpreter on the elaborated program."""
    compiled, names = compile_query(src, query, "none")
    out = []
    answers = list(oracle_solve(compiled.elaborated, (compiled.query, names), out=out,
                                limit=limit, max_steps=max_steps))
    return "".join(out), _texts(answers)


# (query, printed text, answers) for the introductory handler examples
TRANSCRIPTS = [
    ("handle hw with (out(X) -> true)", "", [{}]),
    ("handle hw with (out(X) -> writeln(X))", "hello\n", [{}]),
    ("handle hw with (out(X) -> writeln(X), continue)", "hello\nworld\n", [{}]),
    ("handle hw with (out(X) -> continue, writeln(X), continue)", "world\nhello\nworld\n", [{}]),
    ("handle hw with (out(X) -> writeln(X), continue) finally (writeln(done))",
     "hello\nworld\ndone\n", [{}]),
    ("handle hw with (out(X) -> writeln(X)) finally (writeln(done))", "hello\n", [{}]),
    ("handle hw with (out(X) -> Lin = [X|Lmid], continue(Lmid,Lout)) "
     "finally (Lin=Lout) for (Lin = List, Lout=[])", "", [{"List": "[hello,world]"}]),
    ("chooseAny(or(X = 1, X = 2))", "", [{"X": "1"}, {"X": "2"}]),
    ("chooseAny(flip(or(X = 1, X = 2)))", "", [{"X": "2"}, {"X": "1"}]),
    ("chooseAny(writeOut(or(out(hello), out(world)))), fail", "hello\nworld\n", []),
]
