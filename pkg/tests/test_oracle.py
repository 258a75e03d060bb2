import pytest

from effpl.engine import StepLimitExceeded, solve
from effpl.oracle import oracle_solve
from effpl.reader import format_value, parse

PROGRAM = parse("""
p :- writeln(a), shift(k), writeln(b).
t(X) :- reset((writeln(a), shift(k(X)), writeln(b), X = 2), C, S), writeln(S), call(C), call(C).
nd(X) :- shift(pick), (X = 1 ; X = 2).
twice(G, R) :- reset(G, C, S), (S == 0 -> R = done ; call(C), call(C), R = again).
gen(N) :- N > 0, shift(yield(N)), M is N - 1, gen(M).
gen(0).
sum(G, Acc, Out) :- reset(G, C, S), (S == 0 -> Out = Acc ; S = yield(V), A1 is Acc + V, sum(C, A1, Out)).
m(1). m(2). m(3).
loop :- loop.
""")

QUERIES = [
    "reset(p, C, S), call(C)",
    "t(X)",
    "reset(nd(X), C, S), call(C)",
    "twice(nd(X), R)",
    "sum(gen(4), 0, Out)",
    "(m(X) -> true ; X = none)",
    "m(X), \\+ X = 2",
    "reset(((shift(1) -> X = a ; X = b) ; X = c), _, _)",
    "reset((m(X), shift(X)), C, S)",
    "reset(true, C, S)",
]


def run(fn, query, **kw):
    out = []
    res = [{k: format_value(v) for k, v in a.items()} for a in fn(PROGRAM, query, out=out, limit=20, **kw)]
    return "".join(out), res


@pytest.mark.parametrize("query", QUERIES)
def test_engine_agrees_with_meta_interpreter(query):
    assert run(oracle_solve, query) == run(solve, query, unhandled_shift="fail")


def test_generator_sum():
    assert run(oracle_solve, "sum(gen(4), 0, Out)")[1] == [{"Out": "10"}]


def test_top_level_shift_fails():
    assert run(oracle_solve, "shift(x)") == ("", [])


def test_step_budget():
    with pytest.raises(StepLimitExceeded):
        run(oracle_solve, "loop", max_steps=500)
