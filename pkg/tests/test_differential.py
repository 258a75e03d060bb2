"""Differential checks on generated programs: the three optimization levels and
the meta-interpreter must print the same text and give the same answers."""

import pytest
from helpers import compile_query, oracle_transcript, transcript
from progen import corpus, generate

from effpl.engine import StepLimitExceeded
from effpl.terms import CyclicTermError

N_PROGRAMS = 200
BUDGET = 100_000
LEVELS = ("none", "rewrite", "full")


def outcome(fn, *args, **kw):
    try:
        return fn(*args, limit=10, max_steps=BUDGET, **kw)
    except StepLimitExceeded:
        return "step-limit"
    except CyclicTermError:
        # printing or answering a term unified with something containing itself
        return "cyclic"


def compare_levels(g):
    runs = {lvl: outcome(transcript, g.source, g.query, lvl, unhandled_shift="fail") for lvl in LEVELS}
    if "step-limit" in runs.values():
        return None
    return runs


@pytest.mark.parametrize("chunk", range(4))
def test_levels_agree(chunk):
    size = N_PROGRAMS // 4
    compared = 0
    for g in corpus(size, start=chunk * size):
        runs = compare_levels(g)
        if runs is None:
            continue
        compared += 1
        assert runs["rewrite"] == runs["none"], (g.seed, g.source, g.query)
        assert runs["full"] == runs["none"], (g.seed, g.source, g.query)
    assert compared >= size * 0.8


@pytest.mark.parametrize("chunk", range(4))
def test_engine_agrees_with_oracle(chunk):
    size = N_PROGRAMS // 4
    compared = 0
    for g in corpus(size, start=chunk * size):
        a = outcome(transcript, g.source, g.query, "none", unhandled_shift="fail")
        b = outcome(oracle_transcript, g.source, g.query)
        if "step-limit" in (a, b):
            continue
        compared += 1
        assert a == b, (g.seed, g.source, g.query)
    assert compared >= size * 0.8


def test_generator_covers_resumption_counts():
    seen = set()
    for g in corpus(N_PROGRAMS):
        seen |= g.continues
    assert seen == {0, 1, 2}


MULTISHOT = [(seed, k) for k in (0, 1, 2) for seed in range(1000, 1030)]


@pytest.mark.parametrize("seed, resumptions", MULTISHOT)
def test_multishot_suite_agrees_with_oracle(seed, resumptions):
    # every op clause of the program resumes exactly `resumptions` times
    g = generate(seed, continues=(resumptions,))
    expected = outcome(oracle_transcript, g.source, g.query)
    if expected == "step-limit":
        pytest.skip("oracle over budget")
    for lvl in LEVELS:
        got = outcome(transcript, g.source, g.query, lvl, unhandled_shift="fail")
        if got != "step-limit":
            assert got == expected, (lvl, g.source, g.query)


def test_merge_never_fires_on_multishot_clauses():
    from effpl.effects import analyze_program
    from effpl.goals import as_handler, count_continues
    from effpl.reader import parse, parse_goal
    from effpl.rewrite import rewrite_fixpoint
    merges = 0
    for seed in range(1000, 1100):
        g = generate(seed, continues=(0, 1, 2))
        p = parse(g.source)
        env = analyze_program(p)
        for goal in [c.body for c in p.clauses] + [parse_goal(g.query)[0]]:
            for st in rewrite_fixpoint(goal, env)[1]:
                if st.rule != "O-Merge":
                    continue
                merges += 1
                h = as_handler(st.redex)
                for hh in (h, as_handler(h.handled_goal)):
                    assert all(count_continues(b) <= 1 for _, b in hh.op_clauses), g.seed
    assert merges > 0


def test_corpus_exercises_specialization():
    specialized = printed = 0
    for g in corpus(60):
        compiled, _ = compile_query(g.source, g.query, "full")
        specialized += bool(compiled.pe.records)
        run = outcome(transcript, g.source, g.query, "none", unhandled_shift="fail")
        printed += not isinstance(run, str) and bool(run[0])
    assert specialized >= 20 and printed >= 20
