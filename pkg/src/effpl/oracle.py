"""Reference semantics: a direct transcription of the delimited-control
meta-interpreter, used to cross-check the machine.

``eval2`` corresponds clause by clause to ``eval(Goal, Signal)``; it yields
``OK`` or a ``Shifted(term, cont)`` signal. Every generator restores the
substitution to its entry state before it finishes.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Iterator

from .engine import BUILTINS, EngineError, StepLimitExceeded, run_builtin
from .reader import SourceProgram, parse_goal
from .terms import TRUE, ZERO, Atom, Compound, Substitution, Term, Var, copy_term


class _Ok:
    def __repr__(self) -> str:
        return "ok"


OK = _Ok()


@dataclass
class Shifted:
    term: Term
    cont: Term


class Oracle:
    def __init__(self, program: SourceProgram, out: list[str] | None = None,
                 max_steps: int | None = None):
        self.clauses: dict[tuple[str, int], list] = {}
        for c in program.clauses:
            self.clauses.setdefault(c.key, []).append(c)
        self.out = out if out is not None else []
        self.s = Substitution()
        self.max_steps = max_steps
        self.steps = 0

    def eval2(self, goal: Term) -> Iterator[object]:
        s = self.s
        self.steps += 1
        if self.max_steps is not None and self.steps >= self.max_steps:
            raise StepLimitExceeded(f"step budget of {self.max_steps} exhausted")
        goal = s.walk(goal)
        if type(goal) is Var:
            raise EngineError("call: goal is not sufficiently instantiated")
        if type(goal) is Atom:
            key, args = (goal.name, 0), ()
        elif type(goal) is Compound:
            key, args = (goal.functor, len(goal.args)), goal.args
        else:
            raise EngineError("call: not callable")

        # eval(shift(Term), shift(Term, true)).
        if key == ("shift", 1):
            yield Shifted(args[0], TRUE)
            return

        # eval(reset(G, Cont, Term), ok) :- eval(G, S1), (S1 == ok -> Cont = 0, Term = 0
        #                                               ; S1 = shift(Term, Cont)).
        if key == ("reset", 3):
            for sig in self.eval2(args[0]):
                mark = s.mark()
                if sig is OK:
                    ok = s.unify(args[1], ZERO) and s.unify(args[2], ZERO)
                else:
                    ok = s.unify(args[2], sig.term) and s.unify(args[1], sig.cont)
                if ok:
                    yield OK
                s.undo(mark)
            return

        # eval((G1, G2), S) :- eval(G1, S1), (S1 == ok -> eval(G2, S)
        #                                    ; S1 = shift(T, C), S = shift(T, (C, G2))).
        if key == (",", 2):
            for sig in self.eval2(args[0]):
                if sig is OK:
                    yield from self.eval2(args[1])
                else:
                    yield Shifted(sig.term, Compound(",", (sig.cont, args[1])))
            return

        if key == (";", 2):
            left = s.walk(args[0])
            if type(left) is Compound and left.functor == "->" and len(left.args) == 2:
                yield from self._ite(left.args[0], left.args[1], args[1])
                return
            yield from self.eval2(left)
            yield from self.eval2(args[1])
            return
        if key == ("->", 2):
            yield from self._ite(args[0], args[1], Atom("fail"))
            return
        if key == ("\\+", 1):
            yield from self._ite(args[0], Atom("fail"), TRUE)
            return
        if key == ("call", 1):
            yield from self.eval2(args[0])
            return

        # eval(G, ok) :- builtin(G), call(G).
        if key in BUILTINS and key not in self.clauses:
            mark = s.mark()
            if run_builtin(key, args, s, self.out):
                yield OK
            s.undo(mark)
            return

        # eval(G, S) :- clause(G, Body), eval(Body, S).
        clauses = self.clauses.get(key)
        if clauses is None:
            raise EngineError(f"unknown procedure {key[0]}/{key[1]}")
        for c in clauses:
            mapping: dict[int, Var] = {}
            head = copy_term(c.head, mapping)
            body = copy_term(c.body, mapping)
            mark = s.mark()
            if s.unify(head, goal):
                yield from self.eval2(body)
            s.undo(mark)

    def _ite(self, cond: Term, then: Term, els: Term) -> Iterator[object]:
        s = self.s
        mark = s.mark()
        gen = self.eval2(cond)
        first = next(gen, None)
        if first is None:
            yield from self.eval2(els)
            return
        gen.close()
        if first is OK:
            yield from self.eval2(then)
        # a shift out of the condition fails the whole construct
        s.undo(mark)

    def eval1(self, goal: Term) -> Iterator[None]:
        """``eval(G) :- eval(G, S), (S = shift(_, _) -> fail ; true)``."""
        for sig in self.eval2(goal):
            if sig is OK:
                yield None


def oracle_solve(program: SourceProgram, query, *, out: list[str] | None = None,
                 max_steps: int | None = None, limit: int | None = None) -> Iterator[dict[str, Term]]:
    if isinstance(query, str):
        goal, names = parse_goal(query)
    elif isinstance(query, tuple):
        goal, names = query
    else:
        goal, names = query, {}
    o = Oracle(program, out, max_steps)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        count = 0
        for _ in o.eval1(goal):
            yield {n: o.s.resolve(v) for n, v in names.items() if not n.startswith("_")}
            count += 1
            if limit is not None and count >= limit:
                return
    finally:
        sys.setrecursionlimit(old)
