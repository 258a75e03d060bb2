"""Translate effect declarations and handler goals into reset/shift code.

``:- effect op/n`` becomes ``op(X1,...,Xn) :- shift(op(X1,...,Xn))``. A handler
goal becomes a call ``h(G0, T1, ..., Tn)`` to a fresh auxiliary predicate::

    h(Goal, P1, ..., Pn) :-
        reset(Goal, Cont, Signal),
        (   Signal == 0 -> Finally
        ;   Signal = op1(...) -> Body1'
        ;   ...
        ;   shift(Signal), h(Cont, P1, ..., Pn)
        ).

where each ``continue(S1,...,Sn)`` in ``Body_i`` becomes ``h(Cont, S1,...,Sn)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .goals import (
    HandlerSpec, as_handler, continue_args, is_continue, is_control, is_handler,
    replace_continues, subgoals,
)
from .reader import Clause, SourceProgram
from .terms import ZERO, Compound, Term, Var, conj, mk, term_key


class ElaborationError(Exception):
    pass


def elaborate_effect_decl(name: str, arity: int) -> Clause:
    args = tuple(Var(f"X{i + 1}") for i in range(arity))
    op = mk(name, *args)
    return Clause(op, Compound("shift", (op,)))


def _ite_ladder(branches: list[tuple[Term, Term]], default: Term) -> Term:
    out = default
    for cond, then in reversed(branches):
        out = Compound(";", (Compound("->", (cond, then)), out))
    return out


def _substitute(goal: Term, fn) -> Term:
    """Apply ``fn`` to handler nodes found through control constructs."""
    if is_control(goal):
        a, b = goal.args
        na, nb = _substitute(a, fn), _substitute(b, fn)
        if na is a and nb is b:
            return goal
        return Compound(goal.functor, (na, nb))
    if is_handler(goal):
        return fn(as_handler(goal))
    return goal


@dataclass
class ElaborationOutput:
    program: SourceProgram
    aux: list[Clause] = field(default_factory=list)
    op_preds: list[Clause] = field(default_factory=list)
    names: list[tuple[str, HandlerSpec]] = field(default_factory=list)
    query: Term | None = None


class Elaborator:
    def __init__(self, reserved: set[str], prefix: str = "$handler"):
        self.reserved = set(reserved)
        self.prefix = prefix
        self.counter = 0
        self.aux: list[Clause] = []
        self.names: list[tuple[str, HandlerSpec]] = []

    def fresh_name(self) -> str:
        while True:
            name = f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in self.reserved:
                self.reserved.add(name)
                return name

    def goal(self, goal: Term) -> Term:
        return _substitute(goal, self.handler)

    def handler(self, spec: HandlerSpec) -> Term:
        name = self.fresh_name()
        self.names.append((name, spec))
        spec = spec.fresh_template()
        n = len(spec.for_bindings)
        formals = spec.formals
        goal_v, cont, signal = Var("Goal"), Var("Cont"), Var("Signal")

        def resume(c: Term) -> Term:
            args = continue_args(c)
            if len(args) != n:
                raise ElaborationError(
                    f"continue/{len(args)} in a handler with {n} parameter(s)")
            return mk(name, cont, *args)

        branches = [(Compound("==", (signal, ZERO)), self.goal(spec.finally_goal))]
        for head, body in spec.op_clauses:
            body = replace_continues(body, resume)
            branches.append((Compound("=", (signal, head)), self.goal(body)))
        forward = conj(Compound("shift", (signal,)), mk(name, cont, *formals))
        body = conj(Compound("reset", (goal_v, cont, signal)), _ite_ladder(branches, forward))
        call = mk(name, self.goal(spec.handled_goal), *spec.actuals)
        self.aux.append(Clause(mk(name, goal_v, *formals), body))
        return call


def _leftover_continue(t: Term) -> bool:
    return any(is_continue(g) for g in subgoals(t))


def elaborate_program(p: SourceProgram, query: Term | None = None) -> ElaborationOutput:
    """Elaborate every declaration and handler occurrence of ``p`` (and ``query``)."""
    reserved = {c.key[0] for c in p.clauses} | {name for name, _ in p.effect_decls}
    el = Elaborator(reserved)
    ops = []
    seen = set()
    for name, arity in p.effect_decls:
        if (name, arity) in seen:
            raise ElaborationError(f"duplicate effect declaration {name}/{arity}")
        seen.add((name, arity))
        ops.append(elaborate_effect_decl(name, arity))
    clauses = [Clause(c.head, el.goal(c.body)) for c in p.clauses]
    q = el.goal(query) if query is not None else None
    out_clauses = ops + clauses + el.aux
    for c in out_clauses:
        if any(is_handler(g) for g in subgoals(c.body)) or _leftover_continue(c.body):
            raise ElaborationError(f"elaboration left handler syntax in {c.key[0]}/{c.key[1]}")
    prog = SourceProgram(effect_decls=[], clauses=out_clauses, directives=list(p.directives))
    return ElaborationOutput(prog, list(el.aux), ops, list(el.names), q)


def elaborate(p: SourceProgram, query: Term | None = None) -> SourceProgram:
    return elaborate_program(p, query).program


__all__ = [
    "ElaborationError", "ElaborationOutput", "elaborate", "elaborate_effect_decl",
    "elaborate_program", "term_key",
]
