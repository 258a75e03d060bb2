"""Handler goals and traversal helpers over goal structure.

A handler goal is stored inside ordinary terms as the compound
``'$handle'(Goal, Clauses, Finally, Bindings)`` where ``Clauses`` is a list
of ``Head -> Body`` and ``Bindings`` a list of ``Formal = Actual``.
Variables of the op clauses, the finally goal and the formals are local to
the handler (the "template"); ``Goal`` and the actuals live in the
surrounding scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from .terms import (
    TRUE, Atom, Compound, Term, Var, conj, copy_term, iter_vars, list_items,
    make_list, term_key,
)

HANDLE = "$handle"
CONTROL = {(",", 2), (";", 2), ("->", 2)}


@dataclass(frozen=True)
class HandlerSpec:
    handled_goal: Term
    op_clauses: tuple[tuple[Term, Term], ...] = ()
    finally_goal: Term = TRUE
    for_bindings: tuple[tuple[Var, Term], ...] = field(default=())

    @property
    def formals(self) -> list[Var]:
        return [f for f, _ in self.for_bindings]

    @property
    def actuals(self) -> list[Term]:
        return [a for _, a in self.for_bindings]

    @property
    def ops(self) -> set[tuple[str, int]]:
        return {term_key(h) for h, _ in self.op_clauses}

    def clause_for(self, key: tuple[str, int]) -> tuple[Term, Term] | None:
        for head, body in self.op_clauses:
            if term_key(head) == key:
                return head, body
        return None

    def to_term(self) -> Term:
        clauses = make_list(Compound("->", (h, b)) for h, b in self.op_clauses)
        binds = make_list(Compound("=", (f, a)) for f, a in self.for_bindings)
        return Compound(HANDLE, (self.handled_goal, clauses, self.finally_goal, binds))

    def with_goal(self, goal: Term) -> "HandlerSpec":
        return replace(self, handled_goal=goal)

    def with_actuals(self, actuals: list[Term]) -> "HandlerSpec":
        binds = tuple(zip(self.formals, actuals))
        return replace(self, for_bindings=binds)

    def fresh_template(self) -> "HandlerSpec":
        """Rename the handler-local variables apart; goal and actuals untouched."""
        mapping: dict[int, Var] = {}
        formals = [copy_term(f, mapping) for f in self.formals]
        clauses = []
        for head, body in self.op_clauses:
            local = dict(mapping)
            clauses.append((copy_term(head, local), copy_term(body, local)))
        fin = copy_term(self.finally_goal, dict(mapping))
        return HandlerSpec(
            self.handled_goal, tuple(clauses), fin,
            tuple(zip(formals, self.actuals)),
        )


def as_handler(t: Term) -> HandlerSpec | None:
    if type(t) is not Compound or t.functor != HANDLE or len(t.args) != 4:
        return None
    goal, clauses, fin, binds = t.args
    items, _ = list_items(clauses)
    ops = tuple((c.args[0], c.args[1]) for c in items)
    bitems, _ = list_items(binds)
    fb = tuple((b.args[0], b.args[1]) for b in bitems)
    return HandlerSpec(goal, ops, fin, fb)


def is_handler(t: Term) -> bool:
    return type(t) is Compound and t.functor == HANDLE and len(t.args) == 4


def is_continue(t: Term) -> bool:
    return (type(t) is Atom and t.name == "continue") or (
        type(t) is Compound and t.functor == "continue")


def continue_args(t: Term) -> tuple:
    return t.args if type(t) is Compound else ()


def is_control(t: Term) -> bool:
    return type(t) is Compound and (t.functor, len(t.args)) in CONTROL


def map_goal(goal: Term, fn: Callable[[Term], Term | None], *, into_templates: bool = False) -> Term:
    """Rebuild a goal bottom-up, calling ``fn`` on every non-control subgoal.

    ``fn`` returns a replacement or None to keep the subgoal. Handler nodes are
    visited after their handled goal (and, optionally, their op clauses and
    finally goal) have been rebuilt.
    """
    if is_control(goal):
        a, b = goal.args
        na = map_goal(a, fn, into_templates=into_templates)
        nb = map_goal(b, fn, into_templates=into_templates)
        if na is not a or nb is not b:
            goal = Compound(goal.functor, (na, nb))
        return goal
    h = as_handler(goal)
    if h is not None:
        g0 = map_goal(h.handled_goal, fn, into_templates=into_templates)
        changed = g0 is not h.handled_goal
        clauses = h.op_clauses
        fin = h.finally_goal
        if into_templates:
            clauses = tuple((hd, map_goal(b, fn, into_templates=True)) for hd, b in h.op_clauses)
            fin = map_goal(h.finally_goal, fn, into_templates=True)
            changed = changed or any(
                nb is not ob for (_, nb), (_, ob) in zip(clauses, h.op_clauses)
            ) or fin is not h.finally_goal
        if changed:
            goal = HandlerSpec(g0, clauses, fin, h.for_bindings).to_term()
    out = fn(goal)
    return goal if out is None else out


def replace_continues(body: Term, fn: Callable[[Term], Term]) -> Term:
    """Replace ``continue`` goals that belong to the enclosing op clause.

    Descends through control constructs and into the handled goal of nested
    handlers (those continues still refer outward), but not into nested op
    clauses or finally goals.
    """
    if is_continue(body):
        return fn(body)
    if is_control(body):
        a, b = body.args
        return Compound(body.functor, (replace_continues(a, fn), replace_continues(b, fn)))
    h = as_handler(body)
    if h is not None:
        return h.with_goal(replace_continues(h.handled_goal, fn)).to_term()
    return body


def count_continues(body: Term) -> int:
    n = 0

    def visit(g):
        nonlocal n
        n += 1
        return g

    replace_continues(body, visit)
    return n


def subgoals(goal: Term):
    """Yield every goal position reachable through control and handler nodes."""
    stack = [goal]
    while stack:
        g = stack.pop()
        yield g
        if is_control(g):
            stack.extend(reversed(g.args))
            continue
        h = as_handler(g)
        if h is not None:
            stack.append(h.finally_goal)
            stack.extend(b for _, b in reversed(h.op_clauses))
            stack.append(h.handled_goal)


def contains_handler(t: Term) -> bool:
    return any(is_handler(g) for g in subgoals(t))


def goal_vars(t: Term) -> list[Var]:
    seen = {}
    for v in iter_vars(t):
        seen.setdefault(v.id, v)
    return list(seen.values())


def localize(spec: HandlerSpec) -> HandlerSpec:
    """Give each op clause and the finally goal their own local variables.

    Formals are shared across the whole template; everything else in an op
    clause or the finally goal is local to that clause.
    """
    fmap: dict[int, Var] = {f.id: Var(f.name) for f in spec.formals}

    def local_copy(t: Term) -> Term:
        mapping = dict(fmap)
        return copy_term(t, mapping)

    clauses = []
    for head, body in spec.op_clauses:
        both = local_copy(Compound("$c", (head, body)))
        clauses.append((both.args[0], both.args[1]))
    fin = local_copy(spec.finally_goal)
    binds = tuple((fmap[f.id], a) for f, a in spec.for_bindings)
    return HandlerSpec(spec.handled_goal, tuple(clauses), fin, binds)


__all__ = [
    "HANDLE", "HandlerSpec", "as_handler", "is_handler", "is_continue",
    "continue_args", "is_control", "map_goal", "replace_continues",
    "count_continues", "subgoals", "contains_handler", "goal_vars",
    "localize", "conj",
]
