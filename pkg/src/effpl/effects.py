"""Effect sets and the effect inference judgment ``E_c |- G : E``.

An effect set is either a finite set of operations (``Fin``) or the
complement of one (``CoFin``); ``CoFin()`` is the set of all operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from .engine import BUILTINS
from .goals import as_handler, is_continue
from .reader import SourceProgram
from .terms import Compound, Term, Var, term_key

Op = tuple[str, int]


@dataclass(frozen=True)
class EffectSet:
    cofinite: bool
    ops: frozenset = frozenset()

    def union(self, other: "EffectSet") -> "EffectSet":
        if not self.cofinite and not other.cofinite:
            return Fin(self.ops | other.ops)
        if self.cofinite and other.cofinite:
            return CoFin(self.ops & other.ops)
        co, fin = (self, other) if self.cofinite else (other, self)
        return CoFin(co.ops - fin.ops)

    __or__ = union

    def minus(self, ops: Iterable[Op]) -> "EffectSet":
        ops = frozenset(ops)
        if self.cofinite:
            return CoFin(self.ops | ops)
        return Fin(self.ops - ops)

    def __contains__(self, op: Op) -> bool:
        return (op not in self.ops) if self.cofinite else (op in self.ops)

    def intersects(self, ops: Iterable[Op]) -> bool:
        return any(op in self for op in ops)

    def leq(self, other: "EffectSet") -> bool:
        return self.union(other) == other

    @property
    def is_empty(self) -> bool:
        return not self.cofinite and not self.ops

    def __str__(self) -> str:
        body = ", ".join(f"{n}/{a}" for n, a in sorted(self.ops))
        if self.cofinite:
            return "All" if not self.ops else f"All - {{{body}}}"
        return f"{{{body}}}"


def Fin(ops: Iterable[Op] = ()) -> EffectSet:
    return EffectSet(False, frozenset(ops))


def CoFin(ops: Iterable[Op] = ()) -> EffectSet:
    return EffectSet(True, frozenset(ops))


EMPTY = Fin()
ALL = CoFin()


def es_union(a: EffectSet, b: EffectSet) -> EffectSet:
    return a.union(b)


def es_minus(a: EffectSet, ops: Iterable[Op]) -> EffectSet:
    return a.minus(ops)


def es_member(op: Op, a: EffectSet) -> bool:
    return op in a


def es_intersects(a: EffectSet, ops: Iterable[Op]) -> bool:
    return a.intersects(ops)


@dataclass
class EffectEnv:
    preds: dict[Op, EffectSet] = field(default_factory=dict)
    continue_effect: EffectSet = EMPTY
    ops: frozenset = frozenset()
    iterations: int = 0

    def with_continue(self, e: EffectSet) -> "EffectEnv":
        return EffectEnv(self.preds, e, self.ops, self.iterations)


_TRANSPARENT = {(",", 2), (";", 2), ("->", 2)}


def infer(env: EffectEnv, g: Term) -> EffectSet:
    if type(g) is Var:
        return ALL
    key = term_key(g)
    if key is None:
        return EMPTY
    if key in _TRANSPARENT:
        return infer(env, g.args[0]) | infer(env, g.args[1])
    if key in (("call", 1), ("\\+", 1)):
        return infer(env, g.args[0])
    if is_continue(g):
        return env.continue_effect
    h = as_handler(g)
    if h is not None:
        return infer_handler(env, h)
    if key in env.ops:
        return Fin({key})
    if key in env.preds:
        return env.preds[key]
    if key == ("reset", 3):
        return EMPTY
    if key == ("shift", 1):
        return ALL
    if key in BUILTINS:
        return EMPTY
    return ALL


def infer_handler(env: EffectEnv, h) -> EffectSet:
    """Least solution of ``E* = (E0 - ops) | Ef | U Ei`` with bodies under ``E_c = E*``."""
    base = infer(env, h.handled_goal).minus(caught_ops(h)) | infer(env, h.finally_goal)
    star = EMPTY
    while True:
        inner = env.with_continue(star)
        nxt = base
        for _, body in h.op_clauses:
            nxt = nxt | infer(inner, body)
        if nxt == star:
            return star
        star = nxt


def caught_ops(h) -> set[Op]:
    """Operations the handler catches on every call.

    A clause head with a non-variable or repeated argument only matches some
    calls; the rest are forwarded, so its op stays in the handled goal's effect.
    """
    formals = {v.id for v in h.formals if type(v) is Var}
    out = set()
    for head, _ in h.op_clauses:
        args = head.args if type(head) is Compound else ()
        ids = [a.id for a in args if type(a) is Var]
        if len(ids) == len(args) and len(set(ids)) == len(ids) and not formals.intersection(ids):
            out.add(term_key(head))
    return out


def callees(goal: Term) -> set[Op]:
    out: set[Op] = set()
    stack = [goal]
    while stack:
        g = stack.pop()
        key = term_key(g)
        if key is None:
            continue
        if key in _TRANSPARENT or key in (("call", 1), ("\\+", 1)):
            stack.extend(g.args)
            continue
        h = as_handler(g)
        if h is not None:
            stack.append(h.handled_goal)
            stack.append(h.finally_goal)
            stack.extend(b for _, b in h.op_clauses)
            continue
        out.add(key)
    return out


def analyze_program(p: SourceProgram) -> EffectEnv:
    """Least fixpoint of the predicate equations, one strongly connected component at a time."""
    preds = p.predicates()
    env = EffectEnv({k: EMPTY for k in preds}, EMPTY, frozenset(p.effects))
    graph = nx.DiGraph()
    graph.add_nodes_from(preds)
    for key, clauses in preds.items():
        for c in clauses:
            for callee in callees(c.body):
                if callee in preds:
                    graph.add_edge(key, callee)
    cond = nx.condensation(graph)
    worst = 0
    for comp in reversed(list(nx.topological_sort(cond))):
        members = sorted(cond.nodes[comp]["members"])
        rounds = 0
        while True:
            rounds += 1
            changed = False
            for key in members:
                e = env.preds[key]
                for c in preds[key]:
                    e = e | infer(env, c.body)
                if e != env.preds[key]:
                    env.preds[key] = e
                    changed = True
            if not changed:
                break
        worst = max(worst, rounds)
    env.iterations = worst
    return env


def mentioned_ops(p: SourceProgram) -> set[Op]:
    out = set(p.effects)
    for c in p.clauses:
        for g in _all_subterms(c.body):
            h = as_handler(g)
            if h is not None:
                out |= h.ops
    return out


def _all_subterms(t: Term):
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        if type(x) is Compound:
            stack.extend(x.args)


def format_effects(env: EffectEnv) -> str:
    return "".join(f"{n}/{a} : {env.preds[(n, a)]}\n" for n, a in sorted(env.preds))


__all__ = [
    "ALL", "EMPTY", "CoFin", "caught_ops", "EffectEnv", "EffectSet", "Fin", "analyze_program",
    "es_intersects", "es_member", "es_minus", "es_union", "format_effects", "infer",
    "infer_handler", "mentioned_ops",
]
