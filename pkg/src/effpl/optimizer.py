"""Whole-program optimization: rewriting, handler specialization, and the pipeline.

A handler whose goal starts with a call to a source predicate is abstracted
into a fresh predicate (``ab`` becomes ``ab0``). Each clause of the callee
yields one clause of the new predicate with the handler wrapped around the
unfolded body; the rewrite rules then run on it, and residual handlers that
are variants of an earlier abstraction are folded back into calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .deep import deep
from .effects import EffectEnv, analyze_program, callees
from .elaborator import ElaborationOutput, elaborate_program
from .goals import HandlerSpec, as_handler, map_goal
from .reader import Clause, SourceProgram
from .rewrite import RewriteTrace, rewrite_fixpoint, simplify_goal, simplify_unifications
from .terms import (
    TRUE, Compound, Int, Term, Var, canonical, conj, conj_list, copy_term, is_variant, mk,
    term_key, term_size, term_vars,
)

LEVELS = ("none", "rewrite", "full")


def _shape(t: Term):
    """Hashable structure of a canonicalized term (variants share a shape)."""
    tt = type(t)
    if tt is Compound:
        return (t.functor,) + tuple(_shape(a) for a in t.args)
    if tt is Int:
        return ("#", t.value)
    return t.name


def embeds(small: Term, big: Term) -> bool:
    """Homeomorphic embedding ``small <| big``; all variables count as equal."""
    ts, tb = type(small), type(big)
    if tb is Compound and any(embeds(small, a) for a in big.args):
        return True
    if ts is Var:
        return tb is Var
    if ts is Compound:
        return (tb is Compound and small.functor == big.functor and len(small.args) == len(big.args)
                and all(embeds(a, b) for a, b in zip(small.args, big.args)))
    return ts is tb and small == big


@dataclass
class SpecializationRecord:
    key: Term
    generated_name: str
    formal_params: list[Var]
    status: str = "pending"
    callee: tuple[str, int] | None = None


@dataclass
class SpecializedClause:
    clause: Clause
    record: SpecializationRecord
    trace: RewriteTrace
    unfolded: Clause


@dataclass
class PEResult:
    program: SourceProgram
    query: Term | None
    records: list[SpecializationRecord] = field(default_factory=list)
    clauses: list[SpecializedClause] = field(default_factory=list)
    over_budget: int = 0
    generalized: int = 0


class PartialEvaluator:
    def __init__(self, source: SourceProgram, env: EffectEnv, *, budget: int = 256,
                 size_limit: int = 400, reserved: set[str] | None = None):
        self.preds = source.predicates()
        self.env = env
        self.budget = budget
        self.size_limit = size_limit
        self.records: list[SpecializationRecord] = []
        self.index: dict = {}
        self.worklist: list[SpecializationRecord] = []
        self.reserved = set(reserved or ()) | {k[0] for k in self.preds} | {k[0] for k in source.effects}
        self.counters: dict[str, int] = {}
        self.over_budget = 0
        self.generalized = 0

    def fresh_name(self, base: str) -> str:
        while True:
            k = self.counters.get(base, 0)
            self.counters[base] = k + 1
            name = f"{base}{k}"
            if name not in self.reserved:
                self.reserved.add(name)
                return name

    def abstract(self, h: HandlerSpec) -> Term | None:
        """Replace a handled predicate call by a call to its specialization."""
        items = conj_list(h.handled_goal)
        first = items[0]
        key = term_key(first)
        if key is None or key not in self.preds or type(first) is Var:
            return None
        rest = [g for g in items[1:] if g is not TRUE]
        args = list(first.args) if type(first) is Compound else []
        xs = [Var("X") for _ in args]
        rest_vars = term_vars(conj(*rest)) if rest else []
        ys = [Var("Y") for _ in h.actuals]
        skeleton = HandlerSpec(conj(mk(key[0], *xs), *rest), h.op_clauses, h.finally_goal,
                               tuple(zip(h.formals, ys))).to_term()
        call_args = args + rest_vars + list(h.actuals)
        shape = _shape(canonical(skeleton))
        rec = self.index.get(shape)
        if rec is not None and is_variant(rec.key, skeleton):
            return mk(rec.generated_name, *call_args)
        if len(self.records) >= self.budget or term_size(skeleton) > self.size_limit:
            self.over_budget += 1
            return None
        # a growing continuation would otherwise spawn one record per unfolding
        if any(r.callee == key and embeds(r.key, skeleton) for r in self.records):
            self.generalized += 1
            return None
        rec = SpecializationRecord(skeleton, self.fresh_name(key[0]), xs + rest_vars + ys,
                                   callee=key)
        self.records.append(rec)
        self.index[shape] = rec
        self.worklist.append(rec)
        return mk(rec.generated_name, *call_args)

    def fold(self, goal: Term) -> Term:
        def visit(g: Term):
            h = as_handler(g)
            return None if h is None else self.abstract(h)
        return map_goal(goal, visit, into_templates=True)

    def unfold(self, rec: SpecializationRecord) -> list[tuple[Clause, Clause]]:
        """One clause per callee clause: head args in place of the call's, body under the handler."""
        out = []
        n_args = rec.callee[1]
        for cl in self.preds[rec.callee]:
            mapping: dict[int, Var] = {}
            sk = as_handler(copy_term(rec.key, mapping))
            params = [mapping[v.id] for v in rec.formal_params]
            local: dict[int, Var] = {}
            head = copy_term(cl.head, local)
            body = copy_term(cl.body, local)
            head_args = list(head.args) if type(head) is Compound else []
            items = conj_list(sk.handled_goal)
            goal = conj(*[g for g in conj_list(body) if g is not TRUE] + items[1:])
            new_head = mk(rec.generated_name, *head_args, *params[n_args:])
            out.append(Clause(new_head, sk.with_goal(goal).to_term()))
        return out

    def run(self, clauses: list[Clause], query: Term | None) -> PEResult:
        top = [Clause(c.head, self.fold(c.body)) for c in clauses]
        q = self.fold(query) if query is not None else None
        spec: list[SpecializedClause] = []
        while self.worklist:
            rec = self.worklist.pop(0)
            for unfolded in self.unfold(rec):
                body, trace = rewrite_fixpoint(unfolded.body, self.env)
                body = self.fold(body)
                cl = simplify_unifications(Clause(unfolded.head, body))
                spec.append(SpecializedClause(cl, rec, trace, unfolded))
            rec.status = "unfolded"
        prog = SourceProgram([], top + [s.clause for s in spec], [])
        return PEResult(prog, q, list(self.records), spec, self.over_budget, self.generalized)


def rewrite_clauses(clauses: list[Clause], env: EffectEnv) -> tuple[list[Clause], dict[int, RewriteTrace]]:
    out = []
    traces = {}
    for i, c in enumerate(clauses):
        body, trace = rewrite_fixpoint(c.body, env)
        if len(trace):
            traces[i] = trace
            out.append(simplify_unifications(Clause(c.head, body)))
        else:
            out.append(c)
    return out, traces


def rewrite_query(query: Term, env: EffectEnv, names: dict[str, Var] | None = None) -> tuple[Term, RewriteTrace]:
    goal, trace = rewrite_fixpoint(query, env)
    if len(trace):
        protected = {v.id for v in (names or {}).values()} | {v.id for v in term_vars(query)}
        goal = simplify_goal(goal, protected)
    return goal, trace


def partial_evaluate(p: SourceProgram, env: EffectEnv | None = None, query: Term | None = None,
                     *, budget: int = 256) -> PEResult:
    env = env or analyze_program(p)
    pe = PartialEvaluator(p, env, budget=budget)
    res = pe.run(list(p.clauses), query)
    res.program = SourceProgram(list(p.effect_decls), res.program.clauses, list(p.directives))
    return res


# --- dead code ------------------------------------------------------------------

def root_predicates(p: SourceProgram, query: Term | None = None) -> set[tuple[str, int]]:
    """Source predicates no other predicate calls, plus whatever the query calls."""
    preds = p.predicates()
    called: set[tuple[str, int]] = set()
    for key, clauses in preds.items():
        for c in clauses:
            called |= {k for k in callees(c.body) if k != key}
    roots = {k for k in preds if k not in called}
    if query is not None:
        roots |= _functors(query)
    return roots


def _functors(t: Term) -> set[tuple[str, int]]:
    out = set()
    stack = [t]
    while stack:
        x = stack.pop()
        k = term_key(x)
        if k is not None:
            out.add(k)
        if type(x) is Compound:
            stack.extend(x.args)
    return out


def eliminate_dead_code(p: SourceProgram, roots: set[tuple[str, int]]) -> SourceProgram:
    preds = p.predicates()
    live = set()
    todo = [k for k in roots if k in preds]
    while todo:
        k = todo.pop()
        if k in live:
            continue
        live.add(k)
        for c in preds[k]:
            for f in _functors(c.body):
                if f in preds and f not in live:
                    todo.append(f)
            if type(c.head) is Compound:
                for a in c.head.args:
                    todo.extend(f for f in _functors(a) if f in preds and f not in live)
    return SourceProgram(list(p.effect_decls), [c for c in p.clauses if c.key in live],
                         list(p.directives))


# --- pipeline -------------------------------------------------------------------

@dataclass
class Compiled:
    level: str
    source: SourceProgram
    program: SourceProgram           # source-level, may still contain handlers
    elaborated: SourceProgram        # what the engine runs
    query: Term | None               # elaborated query
    source_query: Term | None        # source-level query after optimization
    traces: dict[int, RewriteTrace] = field(default_factory=dict)
    query_trace: RewriteTrace | None = None
    pe: PEResult | None = None
    elaboration: ElaborationOutput | None = None


@deep
def compile_program(p: SourceProgram, query: Term | None = None, level: str = "none",
                    *, names: dict[str, Var] | None = None, budget: int = 256) -> Compiled:
    """Produce the ``none`` (elaborated), ``rewrite`` or ``full`` variant of a program."""
    if level not in LEVELS:
        raise ValueError(f"unknown optimization level {level!r}")
    if level == "none":
        el = elaborate_program(p, query)
        return Compiled(level, p, p, el.program, el.query, query, elaboration=el)
    env = analyze_program(p)
    clauses, traces = rewrite_clauses(list(p.clauses), env)
    q = query
    qtrace = None
    if query is not None:
        q, qtrace = rewrite_query(query, env, names)
    rewritten = SourceProgram(list(p.effect_decls), clauses, list(p.directives))
    if level == "rewrite":
        el = elaborate_program(rewritten, q)
        return Compiled(level, p, rewritten, el.program, el.query, q, traces, qtrace, elaboration=el)
    pe = partial_evaluate(rewritten, env, q, budget=budget)
    el = elaborate_program(pe.program, pe.query)
    roots = root_predicates(p, query)
    if pe.query is not None:
        roots |= _functors(pe.query) | _functors(el.query)
    elaborated = eliminate_dead_code(el.program, roots)
    source_level = eliminate_dead_code(pe.program, roots)
    return Compiled(level, p, source_level, elaborated, el.query, pe.query, traces, qtrace, pe, el)


__all__ = [
    "Compiled", "LEVELS", "PEResult", "PartialEvaluator", "SpecializationRecord",
    "SpecializedClause", "compile_program", "eliminate_dead_code", "partial_evaluate",
    "rewrite_clauses", "rewrite_query", "root_predicates", "rewrite_fixpoint",
    "simplify_unifications",
]
