"""Source-level rewrite rules for handler goals, and unification clean-up.

Rules take a handler node and return its replacement, or None when they do
not apply. ``rewrite_fixpoint`` visits handler nodes innermost first and
tries the rules in priority order Merge, Drop, Triv, Op, Conj, Disj.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .effects import EMPTY, EffectEnv, caught_ops, infer, infer_handler
from .goals import (
    HandlerSpec, as_handler, continue_args, count_continues, is_continue, is_control,
    replace_continues,
)
from .reader import Clause
from .terms import (
    TRUE, Compound, Term, Var, conj, conj_list, copy_term, mgu, mk, occurs_in,
    replace_vars, term_key, term_size, term_vars,
)


def _eqs(lhs: list[Term], rhs: list[Term]) -> list[Term]:
    return [Compound("=", (a, b)) for a, b in zip(lhs, rhs)]


def _continue(args: list[Term]) -> Term:
    return mk("continue", *args)


# --- the rules ------------------------------------------------------------------

def rw_disj(h: HandlerSpec, env: EffectEnv) -> Term | None:
    g = h.handled_goal
    if type(g) is not Compound or g.functor != ";" or len(g.args) != 2:
        return None
    left, right = g.args
    if type(left) is Compound and left.functor == "->" and len(left.args) == 2:
        return None
    a = h.fresh_template().with_goal(left).to_term()
    b = h.fresh_template().with_goal(right).to_term()
    return Compound(";", (a, b))


def rw_conj(h: HandlerSpec, env: EffectEnv) -> Term | None:
    items = conj_list(h.handled_goal)
    if len(items) < 2:
        return None
    first = items[0]
    if infer(env, first).intersects(h.ops):
        return None
    return conj(first, h.with_goal(conj(*items[1:])).to_term())


def _plain_head(head: Term, formals: list[Var]) -> bool:
    """Head arguments are distinct variables, none of them a parameter."""
    args = head.args if type(head) is Compound else ()
    fids = {f.id for f in formals}
    seen = set()
    for a in args:
        if type(a) is not Var or a.id in fids or a.id in seen:
            return False
        seen.add(a.id)
    return True


def rw_op(h: HandlerSpec, env: EffectEnv) -> Term | None:
    items = conj_list(h.handled_goal)
    first = items[0]
    key = term_key(first)
    if key is None or key not in env.ops:
        return None
    found = h.clause_for(key)
    if found is None:
        return None
    head, body = found
    if not _plain_head(head, h.formals):
        return None
    mapping: dict[int, Var] = {}
    formals = [copy_term(f, mapping) for f in h.formals]
    head2 = copy_term(head, mapping)
    body2 = copy_term(body, mapping)
    rest = conj(*items[1:])

    def resume(c: Term) -> Term:
        return h.fresh_template().with_goal(rest).with_actuals(list(continue_args(c))).to_term()

    targs = list(first.args) if type(first) is Compound else []
    sargs = list(head2.args) if type(head2) is Compound else []
    return conj(*_eqs(formals, h.actuals), *_eqs(targs, sargs), replace_continues(body2, resume))


def rw_drop(h: HandlerSpec, env: EffectEnv) -> Term | None:
    e = infer(env, h.handled_goal)
    keep = tuple((hd, b) for hd, b in h.op_clauses if term_key(hd) in e)
    if len(keep) == len(h.op_clauses):
        return None
    return HandlerSpec(h.handled_goal, keep, h.finally_goal, h.for_bindings).to_term()


def rw_triv(h: HandlerSpec, env: EffectEnv) -> Term | None:
    if h.op_clauses or infer(env, h.handled_goal) != EMPTY:
        return None
    f = h.fresh_template()
    return conj(h.handled_goal, *_eqs(f.formals, f.actuals), f.finally_goal)


def _tail_resumptive(body: Term) -> Term | None:
    """Split ``Ga, continue(V)`` with continue-free ``Ga``; None for any other shape."""
    if count_continues(body) != 1:
        return None
    items = conj_list(body)
    if not is_continue(items[-1]):
        return None
    return conj(*items[:-1])


def rw_merge(h: HandlerSpec, env: EffectEnv) -> Term | None:
    inner = as_handler(h.handled_goal)
    if inner is None:
        return None
    outer = h
    if any(count_continues(b) > 1 for _, b in inner.op_clauses + outer.op_clauses):
        return None  # multi-shot clauses are never merged
    # an inner clause whose head matches only some calls forwards the rest to
    # the outer clause for the same op, which the merged handler would lose
    caught = caught_ops(inner)
    if any(term_key(hd) in inner.ops and term_key(hd) not in caught for hd, _ in outer.op_clauses):
        return None
    p1 = inner.formals
    p2 = outer.formals
    forms = []
    for head, body in inner.op_clauses:
        if count_continues(body) == 0:
            forms.append(None)
            continue
        ga = _tail_resumptive(body)
        if ga is None:
            return None
        forms.append(ga)
    if any(f is not None for f in forms):
        # running continue after the wrapper is only faithful for outer clauses
        # that resume exactly once, as their last step
        if any(_tail_resumptive(b) is None for _, b in outer.op_clauses):
            return None

    def wrap(goal: Term, fin: Callable[[HandlerSpec], tuple]) -> Term:
        w = outer.fresh_template()
        clauses, final, binds = fin(w)
        return HandlerSpec(goal, clauses, final, binds).to_term()

    merged: list[tuple[Term, Term]] = []
    for (head, body), ga in zip(inner.op_clauses, forms):
        if ga is None:
            new = wrap(body, lambda w: (w.op_clauses, w.finally_goal, tuple(zip(w.formals, p2))))
        else:
            vs = list(continue_args(conj_list(body)[-1]))
            if ga is TRUE:
                new = _continue(vs + p2)
            else:
                exports = [Var("O") for _ in p2]
                finals = [Var("F") for _ in p2]

                def with_exports(w: HandlerSpec, exports=exports, finals=finals):
                    clauses = tuple(
                        (hd, replace_continues(b, lambda c: _continue(list(continue_args(c)) + exports)))
                        for hd, b in w.op_clauses)
                    final = conj(*_eqs(exports, w.formals))
                    binds = tuple(zip(w.formals, p2)) + tuple(zip(exports, finals))
                    return clauses, final, binds

                new = conj(wrap(ga, with_exports), _continue(vs + finals))
        merged.append((head, new))
    inner_ops = inner.ops
    for head, body in outer.op_clauses:
        if term_key(head) in inner_ops:
            continue
        merged.append((head, replace_continues(
            body, lambda c: _continue(p1 + list(continue_args(c))))))
    fin = wrap(inner.finally_goal, lambda w: (w.op_clauses, w.finally_goal, tuple(zip(w.formals, p2))))
    return HandlerSpec(inner.handled_goal, tuple(merged), fin,
                       inner.for_bindings + outer.for_bindings).to_term()


RULES: list[tuple[str, Callable[[HandlerSpec, EffectEnv], Term | None]]] = [
    ("O-Merge", rw_merge),
    ("O-Drop", rw_drop),
    ("O-Triv", rw_triv),
    ("O-Op", rw_op),
    ("O-Conj", rw_conj),
    ("O-Disj", rw_disj),
]


# --- fixpoint -------------------------------------------------------------------

@dataclass
class TraceStep:
    rule: str
    before: Term
    after: Term
    redex: Term
    contractum: Term


@dataclass
class RewriteTrace:
    steps: list[TraceStep] = field(default_factory=list)
    truncated: bool = False

    def __iter__(self):
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]


def _single_shot_op(h: HandlerSpec, env: EffectEnv) -> Term | None:
    if any(count_continues(b) > 1 for _, b in h.op_clauses):
        return None
    return rw_op(h, env)


# used once a goal has grown past its size cap: O-Op on a multi-shot clause
# copies the rest of the handled goal for every resumption
SINGLE_SHOT_RULES = [(n, _single_shot_op if r is rw_op else r) for n, r in RULES]


def _step(g: Term, env: EffectEnv, rules=RULES):
    """One rewrite at the innermost-leftmost handler where a rule applies."""
    if is_control(g):
        a, b = g.args
        r = _step(a, env, rules)
        if r is not None:
            return (Compound(g.functor, (r[0], b)),) + r[1:]
        r = _step(b, env, rules)
        if r is not None:
            return (Compound(g.functor, (a, r[0])),) + r[1:]
        return None
    h = as_handler(g)
    if h is None:
        return None
    r = _step(h.handled_goal, env, rules)
    if r is not None:
        return (h.with_goal(r[0]).to_term(),) + r[1:]
    if h.op_clauses:
        inner = env.with_continue(infer_handler(env, h))
        for i, (head, body) in enumerate(h.op_clauses):
            r = _step(body, inner, rules)
            if r is not None:
                clauses = h.op_clauses[:i] + ((head, r[0]),) + h.op_clauses[i + 1:]
                return (HandlerSpec(h.handled_goal, clauses, h.finally_goal, h.for_bindings).to_term(),) + r[1:]
    r = _step(h.finally_goal, env, rules)
    if r is not None:
        return (HandlerSpec(h.handled_goal, h.op_clauses, r[0], h.for_bindings).to_term(),) + r[1:]
    for name, rule in rules:
        out = rule(h, env)
        if out is not None:
            return out, name, g, out
    return None


def rewrite_once(goal: Term, env: EffectEnv) -> tuple[Term, str] | None:
    r = _step(goal, env)
    return None if r is None else (r[0], r[1])


def rewrite_fixpoint(goal: Term, env: EffectEnv, max_steps: int = 5000,
                     size_cap: int | None = None) -> tuple[Term, RewriteTrace]:
    """Rewrite to a normal form. Past ``size_cap`` multi-shot handlers stay residual."""
    trace = RewriteTrace()
    cap = size_cap if size_cap is not None else 4 * term_size(goal) + 256
    rules = RULES
    for _ in range(max_steps):
        r = _step(goal, env, rules)
        if r is None:
            return goal, trace
        new, name, redex, contractum = r
        trace.steps.append(TraceStep(name, goal, new, redex, contractum))
        goal = new
        if rules is RULES and name == "O-Op" and term_size(goal) > cap:
            rules = SINGLE_SHOT_RULES
    trace.truncated = True
    return goal, trace


# --- unification clean-up ---------------------------------------------------------

def _is_eq(g: Term) -> bool:
    return type(g) is Compound and g.functor == "=" and len(g.args) == 2


def eliminate_locals(goals: list[Term], protected: set[int]) -> list[Term]:
    """Drop ``true`` and solve ``V = T`` for variables first bound there.

    ``V`` must not be protected, must not occur in any earlier kept goal and
    must not occur in ``T``; it is then replaced by ``T`` in the later goals.
    """
    out: list[Term] = []
    seen: set[int] = set(protected)
    goals = list(goals)
    i = 0
    while i < len(goals):
        g = goals[i]
        i += 1
        if g is TRUE:
            continue
        if _is_eq(g):
            a, b = g.args
            if a is b:
                continue
            done = False
            for v, t in ((a, b), (b, a)):
                if type(v) is Var and v.id not in seen and not occurs_in(v, t):
                    sub = {v.id: t}
                    goals[i:] = [replace_vars(x, sub) for x in goals[i:]]
                    done = True
                    break
            if done:
                continue
        out.append(g)
        seen.update(v.id for v in term_vars(g))
    return out


def simplify_goal(goal: Term, protected: set[int]) -> Term:
    body = conj(*eliminate_locals(conj_list(goal), protected))
    return _clean_templates(body)


def _clean_templates(goal: Term) -> Term:
    """Simplify op bodies and finally goals of residual handlers."""
    if is_control(goal):
        a, b = goal.args
        return Compound(goal.functor, (_clean_templates(a), _clean_templates(b)))
    h = as_handler(goal)
    if h is None:
        return goal
    formals = {f.id for f in h.formals}
    clauses = []
    for head, body in h.op_clauses:
        prot = formals | {v.id for v in term_vars(head)}
        clauses.append((head, simplify_goal(body, prot)))
    fin = simplify_goal(h.finally_goal, formals)
    g0 = _clean_templates(h.handled_goal)
    return HandlerSpec(g0, tuple(clauses), fin, h.for_bindings).to_term()


def simplify_unifications(clause: Clause) -> Clause:
    """Solve the leading unifications into the head, then eliminate local equations."""
    goals = [g for g in conj_list(clause.body) if g is not TRUE]
    head = clause.head
    k = 0
    while k < len(goals) and _is_eq(goals[k]):
        k += 1
    if k:
        m = mgu([tuple(g.args) for g in goals[:k]], occurs_check=True)
        if m is not None:
            head = replace_vars(head, m)
            goals = [replace_vars(g, m) for g in goals[k:]]
    protected = {v.id for v in term_vars(head)}
    body = simplify_goal(conj(*goals), protected)
    return Clause(head, body)


def handler_count(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is Compound:
            if x.functor == "$handle" and len(x.args) == 4:
                n += 1
            stack.extend(x.args)
    return n


__all__ = [
    "RULES", "RewriteTrace", "TraceStep", "eliminate_locals", "handler_count",
    "rewrite_fixpoint", "rewrite_once", "rw_conj", "rw_disj", "rw_drop", "rw_merge",
    "rw_op", "rw_triv", "simplify_goal", "simplify_unifications",
]
