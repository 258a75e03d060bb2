"""SLD resolution with delimited control (``reset/3`` and ``shift/1``).

The machine keeps its pending goals as a linked list of ``(goal, env, rest)``
cells. ``reset(G, Cont, Signal)`` pushes ``G`` followed by a ``ResetFrame``.
``shift(T)`` walks the list up to the nearest frame and turns the goals it
passes into a conjunction term; that term is the resumption, so running it
any number of times is just calling it.
"""

from __future__ import annotations

from typing import Callable, Iterator

from .deep import deep
from .goals import is_handler, subgoals
from .reader import Clause, SourceProgram, format_value, parse_goal
from .terms import (
    TRUE, ZERO, Atom, Compound, Int, Substitution, Term, Var, conj_list, term_key,
)


class EngineError(Exception):
    pass


class UnknownPredicate(EngineError):
    pass


class ShiftWithoutReset(EngineError):
    pass


class StepLimitExceeded(EngineError):
    pass


# --- arithmetic and comparison builtins -------------------------------------

def eval_arith(t: Term, s: Substitution) -> int:
    t = s.walk(t)
    tt = type(t)
    if tt is Int:
        return t.value
    if tt is Var:
        raise EngineError("is/2: arguments are not sufficiently instantiated")
    if tt is Compound:
        f = t.functor
        if len(t.args) == 2:
            a = eval_arith(t.args[0], s)
            b = eval_arith(t.args[1], s)
            if f == "+":
                return a + b
            if f == "-":
                return a - b
            if f == "*":
                return a * b
            if f == "//":
                if b == 0:
                    raise EngineError("is/2: division by zero")
                q = abs(a) // abs(b)
                return q if (a >= 0) == (b >= 0) else -q
            if f == "mod":
                if b == 0:
                    raise EngineError("is/2: division by zero")
                return a % b
            if f == "max":
                return max(a, b)
            if f == "min":
                return min(a, b)
        elif len(t.args) == 1:
            if f == "-":
                return -eval_arith(t.args[0], s)
            if f == "abs":
                return abs(eval_arith(t.args[0], s))
    raise EngineError(f"is/2: not an integer expression: {format_value(s.resolve(t))}")


def identical(a: Term, b: Term, s: Substitution) -> bool:
    walk = s.walk
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x)
        y = walk(y)
        if x is y:
            continue
        tx = type(x)
        if tx is not type(y):
            return False
        if tx is Compound:
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        elif tx is Int:
            if x.value != y.value:
                return False
        else:
            return False
    return True


COMPARE: dict[str, Callable[[int, int], bool]] = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "=<": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
}

BUILTINS = {
    ("true", 0), ("fail", 0), ("false", 0), ("=", 2), ("\\=", 2), ("==", 2),
    ("\\==", 2), ("is", 2), ("writeln", 1), ("write", 1), ("nl", 0),
    ("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2),
}
CONTROL = {(",", 2), (";", 2), ("->", 2), ("\\+", 1), ("call", 1), ("reset", 3), ("shift", 1)}


def run_builtin(key: tuple[str, int], args: tuple, s: Substitution, out: list[str]) -> bool:
    """Execute a deterministic builtin; bindings stay on the trail."""
    name = key[0]
    if name == "=":
        return s.unify(args[0], args[1])
    if name == "true":
        return True
    if name in ("fail", "false"):
        return False
    if name == "==":
        return identical(args[0], args[1], s)
    if name == "\\==":
        return not identical(args[0], args[1], s)
    if name == "\\=":
        mark = s.mark()
        ok = s.unify(args[0], args[1])
        s.undo(mark)
        return not ok
    if name == "is":
        return s.unify(args[0], Int(eval_arith(args[1], s)))
    if name in COMPARE:
        return COMPARE[name](eval_arith(args[0], s), eval_arith(args[1], s))
    if name == "writeln":
        out.append(format_value(s.resolve(args[0])) + "\n")
        return True
    if name == "write":
        out.append(format_value(s.resolve(args[0])))
        return True
    if name == "nl":
        out.append("\n")
        return True
    raise EngineError(f"unknown builtin {name}/{key[1]}")


# --- compiled clauses --------------------------------------------------------

class Slot:
    __slots__ = ("i",)

    def __init__(self, i: int):
        self.i = i


class TCompound:
    """A clause-template compound that contains at least one slot."""

    __slots__ = ("functor", "args", "inst")

    def __init__(self, functor: str, args: tuple):
        self.functor = functor
        self.args = args
        self.inst = None  # compiled argument instantiator, see _compile_inst


def _new_var(regs: list, i: int) -> Var:
    v = regs[i] = Var()
    return v


def _compile_inst(t: TCompound) -> Callable:
    """Generate ``inst(regs) -> args tuple`` for a call goal template."""
    consts: list = []

    def expr(a):
        ta = type(a)
        if ta is Slot:
            return f"(R[{a.i}] if R[{a.i}] is not None else N(R, {a.i}))"
        if ta is TCompound:
            return f"C({a.functor!r}, ({''.join(expr(b) + ', ' for b in a.args)}))"
        consts.append(a)
        return f"K[{len(consts) - 1}]"

    src = f"def inst(R): return ({''.join(expr(a) + ', ' for a in t.args)})"
    ns = {"N": _new_var, "C": Compound, "K": consts}
    exec(src, ns)
    return ns["inst"]


def _template(t: Term, slots: dict[int, Slot]):
    tt = type(t)
    if tt is Var:
        sl = slots.get(t.id)
        if sl is None:
            sl = slots[t.id] = Slot(len(slots))
        return sl
    if tt is Compound:
        args = tuple(_template(a, slots) for a in t.args)
        if any(type(a) in (Slot, TCompound) for a in args):
            return TCompound(t.functor, args)
        return t
    return t


def _inst(t, regs: list):
    tt = type(t)
    if tt is Slot:
        v = regs[t.i]
        if v is None:
            v = regs[t.i] = Var()
        return v
    if tt is TCompound:
        return Compound(t.functor, _inst_args(t.args, regs))
    return t


def _inst_args(args: tuple, regs: list) -> tuple:
    out = []
    for a in args:
        ta = type(a)
        if ta is Slot:
            v = regs[a.i]
            if v is None:
                v = regs[a.i] = Var()
            out.append(v)
        elif ta is TCompound:
            out.append(Compound(a.functor, _inst_args(a.args, regs)))
        else:
            out.append(a)
    return tuple(out)


class CClause:
    __slots__ = ("head_args", "body", "nvars", "source", "match")

    def __init__(self, clause: Clause):
        slots: dict[int, Slot] = {}
        head = clause.head
        args = head.args if type(head) is Compound else ()
        self.head_args = tuple(_template(a, slots) for a in args)
        body = clause.body
        self.body = None if body is TRUE else _template(body, slots)
        self.nvars = len(slots)
        self.source = clause
        self.match = _compile_head(self.head_args, self.nvars)


def _slot_order(t, out: list[int]) -> list[int]:
    if type(t) is Slot:
        if t.i not in out:
            out.append(t.i)
    elif type(t) is TCompound:
        for a in t.args:
            _slot_order(a, out)
    return out


def _compile_head(head_args: tuple, nvars: int) -> Callable:
    """Generate a specialized head matcher ``match(args, s) -> regs | None``.

    Read mode walks an existing compound; write mode builds the template
    around an unbound argument. The caller undoes the trail on failure.
    """
    consts: list = []
    lines = ["def match(args, s):"]
    if head_args:
        names = [f"a{k}" for k in range(len(head_args))]
        lines.append(f"    {', '.join(names)}, = args")
    lines.append("    trail = s.trail")
    seen: set[int] = set()
    counter = iter(range(1 << 30))

    def emit(ind, text):
        lines.append("    " * ind + text)

    def const(t):
        consts.append(t)
        return f"K[{len(consts) - 1}]"

    def expr(t):
        tt = type(t)
        if tt is Slot:
            return f"r{t.i}"
        if tt is TCompound:
            return f"Compound({t.functor!r}, ({''.join(expr(a) + ', ' for a in t.args)}))"
        return const(t)

    def deref(ind, src):
        x = f"x{next(counter)}"
        emit(ind, f"{x} = {src}")
        emit(ind, f"while type({x}) is Var and {x}.ref is not None:")
        emit(ind + 1, f"{x} = {x}.ref")
        return x

    def bind(ind, x, e):
        emit(ind, f"{x}.ref = {e}")
        emit(ind, f"trail.append({x})")

    def gen(ind, t, src):
        nonlocal seen
        tt = type(t)
        if tt is Slot:
            if t.i in seen:
                emit(ind, f"if not s.unify(r{t.i}, {src}): return None")
            else:
                seen.add(t.i)
                emit(ind, f"r{t.i} = {src}")
        elif tt is Atom:
            x = deref(ind, src)
            k = const(t)
            emit(ind, f"if {x} is not {k}:")
            emit(ind + 1, f"if type({x}) is not Var: return None")
            bind(ind + 1, x, k)
        elif tt is TCompound:
            x = deref(ind, src)
            before = set(seen)
            emit(ind, f"if type({x}) is Compound:")
            emit(ind + 1, f"if {x}.functor != {t.functor!r} or len({x}.args) != {len(t.args)}: return None")
            for k, a in enumerate(t.args):
                gen(ind + 1, a, f"{x}.args[{k}]")
            after = seen
            seen = before
            emit(ind, f"elif type({x}) is Var:")
            for i in _slot_order(t, []):
                if i not in seen:
                    seen.add(i)
                    emit(ind + 1, f"r{i} = Var()")
            bind(ind + 1, x, expr(t))
            emit(ind, "else: return None")
            seen = after | seen
        else:
            emit(ind, f"if not s.unify({const(t)}, {src}): return None")

    for k, t in enumerate(head_args):
        gen(1, t, f"a{k}")
    lines.append(f"    return [{', '.join(f'r{i}' if i in seen else 'None' for i in range(nvars))}]")
    ns = {"Var": Var, "Compound": Compound, "K": consts}
    exec("\n".join(lines), ns)
    return ns["match"]


def _unify_head(tmpl, arg, regs: list, s: Substitution) -> bool:
    tt = type(tmpl)
    if tt is Slot:
        cur = regs[tmpl.i]
        if cur is None:
            regs[tmpl.i] = arg
            return True
        return s.unify(cur, arg)
    while type(arg) is Var:
        nxt = arg.ref
        if nxt is None:
            break
        arg = nxt
    ta = type(arg)
    if tt is TCompound:
        if ta is Var:
            s.bind(arg, _inst(tmpl, regs))
            return True
        if ta is not Compound or arg.functor != tmpl.functor:
            return False
        targs = tmpl.args
        aargs = arg.args
        if len(aargs) != len(targs):
            return False
        for x, y in zip(targs, aargs):
            if type(x) is Slot and regs[x.i] is None:
                regs[x.i] = y
            elif not _unify_head(x, y, regs, s):
                return False
        return True
    if arg is tmpl:
        return True
    if ta is Var:
        s.bind(arg, tmpl)
        return True
    if tt is Atom:
        return False
    return s.unify(tmpl, arg)


class Database:
    """Compiled clause store of an elaborated program."""

    @deep
    def __init__(self, program: SourceProgram):
        for c in program.clauses:
            if any(is_handler(g) for g in subgoals(c.body)):
                raise EngineError(f"clause for {c.key[0]}/{c.key[1]} still contains a handler; elaborate first")
        self.preds: dict[tuple[str, int], list[CClause]] = {}
        for c in program.clauses:
            self.preds.setdefault(c.key, []).append(CClause(c))
        # first-argument indexing: key -> (bucket per principal functor, clauses with a variable first arg)
        self.index: dict[tuple[str, int], tuple[dict, list[CClause]]] = {}
        for key, clauses in self.preds.items():
            if key[1] == 0:
                continue
            keys = [_first_key(cl.head_args[0]) for cl in clauses]
            if all(k is None for k in keys):
                continue
            buckets = {k: [cl for cl, k2 in zip(clauses, keys) if k2 is None or k2 == k]
                       for k in keys if k is not None}
            self.index[key] = (buckets, [cl for cl, k in zip(clauses, keys) if k is None])
        # what the machine looks up per call: clauses, buckets (or None), variable-first clauses
        self.entries = {key: (clauses,) + self.index.get(key, (None, None))
                        for key, clauses in self.preds.items()}


def _first_key(t):
    """Principal functor of a head argument or a call argument; None for variables."""
    tt = type(t)
    if tt is Atom:
        return t.name
    if tt is Int:
        return t.value
    if tt is Compound or tt is TCompound:
        return (t.functor, len(t.args))
    return None


# --- machine ------------------------------------------------------------------

class ResetFrame:
    __slots__ = ("cont", "signal")

    def __init__(self, cont: Term, signal: Term):
        self.cont = cont
        self.signal = signal


class IteCommit:
    __slots__ = ("barrier",)

    def __init__(self, barrier: int):
        self.barrier = barrier


_FAIL_GOAL = Atom("fail")


class Store(Substitution):
    """Bindings kept on the variables themselves (``Var.ref``), undone via the trail.

    Much cheaper than a binding map, but a variable can then only be bound
    by one live store at a time. The machine clears every binding when its
    run ends, and ``solve`` runs a private copy of the query.
    """

    __slots__ = ()

    def walk(self, t: Term) -> Term:
        while type(t) is Var:
            nxt = t.ref
            if nxt is None:
                return t
            t = nxt
        return t

    def _walk_via(self, t: Term) -> tuple[Term, tuple]:
        via = ()
        while type(t) is Var:
            nxt = t.ref
            if nxt is None:
                break
            via += (t.id,)
            t = nxt
        return t, via

    def bind(self, v: Var, t: Term) -> None:
        v.ref = t
        self.trail.append(v)

    def undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            trail.pop().ref = None

    def snapshot(self) -> dict[Var, Term]:
        return {v: v.ref for v in self.trail}

    def _unify(self, a: Term, b: Term) -> bool:
        trail = self.trail
        occurs_check = self.occurs_check
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            while type(x) is Var and x.ref is not None:
                x = x.ref
            while type(y) is Var and y.ref is not None:
                y = y.ref
            if x is y:
                continue
            tx = type(x)
            ty = type(y)
            if tx is Var:
                if ty is Var and y.id > x.id:
                    # bind the younger variable to the older one
                    x, y = y, x
                elif occurs_check and self.occurs(x, y):
                    return False
                x.ref = y
                trail.append(x)
            elif ty is Var:
                if occurs_check and self.occurs(y, x):
                    return False
                y.ref = x
                trail.append(y)
            elif tx is Compound:
                if ty is not Compound or x.functor != y.functor:
                    return False
                xa = x.args
                ya = y.args
                if len(xa) != len(ya):
                    return False
                stack.extend(zip(xa, ya))
            elif tx is Int:
                if ty is not Int or x.value != y.value:
                    return False
            else:
                return False
        return True


def _copy_query(t: Term) -> Term:
    """Rename the variables of a (possibly very long) term apart, iteratively."""
    mapping: dict[int, Var] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    results: list[Term] = []
    while stack:
        node, expanded = stack.pop()
        tn = type(node)
        if tn is Var:
            nv = mapping.get(node.id)
            if nv is None:
                nv = mapping[node.id] = Var(node.name)
            results.append(nv)
        elif tn is not Compound:
            results.append(node)
        elif not expanded:
            stack.append((node, True))
            stack.extend((a, False) for a in reversed(node.args))
        else:
            n = len(node.args)
            args = tuple(results[-n:])
            del results[-n:]
            results.append(Compound(node.functor, args))
    return results[0], mapping


class Machine:
    """One query's worth of machine state over a compiled database."""

    def __init__(self, db: Database, out: list[str] | None = None, *,
                 max_steps: int | None = None, occurs_check: bool = False,
                 unhandled_shift: str = "error"):
        self.db = db
        self.out = out if out is not None else []
        self.s = Store(occurs_check=occurs_check)
        self.max_steps = max_steps
        self.steps = 0
        self.unhandled_shift = unhandled_shift
        self.cps: list[tuple] = []

    def run(self, goal: Term) -> Iterator[None]:
        """Yield once per solution; bindings are visible in ``self.s`` at each yield.

        All bindings are undone when the run finishes or is closed.
        """
        try:
            yield from self._run(goal)
        finally:
            self.s.undo(0)
            del self.cps[:]

    def _run(self, goal: Term) -> Iterator[None]:
        """The machine loop.

        Goal cells are ``(goal, env, rest)``. With ``env`` None the goal is an
        ordinary term; otherwise it is a clause-body template whose slots are
        looked up in ``env`` (structure sharing), and only the goals that are
        actually called get materialized.
        """
        s = self.s
        walk = s.walk
        trail = s.trail
        cps = self.cps
        preds = self.db.preds
        entries = self.db.entries
        out = self.out
        max_steps = self.max_steps if self.max_steps is not None else 1 << 62
        steps = self.steps
        goals = (goal, None, None)
        base = len(cps)

        while True:
            if goals is None:
                self.steps = steps
                yield None
                goals = False  # backtrack into remaining alternatives
            if goals is False:
                while True:
                    if len(cps) <= base:
                        self.steps = steps
                        return
                    cp = cps.pop()
                    s.undo(cp[1])
                    if cp[0] == 0:
                        goals = cp[2]
                        break
                    _, _, rest, args, clauses, i = cp
                    goals = self._try_clauses(args, rest, clauses, i)
                    if goals is not False:
                        break
                continue

            goal, env, goals = goals
            steps += 1
            if steps >= max_steps:
                self.steps = steps
                raise StepLimitExceeded(f"step budget of {max_steps} exhausted")
            tg = type(goal)
            if tg is Slot:
                goal = _inst(goal, env)
                env = None
                tg = type(goal)
            if tg is Var:
                goal = walk(goal)
                tg = type(goal)
                if tg is Var:
                    raise EngineError("call: goal is not sufficiently instantiated")
            if tg is Compound or tg is TCompound:
                f = goal.functor
                args = goal.args
                n = len(args)
            elif tg is Atom:
                f = goal.name
                args = ()
                n = 0
            elif tg is ResetFrame:
                if s.unify(goal.cont, ZERO) and s.unify(goal.signal, ZERO):
                    continue
                goals = False
                continue
            elif tg is IteCommit:
                del cps[goal.barrier:]
                continue
            else:
                raise EngineError(f"call: not callable: {format_value(goal)}")

            if n == 2 and f == ",":
                goals = (args[0], env, (args[1], env, goals))
                continue
            if n == 0 and f == "true":
                continue

            entry = entries.get((f, n))
            if entry is not None:
                clauses, buckets, var_first = entry
                if env is not None and tg is TCompound:
                    inst = goal.inst
                    if inst is None:
                        inst = goal.inst = _compile_inst(goal)
                    args = inst(env)
                if buckets is not None:
                    a0 = args[0]
                    while type(a0) is Var:
                        nxt = a0.ref
                        if nxt is None:
                            break
                        a0 = nxt
                    ta = type(a0)
                    if ta is Compound:
                        clauses = buckets.get((a0.functor, len(a0.args)), var_first)
                    elif ta is Atom:
                        clauses = buckets.get(a0.name, var_first)
                    elif ta is Int:
                        clauses = buckets.get(a0.value, var_first)
                goals = self._try_clauses(args, goals, clauses, 0)
                continue

            if n == 2 and f == ";":
                left = args[0]
                lenv = env
                tl = type(left)
                if tl is Slot or tl is Var:
                    left = walk(_inst(left, env) if tl is Slot else left)
                    lenv = None
                    tl = type(left)
                if (tl is TCompound or tl is Compound) and left.functor == "->" and len(left.args) == 2:
                    cond = left.args[0]
                    tc = type(cond)
                    if tc is TCompound or tc is Compound:
                        ck = (cond.functor, len(cond.args))
                    elif tc is Atom:
                        ck = (cond.name, 0)
                    else:
                        ck = None
                    if ck in BUILTINS and ck not in preds:
                        # deterministic test: no choicepoint needed (shallow backtracking)
                        steps += 1
                        cargs = cond.args if ck[1] else ()
                        if lenv is not None and tc is TCompound:
                            cargs = _inst_args(cargs, lenv)
                        mark = len(trail)
                        if run_builtin(ck, cargs, s, out):
                            goals = (left.args[1], lenv, goals)
                        else:
                            s.undo(mark)
                            goals = (args[1], env, goals)
                        continue
                    cps.append((0, len(trail), (args[1], env, goals)))
                    goals = (cond, lenv, (IteCommit(len(cps) - 1), None, (left.args[1], lenv, goals)))
                else:
                    cps.append((0, len(trail), (args[1], env, goals)))
                    goals = (left, lenv, goals)
                continue
            if n == 2 and f == "->":
                cps.append((0, len(trail), (_FAIL_GOAL, None, goals)))
                goals = (args[0], env, (IteCommit(len(cps) - 1), None, (args[1], env, goals)))
                continue
            if n == 3 and f == "reset":
                if env is not None:
                    frame = ResetFrame(_inst(args[1], env), _inst(args[2], env))
                else:
                    frame = ResetFrame(args[1], args[2])
                goals = (args[0], env, (frame, None, goals))
                continue
            if n == 1 and f == "shift":
                goals = self._shift(args[0] if env is None else _inst(args[0], env), goals)
                continue
            if n == 1 and f == "call":
                goals = (args[0], env, goals)
                continue
            if n == 1 and f == "\\+":
                cps.append((0, len(trail), goals))
                goals = (args[0], env, (IteCommit(len(cps) - 1), None, (_FAIL_GOAL, None, goals)))
                continue
            if (f, n) in BUILTINS:
                if env is not None and tg is TCompound:
                    args = _inst_args(args, env)
                if not run_builtin((f, n), args, s, out):
                    goals = False
                continue
            raise UnknownPredicate(f"unknown procedure {f}/{n}")

    def _try_clauses(self, args: tuple, rest, clauses: list[CClause], i: int):
        s = self.s
        trail = s.trail
        occurs_check = s.occurs_check
        n = len(clauses)
        while i < n:
            cl = clauses[i]
            i += 1
            mark = len(trail)
            if occurs_check:
                regs = [None] * cl.nvars
                for t, a in zip(cl.head_args, args):
                    if not _unify_head(t, a, regs, s):
                        regs = None
                        break
            else:
                regs = cl.match(args, s)
            if regs is not None:
                if i < n:
                    self.cps.append((1, mark, rest, args, clauses, i))
                if cl.body is None:
                    return rest
                return (cl.body, regs, rest)
            s.undo(mark)
        return False

    def _shift(self, term: Term, goals):
        captured = []
        node = goals
        while node is not None:
            g, env, node = node
            tg = type(g)
            if tg is ResetFrame:
                cont: Term = TRUE
                for c in captured:
                    cont = Compound(",", (cont, c))
                s = self.s
                if s.unify(g.signal, term) and s.unify(g.cont, cont):
                    return node
                return False
            if tg is IteCommit:
                # shift escaping an if-then-else condition: commit, then fail
                del self.cps[g.barrier:]
                return False
            captured.append(g if env is None else _inst(g, env))
        if self.unhandled_shift == "fail":
            return False
        raise ShiftWithoutReset(f"shift/1 without enclosing reset/3: {format_value(self.s.resolve(term))}")


def _query_goal(query) -> tuple[Term, dict[str, Var]]:
    if isinstance(query, str):
        return parse_goal(query)
    if isinstance(query, tuple):
        return query
    return query, {}


def solve(program: SourceProgram | Database, query, *, out: list[str] | None = None,
          max_steps: int | None = None, occurs_check: bool = False,
          unhandled_shift: str = "error", limit: int | None = None) -> Iterator[dict[str, Term]]:
    """Lazily enumerate answers as ``{variable name: resolved term}`` dicts.

    ``query`` is goal text, a bare goal term, or ``(goal, {name: Var})``.
    """
    db = program if isinstance(program, Database) else Database(program)
    goal, names = _query_goal(query)
    if any(is_handler(g) for g in subgoals(goal)):
        raise EngineError("query contains a handler; elaborate it first")
    m = Machine(db, out, max_steps=max_steps, occurs_check=occurs_check,
                unhandled_shift=unhandled_shift)
    goal, mapping = _copy_query(goal)
    names = {name: mapping.get(v.id, v) for name, v in names.items()}
    count = 0
    for _ in m.run(goal):
        yield {name: m.s.resolve(v) for name, v in names.items() if not name.startswith("_")}
        count += 1
        if limit is not None and count >= limit:
            return


def run_goal(db: Database, goal: Term, project: list[Term], **kw) -> Iterator[list[Term]]:
    m = Machine(db, kw.pop("out", None), **kw)
    for _ in m.run(goal):
        yield [m.s.resolve(t) for t in project]


__all__ = [
    "Database", "EngineError", "Machine", "ShiftWithoutReset", "StepLimitExceeded",
    "UnknownPredicate", "solve", "run_goal", "conj_list", "term_key",
]
