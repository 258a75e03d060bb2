"""Logic terms, substitutions with a trail, unification and renaming."""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Union


class Var:
    """A logic variable. Identity is the numeric id; the name is a print hint."""

    __slots__ = ("id", "name", "ref")
    _ids = itertools.count()

    def __init__(self, name: str = "_"):
        self.id = next(Var._ids)
        self.name = name
        self.ref = None  # in-place binding, used only by the engine's store

    def __repr__(self) -> str:
        return f"Var({self.name}#{self.id})"


class Atom:
    """An interned atom: ``Atom("a") is Atom("a")``."""

    __slots__ = ("name",)
    _table: dict[str, "Atom"] = {}

    def __new__(cls, name: str) -> "Atom":
        atom = cls._table.get(name)
        if atom is None:
            atom = object.__new__(cls)
            atom.name = name
            cls._table[name] = atom
        return atom

    def __reduce__(self):
        return (Atom, (self.name,))

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


class Int:
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value

    def __eq__(self, other) -> bool:
        return type(other) is Int and other.value == self.value

    def __hash__(self) -> int:
        return hash(("Int", self.value))

    def __repr__(self) -> str:
        return f"Int({self.value})"


class Compound:
    """``functor(args...)`` with at least one argument."""

    __slots__ = ("functor", "args")

    def __init__(self, functor: str, args: tuple):
        if not args:
            raise ValueError(f"compound {functor!r} needs at least one argument")
        self.functor = functor
        self.args = args

    @property
    def key(self) -> tuple[str, int]:
        return (self.functor, len(self.args))

    def __eq__(self, other) -> bool:
        return type(other) is Compound and structurally_equal(self, other)

    def __hash__(self) -> int:
        return hash((self.functor, len(self.args)))

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {self.args!r})"


Term = Union[Var, Atom, Int, Compound]

NIL = Atom("[]")
TRUE = Atom("true")
FAIL = Atom("fail")
ZERO = Int(0)


def mk(functor: str, *args: Term) -> Term:
    """Build a compound, or an atom when there are no arguments."""
    return Compound(functor, args) if args else Atom(functor)


def conj(*goals: Term) -> Term:
    """Right-nested conjunction; ``true`` when empty."""
    goals = tuple(goals)
    if not goals:
        return TRUE
    out = goals[-1]
    for g in reversed(goals[:-1]):
        out = Compound(",", (g, out))
    return out


def conj_list(goal: Term) -> list[Term]:
    """Flatten nested ``,/2`` into a list of conjuncts."""
    out: list[Term] = []
    stack = [goal]
    while stack:
        g = stack.pop()
        if type(g) is Compound and g.functor == "," and len(g.args) == 2:
            stack.append(g.args[1])
            stack.append(g.args[0])
        else:
            out.append(g)
    return out


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    items = list(items)
    out = tail
    for item in reversed(items):
        out = Compound(".", (item, out))
    return out


def list_items(t: Term) -> tuple[list[Term], Term]:
    """Split a (possibly partial) list into its elements and its tail."""
    items = []
    while type(t) is Compound and t.functor == "." and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def term_key(t: Term) -> tuple[str, int] | None:
    if type(t) is Compound:
        return (t.functor, len(t.args))
    if type(t) is Atom:
        return (t.name, 0)
    return None


def structurally_equal(a: Term, b: Term) -> bool:
    """Syntactic identity (variables compared by identity); iterative."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
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


def iter_vars(t: Term) -> Iterator[Var]:
    """Variables of ``t`` in left-to-right first-occurrence order (with repeats)."""
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is Var:
            yield x
        elif type(x) is Compound:
            stack.extend(reversed(x.args))


def term_vars(t: Term) -> list[Var]:
    """Distinct variables of ``t`` in first-occurrence order."""
    seen: dict[int, Var] = {}
    for v in iter_vars(t):
        seen.setdefault(v.id, v)
    return list(seen.values())


def occurs_in(v: Var, t: Term) -> bool:
    return any(x is v for x in iter_vars(t))


def term_size(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        x = stack.pop()
        n += 1
        if type(x) is Compound:
            stack.extend(x.args)
    return n


def replace_vars(t: Term, mapping: dict[int, Term]) -> Term:
    """Apply a variable-id to term mapping (one pass, no chasing)."""
    if not mapping:
        return t
    tx = type(t)
    if tx is Var:
        return mapping.get(t.id, t)
    if tx is Compound:
        args = t.args
        new = tuple(replace_vars(a, mapping) for a in args)
        for old, nw in zip(args, new):
            if old is not nw:
                return Compound(t.functor, new)
        return t
    return t


def copy_term(t: Term, mapping: dict[int, Var] | None = None) -> Term:
    """Rename every variable of ``t`` apart, extending ``mapping`` in place."""
    if mapping is None:
        mapping = {}
    tx = type(t)
    if tx is Var:
        nv = mapping.get(t.id)
        if nv is None:
            nv = mapping[t.id] = Var(t.name)
        return nv
    if tx is Compound:
        return Compound(t.functor, tuple(copy_term(a, mapping) for a in t.args))
    return t


def freshen(params: list[Term], args: list[Term], goal: Term):
    """Consistently rename all variables of the three inputs to brand-new ones."""
    mapping: dict[int, Var] = {}
    p2 = [copy_term(p, mapping) for p in params]
    a2 = [copy_term(a, mapping) for a in args]
    g2 = copy_term(goal, mapping)
    return p2, a2, g2


def canonical(t: Term) -> Term:
    """Number variables by first occurrence: the n-th becomes ``'$VAR'(n)``."""
    numbering: dict[int, Term] = {}
    for v in iter_vars(t):
        if v.id not in numbering:
            numbering[v.id] = Compound("$VAR", (Int(len(numbering)),))
    return replace_vars(t, numbering)


def is_variant(a: Term, b: Term) -> bool:
    """True iff ``a`` and ``b`` are equal up to a bijective variable renaming."""
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        tx = type(x)
        if tx is not type(y):
            return False
        if tx is Var:
            if fwd.setdefault(x.id, y.id) != y.id or back.setdefault(y.id, x.id) != x.id:
                return False
        elif tx is Compound:
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        elif tx is Int:
            if x.value != y.value:
                return False
        elif x is not y:
            return False
    return True


class CyclicTermError(Exception):
    pass


class Substitution:
    """Variable bindings plus an undo trail.

    Bindings are keyed by ``Var`` identity. ``mark()`` returns a checkpoint;
    ``undo(mark)`` restores the binding map exactly as it was at that point.
    """

    __slots__ = ("bindings", "trail", "occurs_check")

    def __init__(self, occurs_check: bool = False):
        self.bindings: dict[Var, Term] = {}
        self.trail: list[Var] = []
        self.occurs_check = occurs_check

    def walk(self, t: Term) -> Term:
        b = self.bindings
        while type(t) is Var:
            nxt = b.get(t)
            if nxt is None:
                return t
            t = nxt
        return t

    def bind(self, v: Var, t: Term) -> None:
        self.bindings[v] = t
        self.trail.append(v)

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        b = self.bindings
        while len(trail) > mark:
            del b[trail.pop()]

    def snapshot(self) -> dict[Var, Term]:
        return dict(self.bindings)

    def _walk_via(self, t: Term) -> tuple[Term, tuple]:
        """``walk`` that also returns the ids of the bound variables it passed."""
        b = self.bindings
        via = ()
        while type(t) is Var:
            nxt = b.get(t)
            if nxt is None:
                break
            via += (t.id,)
            t = nxt
        return t, via

    def resolve(self, t: Term) -> Term:
        """Fully dereference ``t``. Iterative, so long lists are fine.

        Raises CyclicTermError for a term bound (without occurs check) to
        something containing itself.
        """
        walk_via = self._walk_via
        t, via = walk_via(t)
        if type(t) is not Compound:
            return t
        # post-order rebuild with an explicit stack; `active` holds the bound
        # variables on the current path, and meeting one again means a cycle
        active: set[int] = set()
        stack: list[tuple[Term, tuple, bool]] = [(t, via, False)]
        results: list[Term] = []
        while stack:
            node, via, expanded = stack.pop()
            if type(node) is not Compound:
                results.append(node)
                continue
            if not expanded:
                if via:
                    if not active.isdisjoint(via):
                        raise CyclicTermError("cyclic term")
                    active.update(via)
                stack.append((node, via, True))
                for a in reversed(node.args):
                    stack.append(walk_via(a) + (False,))
            else:
                active.difference_update(via)
                n = len(node.args)
                args = tuple(results[-n:])
                del results[-n:]
                results.append(Compound(node.functor, args))
        return results[0]

    def occurs(self, v: Var, t: Term) -> bool:
        stack = [t]
        walk = self.walk
        while stack:
            x = walk(stack.pop())
            if x is v:
                return True
            if type(x) is Compound:
                stack.extend(x.args)
        return False

    def unify(self, a: Term, b: Term) -> bool:
        """Extend the bindings with an mgu of ``a`` and ``b``.

        On failure all bindings made by this call are undone.
        """
        mark = len(self.trail)
        if self._unify(a, b):
            return True
        self.undo(mark)
        return False

    def _unify(self, a: Term, b: Term) -> bool:
        walk = self.walk
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            x = walk(x)
            y = walk(y)
            if x is y:
                continue
            tx = type(x)
            ty = type(y)
            if tx is Var:
                if ty is Var and y.id > x.id:
                    # bind the younger variable to the older one
                    x, y = y, x
                elif self.occurs_check and self.occurs(x, y):
                    return False
                self.bind(x, y)
            elif ty is Var:
                if self.occurs_check and self.occurs(y, x):
                    return False
                self.bind(y, x)
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


def unify(a: Term, b: Term, s: Substitution | None = None) -> Substitution | None:
    """Functional wrapper: return the extended substitution, or None on failure."""
    if s is None:
        s = Substitution()
    return s if s.unify(a, b) else None


def mgu(pairs: Iterable[tuple[Term, Term]], occurs_check: bool = True) -> dict[int, Term] | None:
    """Most general unifier of a set of equations, as a resolved id -> term map."""
    s = Substitution(occurs_check=occurs_check)
    for a, b in pairs:
        if not s.unify(a, b):
            return None
    return {v.id: s.resolve(v) for v in s.bindings}
