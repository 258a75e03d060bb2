"""Reader and printer for the handler-extended Prolog subset."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .deep import deep
from .goals import HANDLE, HandlerSpec, as_handler, is_continue, localize
from .terms import (
    NIL, TRUE, Atom, Compound, Int, Term, Var, conj_list, iter_vars, list_items,
    make_list, term_key,
)


class ReaderError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


@dataclass
class Clause:
    head: Term
    body: Term = TRUE

    @property
    def key(self) -> tuple[str, int]:
        return term_key(self.head)

    def as_term(self) -> Term:
        return Compound(":-", (self.head, self.body))


@dataclass
class SourceProgram:
    effect_decls: list[tuple[str, int]] = field(default_factory=list)
    clauses: list[Clause] = field(default_factory=list)
    directives: list[Term] = field(default_factory=list)

    def predicates(self) -> dict[tuple[str, int], list[Clause]]:
        preds: dict[tuple[str, int], list[Clause]] = {}
        for c in self.clauses:
            preds.setdefault(c.key, []).append(c)
        return preds

    @property
    def effects(self) -> set[tuple[str, int]]:
        return set(self.effect_decls)


# --- operators -------------------------------------------------------------

INFIX = {
    ":-": (1200, "xfx"), "-->": (1200, "xfx"),
    ";": (1100, "xfy"), "->": (1050, "xfy"), ",": (1000, "xfy"),
    "=": (700, "xfx"), "\\=": (700, "xfx"), "==": (700, "xfx"),
    "\\==": (700, "xfx"), "is": (700, "xfx"), "<": (700, "xfx"),
    ">": (700, "xfx"), "=<": (700, "xfx"), ">=": (700, "xfx"),
    "=:=": (700, "xfx"), "=\\=": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "//": (400, "yfx"), "mod": (400, "yfx"),
}
PREFIX = {
    ":-": (1200, "fx"), "?-": (1200, "fx"), "effect": (1150, "fx"),
    "\\+": (900, "fy"), "-": (200, "fy"),
}
HANDLER_KEYWORDS = {"with", "finally", "for"}

# --- tokenizer -------------------------------------------------------------

SYMBOL_CHARS = "+-*/\\^<>=~:.?@#&$"
TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\]|\\.|'')*')
  | (?P<punct>[()\[\]{},|])
  | (?P<sym>[+\-*/\\^<>=~:.?@#&$]+)
  | (?P<semi>;)
  | (?P<bang>!)
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str  # int var atom punct end eof
    value: str
    line: int
    col: int
    layout_before: bool = False
    quoted: bool = False


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    pos = 0
    line = 1
    line_start = 0
    layout = True
    n = len(text)
    while pos < n:
        m = TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ReaderError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "ws":
            layout = True
        elif kind == "sym" and val == "." and (m.end() >= n or text[m.end()].isspace() or text[m.end()] == "%"):
            toks.append(Tok("end", ".", line, col, layout))
            layout = False
        else:
            if kind == "sym" and val.endswith(".") and len(val) > 1 and (
                    m.end() >= n or text[m.end()].isspace()):
                # "X = a." style: symbol run swallowed the clause terminator
                toks.append(Tok("atom", val[:-1], line, col, layout))
                toks.append(Tok("end", ".", line, col + len(val) - 1, False))
            elif kind == "int":
                toks.append(Tok("int", val, line, col, layout))
            elif kind == "var":
                toks.append(Tok("var", val, line, col, layout))
            elif kind == "qatom":
                body = val[1:-1].replace("''", "'")
                body = re.sub(r"\\(.)", lambda mm: {"n": "\n", "t": "\t"}.get(mm.group(1), mm.group(1)), body)
                toks.append(Tok("atom", body, line, col, layout, quoted=True))
            elif kind == "punct":
                toks.append(Tok("punct", val, line, col, layout))
            else:
                toks.append(Tok("atom", val, line, col, layout))
            layout = False
        for i in range(pos, m.end()):
            if text[i] == "\n":
                line += 1
                line_start = i + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1, True))
    return toks


# --- parser ----------------------------------------------------------------

class Parser:
    def __init__(self, text: str, allow_internal: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.varmap: dict[str, Var] = {}
        self.allow_internal = allow_internal

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Tok | None = None) -> ReaderError:
        tok = tok or self.tok
        return ReaderError(msg, tok.line, tok.col)

    def expect(self, kind: str, value: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            want = value or kind
            got = t.value or t.kind
            raise self.error(f"expected {want!r}, got {got!r}")
        return self.advance()

    def at_term_start(self) -> bool:
        t = self.tok
        if t.kind in ("int", "var"):
            return True
        if t.kind == "punct":
            return t.value in "([{"
        if t.kind == "atom":
            if t.value in HANDLER_KEYWORDS and not t.quoted:
                return False
            return not (t.value in INFIX and not t.quoted and t.value not in PREFIX)
        return False

    def parse(self, max_prec: int) -> tuple[Term, int]:
        left, prec = self.parse_primary(max_prec)
        while True:
            t = self.tok
            if t.kind == "atom" and not t.quoted and t.value in INFIX:
                name = t.value
            elif t.kind == "punct" and t.value in (",", "|"):
                name = "," if t.value == "," else "|"
                if name == "|":
                    break
            else:
                break
            p, typ = INFIX[name]
            left_max = p - 1 if typ[0] == "x" else p
            right_max = p - 1 if typ[2] == "x" else p
            if p > max_prec or prec > left_max:
                break
            self.advance()
            right, _ = self.parse(right_max)
            left = Compound(name, (left, right))
            prec = p
        return left, prec

    def parse_arglist(self) -> list[Term]:
        args = [self.parse(999)[0]]
        while self.tok.kind == "punct" and self.tok.value == ",":
            self.advance()
            args.append(self.parse(999)[0])
        return args

    def parse_primary(self, max_prec: int) -> tuple[Term, int]:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Int(int(t.value)), 0
        if t.kind == "var":
            self.advance()
            if t.value == "_":
                return Var("_"), 0
            v = self.varmap.get(t.value)
            if v is None:
                v = self.varmap[t.value] = Var(t.value)
            return v, 0
        if t.kind == "punct":
            if t.value == "(":
                self.advance()
                inner, _ = self.parse(1200)
                self.expect("punct", ")")
                return inner, 0
            if t.value == "[":
                self.advance()
                if self.tok.kind == "punct" and self.tok.value == "]":
                    self.advance()
                    return self.after_atom("[]", t, max_prec)
                items = self.parse_arglist()
                tail: Term = NIL
                if self.tok.kind == "punct" and self.tok.value == "|":
                    self.advance()
                    tail, _ = self.parse(999)
                self.expect("punct", "]")
                return make_list(items, tail), 0
            if t.value == "{":
                self.advance()
                inner, _ = self.parse(1200)
                self.expect("punct", "}")
                return Compound("{}", (inner,)), 0
            raise self.error(f"unexpected {t.value!r}")
        if t.kind == "atom":
            self.advance()
            return self.after_atom(t.value, t, max_prec)
        if t.kind == "end":
            raise self.error("unexpected end of clause")
        raise self.error("unexpected end of input")

    def after_atom(self, name: str, t: Tok, max_prec: int) -> tuple[Term, int]:
        nxt = self.tok
        if nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
            self.advance()
            args = self.parse_arglist()
            self.expect("punct", ")")
            return Compound(name, tuple(args)), 0
        if name == "handle" and not t.quoted and self.at_term_start():
            return self.parse_handler(t), 0
        if name == "-" and nxt.kind == "int" and not nxt.layout_before:
            self.advance()
            return Int(-int(nxt.value)), 0
        if name in PREFIX and not t.quoted and self.at_term_start():
            p, typ = PREFIX[name]
            if p > max_prec:
                p = 999
            arg_max = p - 1 if typ == "fx" else p
            arg, _ = self.parse(arg_max)
            return Compound(name, (arg,)), p
        prec = 0
        if name in INFIX or name in PREFIX:
            prec = max(INFIX.get(name, (0,))[0], PREFIX.get(name, (0,))[0])
            if prec > max_prec:
                prec = 0
        return Atom(name), prec

    def keyword(self, word: str) -> bool:
        t = self.tok
        if t.kind == "atom" and t.value == word and not t.quoted:
            self.advance()
            return True
        return False

    def parse_handler(self, start: Tok) -> Term:
        goal, _ = self.parse(999)
        if not self.keyword("with"):
            raise self.error("expected 'with' in handler")
        clauses: list[tuple[Term, Term]] = []
        if (self.tok.kind == "punct" and self.tok.value == "("
                and self.peek().kind == "punct" and self.peek().value == ")"):
            if not self.allow_internal:
                raise self.error("empty 'with' clause list is only allowed internally")
            self.advance()
            self.advance()
        else:
            body, _ = self.parse(999)
            for item in split_op_clauses(body):
                if not (type(item) is Compound and item.functor == "->" and len(item.args) == 2):
                    raise self.error("operation clause must have the form Op -> Goal", start)
                head, gi = item.args
                if type(head) not in (Atom, Compound):
                    raise self.error("operation clause head must be a callable term", start)
                clauses.append((head, gi))
        fin: Term = TRUE
        binds: list[tuple[Var, Term]] = []
        if self.keyword("finally"):
            fin, _ = self.parse(999)
        if self.keyword("for"):
            spec, _ = self.parse(999)
            for b in conj_list(spec):
                if not (type(b) is Compound and b.functor == "=" and len(b.args) == 2
                        and type(b.args[0]) is Var):
                    raise self.error("for clause expects Var = Term pairs", start)
                binds.append((b.args[0], b.args[1]))
        keys = [term_key(h) for h, _ in clauses]
        if len(set(keys)) != len(keys):
            raise self.error("duplicate operation clause in handler", start)
        spec = HandlerSpec(goal, tuple(clauses), fin, tuple(binds))
        return spec.to_term()

    def clause_term(self) -> Term | None:
        if self.tok.kind == "eof":
            return None
        self.varmap = {}
        term, _ = self.parse(1200)
        self.expect("end")
        return term


def split_op_clauses(t: Term) -> list[Term]:
    out = []
    while type(t) is Compound and t.functor == ";" and len(t.args) == 2:
        out.append(t.args[0])
        t = t.args[1]
    out.append(t)
    return out


def localize_all(t: Term) -> Term:
    """Rename handler-local variables apart, innermost handler first."""
    if type(t) is not Compound:
        return t
    args = tuple(localize_all(a) for a in t.args)
    if any(a is not b for a, b in zip(args, t.args)):
        t = Compound(t.functor, args)
    h = as_handler(t)
    if h is not None:
        t = localize(h).to_term()
    return t


def check_continues(goal: Term, arity: int | None, where: Tok | None = None, line: int = 0) -> None:
    """Validate continue placement and arity; ``arity`` None means no op clause encloses."""
    stack = [(goal, arity)]
    while stack:
        g, n = stack.pop()
        if is_continue(g):
            k = len(g.args) if type(g) is Compound else 0
            if n is None:
                raise ReaderError("continue outside any handler operation clause", line)
            if k != n:
                raise ReaderError(f"continue/{k} does not match the handler's {n} parameter(s)", line)
            continue
        if type(g) is Compound and (g.functor, len(g.args)) in ((",", 2), (";", 2), ("->", 2)):
            stack.extend((a, n) for a in g.args)
            continue
        h = as_handler(g)
        if h is not None:
            stack.append((h.handled_goal, n))
            stack.append((h.finally_goal, None))
            inner = len(h.for_bindings)
            stack.extend((b, inner) for _, b in h.op_clauses)


@deep
def parse(source: str, *, allow_internal: bool = False) -> SourceProgram:
    p = Parser(source, allow_internal=allow_internal)
    prog = SourceProgram()
    while True:
        start = p.tok
        term = p.clause_term()
        if term is None:
            break
        term = localize_all(term)
        if type(term) is Compound and term.functor == ":-" and len(term.args) == 1:
            d = term.args[0]
            if type(d) is Compound and d.functor == "effect" and len(d.args) == 1:
                for ind in conj_list(d.args[0]):
                    if not (type(ind) is Compound and ind.functor == "/" and len(ind.args) == 2
                            and type(ind.args[0]) is Atom and type(ind.args[1]) is Int):
                        raise ReaderError("effect declaration expects Name/Arity", start.line, start.col)
                    key = (ind.args[0].name, ind.args[1].value)
                    if key in prog.effect_decls:
                        raise ReaderError(f"duplicate effect declaration {key[0]}/{key[1]}", start.line, start.col)
                    prog.effect_decls.append(key)
            else:
                prog.directives.append(d)
            continue
        if type(term) is Compound and term.functor == ":-" and len(term.args) == 2:
            head, body = term.args
        else:
            head, body = term, TRUE
        if type(head) not in (Atom, Compound) or is_continue(head):
            raise ReaderError("clause head must be an atom or compound", start.line, start.col)
        check_continues(body, None, line=start.line)
        prog.clauses.append(Clause(head, body))
    clash = prog.effects & set(prog.predicates())
    if clash:
        name, ar = sorted(clash)[0]
        raise ReaderError(f"{name}/{ar} is both an effect and a defined predicate")
    return prog


@deep
def parse_goal(text: str, *, allow_internal: bool = False) -> tuple[Term, dict[str, Var]]:
    """Parse a single goal (trailing '.' optional); returns it with its named variables."""
    text = text.strip()
    if not text.endswith("."):
        text += " ."
    p = Parser(text, allow_internal=allow_internal)
    term = p.clause_term()
    if term is None:
        raise ReaderError("empty goal")
    if p.tok.kind != "eof":
        raise p.error("trailing input after goal")
    term = localize_all(term)
    check_continues(term, None)
    return term, dict(p.varmap)


@deep
def parse_term(text: str) -> Term:
    return parse_goal(text, allow_internal=True)[0]


# --- printer ---------------------------------------------------------------

SOLO = {"[]", "!", ";", ",", "{}", "|"}
PLAIN_ATOM = re.compile(r"^[a-z][A-Za-z0-9_]*$")
SYMBOL_ATOM = re.compile(r"^[+\-*/\\^<>=~:.?@#&$]+$")
TIGHT_OPS = {"+", "-", "*", "/", "//"}


def format_atom(name: str) -> str:
    if name in SOLO and name not in (",", "|"):
        return name
    if PLAIN_ATOM.match(name) or SYMBOL_ATOM.match(name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
    return f"'{escaped}'"


class Printer:
    def __init__(self, names: dict[int, str] | None = None, anonymous: bool = False):
        self.names = names if names is not None else {}
        self.anonymous = anonymous

    def var_name(self, v: Var) -> str:
        if self.anonymous:
            return "_"
        name = self.names.get(v.id)
        if name is None:
            name = self.names[v.id] = f"_G{v.id}"
        return name

    def fmt(self, t: Term, max_prec: int = 1200) -> str:
        tt = type(t)
        if tt is Var:
            return self.var_name(t)
        if tt is Int:
            return str(t.value)
        if tt is Atom:
            s = format_atom(t.name)
            if (t.name in INFIX or t.name in PREFIX) and max_prec < 1200:
                return s
            return s
        return self.fmt_compound(t, max_prec)

    def fmt_compound(self, t: Compound, max_prec: int) -> str:
        f = t.functor
        args = t.args
        if f == "." and len(args) == 2:
            items, tail = list_items(t)
            body = ",".join(self.fmt(x, 999) for x in items)
            if tail is NIL:
                return f"[{body}]"
            return f"[{body}|{self.fmt(tail, 999)}]"
        if f == HANDLE and len(args) == 4:
            s = self.fmt_handler(as_handler(t))
            return f"({s})" if max_prec < 999 else s
        if len(args) == 2 and f in INFIX:
            p, typ = INFIX[f]
            lp = p - 1 if typ[0] == "x" else p
            rp = p - 1 if typ[2] == "x" else p
            left = self.fmt(args[0], lp)
            right = self.fmt(args[1], rp)
            if f == ",":
                s = f"{left}, {right}"
            elif f in TIGHT_OPS:
                if right.startswith("-"):
                    right = f"({right})"
                s = f"{left}{f}{right}"
            else:
                s = f"{left} {f} {right}"
            return f"({s})" if p > max_prec else s
        if len(args) == 1 and f in PREFIX and f != "-":
            p, typ = PREFIX[f]
            ap = p - 1 if typ == "fx" else p
            s = f"{f} {self.fmt(args[0], ap)}"
            return f"({s})" if p > max_prec else s
        inner = ",".join(self.fmt(a, 999) for a in args)
        return f"{format_atom(f)}({inner})"

    def fmt_handler(self, h: HandlerSpec) -> str:
        g = h.handled_goal
        gs = self.fmt(g, 0)
        if not gs.startswith("("):
            if type(g) is Compound and (g.functor in INFIX or g.functor in PREFIX or g.functor == HANDLE):
                gs = f"({gs})"
        if h.op_clauses:
            cl = " ; ".join(f"{self.fmt(hd, 1049)} -> {self.fmt(b, 1050)}" for hd, b in h.op_clauses)
            ws = f"({cl})"
        else:
            ws = "()"
        s = f"handle {gs} with {ws}"
        if not (type(h.finally_goal) is Atom and h.finally_goal is TRUE):
            s += f" finally ({self.fmt(h.finally_goal, 1200)})"
        if h.for_bindings:
            bs = ", ".join(f"{self.fmt(p, 699)} = {self.fmt(a, 699)}" for p, a in h.for_bindings)
            s += f" for ({bs})"
        return s


def canonical_names(t: Term) -> dict[int, str]:
    names: dict[int, str] = {}
    for v in iter_vars(t):
        if v.id not in names:
            names[v.id] = var_label(len(names))
    return names


def var_label(i: int) -> str:
    letter = chr(ord("A") + i % 26)
    return letter if i < 26 else f"{letter}{i // 26}"


@deep
def format_clause(c: Clause) -> str:
    pr = Printer(canonical_names(c.as_term()))
    head = pr.fmt(c.head, 999)
    if type(c.body) is Atom and c.body is TRUE:
        return f"{head}."
    return f"{head} :- {pr.fmt(c.body, 1199)}."


@deep
def format_term(t: Term, canonical: bool = True) -> str:
    pr = Printer(canonical_names(t) if canonical else None)
    return pr.fmt(t)


@deep
def format_value(t: Term) -> str:
    """Text for writeln output: unbound variables print as ``_``."""
    return Printer(anonymous=True).fmt(t)


@deep
def format_program(p: SourceProgram) -> str:
    lines = [f":- effect {n}/{a}." for n, a in p.effect_decls]
    for d in p.directives:
        lines.append(f":- {format_term(d)}.")
    lines.extend(format_clause(c) for c in p.clauses)
    return "\n".join(lines) + ("\n" if lines else "")


def print_(x) -> str:
    """Print a program, clause or term in the canonical golden format."""
    if isinstance(x, SourceProgram):
        return format_program(x)
    if isinstance(x, Clause):
        return format_clause(x)
    return format_term(x)
