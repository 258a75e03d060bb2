"""Seeded generator of small effectful programs for differential testing.

Grammar bounds: at most 3 effects, at most 4 predicates, handlers nested at
most 2 deep, and op clauses that resume 0, 1 or 2 times. Every predicate
carries a depth counter as its first argument and only recurses on a smaller
one, so generated programs terminate (modulo multi-shot blow-up, which the
step budget catches).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

ATOMS = ["a", "b", "c"]


@dataclass
class Generated:
    seed: int
    source: str
    query: str
    effects: list[tuple[str, int]]
    preds: list[str]
    continues: set[int] = field(default_factory=set)


class ProgramGen:
    def __init__(self, seed: int, *, max_effects: int = 3, max_preds: int = 4, max_nest: int = 2,
                 continues: tuple[int, ...] = (0, 1, 2)):
        self.seed = seed
        self.r = random.Random(seed)
        self.max_nest = max_nest
        self.allowed_continues = continues
        n_eff = self.r.randint(1, max_effects)
        self.effects = [(f"e{i}", self.r.choice([0, 1])) for i in range(n_eff)]
        self.n_preds = self.r.randint(1, max_preds)
        self.handlers = 0
        self.continues: set[int] = set()

    # --- terms -------------------------------------------------------------
    def term(self, vars_: list[str], depth: int = 1) -> str:
        r = self.r
        k = r.random()
        if vars_ and k < 0.45:
            return r.choice(vars_)
        if depth > 0 and k < 0.6:
            return f"f({self.term(vars_, depth - 1)})"
        if k < 0.8:
            return r.choice(ATOMS)
        return str(r.randint(0, 2))

    def op_call(self, vars_: list[str]) -> str:
        name, arity = self.r.choice(self.effects)
        return name if arity == 0 else f"{name}({self.term(vars_)})"

    # --- goals -------------------------------------------------------------
    def goal(self, vars_: list[str], budget: int, nest: int, depth_var: str | None) -> str:
        r = self.r
        if budget <= 1:
            return self.simple(vars_, depth_var)
        k = r.random()
        if k < 0.35:
            left = r.randint(1, budget - 1)
            return f"{self.goal(vars_, left, nest, depth_var)}, {self.goal(vars_, budget - left, nest, depth_var)}"
        if k < 0.47:
            left = r.randint(1, budget - 1)
            return f"({self.goal(vars_, left, nest, depth_var)} ; {self.goal(vars_, budget - left, nest, depth_var)})"
        if k < 0.55:
            c = self.cond(vars_)
            b = max(1, (budget - 1) // 2)
            return f"({c} -> {self.goal(vars_, b, nest, depth_var)} ; {self.goal(vars_, b, nest, depth_var)})"
        if k < 0.75 and nest < self.max_nest:
            return self.handler(vars_, budget - 1, nest + 1, depth_var)
        return self.simple(vars_, depth_var)

    def cond(self, vars_: list[str]) -> str:
        r = self.r
        k = r.random()
        if k < 0.1:
            return self.op_call(vars_)  # a shift inside a condition
        if k < 0.55 and vars_:
            return f"{r.choice(vars_)} = {self.term(vars_)}"
        if vars_ and k < 0.8:
            return f"{r.choice(vars_)} == {self.term(vars_)}"
        return r.choice(["true", "fail"])

    def simple(self, vars_: list[str], depth_var: str | None) -> str:
        r = self.r
        k = r.random()
        if k < 0.3:
            return self.op_call(vars_)
        if k < 0.45 and depth_var is not None:
            return f"p{r.randrange(self.n_preds)}({depth_var}, {self.term(vars_)})"
        if k < 0.65 and vars_:
            return f"{r.choice(vars_)} = {self.term(vars_)}"
        if k < 0.85:
            return f"writeln({self.term(vars_)})"
        return r.choice(["true", "true", "fail"])

    def handler(self, vars_: list[str], budget: int, nest: int, depth_var: str | None) -> str:
        r = self.r
        h = self.handlers
        self.handlers += 1
        if nest < self.max_nest and r.random() < 0.3:
            inner = self.handler(vars_, max(1, budget // 2), nest + 1, depth_var)  # stacked handlers
        else:
            inner = self.goal(vars_, max(1, budget // 2), nest, depth_var)
        n_params = r.choice([0, 0, 1, 2])
        params = [f"P{h}x{i}" for i in range(n_params)]
        ops = r.sample(self.effects, r.randint(1, len(self.effects)))
        clauses = []
        for name, arity in ops:
            hv = f"H{h}{name}"
            if arity == 0:
                head = name
                local = list(params)
            elif r.random() < 0.8:
                head = f"{name}({hv})"
                local = params + [hv]
            else:
                head = f"{name}({r.choice(ATOMS)})"  # non-variable head: may forward
                local = list(params)
            clauses.append(f"{head} -> {self.op_body(local, params, nest)}")
        text = f"handle ({inner}) with ({' ; '.join(clauses)})"
        if r.random() < 0.5:
            text += f" finally ({self.finally_goal(params)})"
        if params:
            text += " for (" + ", ".join(f"{p} = {self.term(vars_)}" for p in params) + ")"
        return f"({text})"

    def resume(self, params: list[str], local: list[str]) -> str:
        if not params:
            return "continue"
        return f"continue({', '.join(self.term(local) for _ in params)})"

    def op_body(self, local: list[str], params: list[str], nest: int) -> str:
        r = self.r
        n = r.choice(self.allowed_continues)
        self.continues.add(n)
        parts = []
        if r.random() < 0.5:
            parts.append(self.simple_local(local))
        for i in range(n):
            parts.append(self.resume(params, local))
            if i < n - 1 or r.random() < 0.4:
                parts.append(self.simple_local(local))
        if not parts:
            parts.append(self.simple_local(local))
        return ", ".join(parts)

    def simple_local(self, local: list[str]) -> str:
        r = self.r
        k = r.random()
        if k < 0.25:
            return self.op_call(local)  # handled by an enclosing handler
        if k < 0.5 and local:
            return f"{r.choice(local)} = {self.term(local)}"
        if k < 0.65:
            return f"({self.simple_local(local)} ; {self.simple_local(local)})"
        return f"writeln({self.term(local)})"

    def finally_goal(self, params: list[str]) -> str:
        r = self.r
        if len(params) >= 2 and r.random() < 0.5:
            return f"{params[0]} = {params[1]}"
        if r.random() < 0.2:
            return self.op_call(params)
        return f"writeln({self.term(params)})"

    # --- program -----------------------------------------------------------
    def program(self) -> Generated:
        r = self.r
        lines = [f":- effect {n}/{a}." for n, a in self.effects]
        preds = []
        for i in range(self.n_preds):
            name = f"p{i}"
            preds.append(f"{name}/2")
            lines.append(f"{name}(0, X) :- {self.goal(['X'], r.randint(1, 3), 0, None)}.")
            for _ in range(r.randint(1, 2)):
                body = self.goal(["X", "Y"], r.randint(2, 6), 0, "M")
                lines.append(f"{name}(N, X) :- N > 0, M is N - 1, {body}.")
        depth = r.randint(1, 3)
        query = f"p0({depth}, Q)"
        if r.random() < 0.6:
            query = self.top_handler(query)
        return Generated(self.seed, "\n".join(lines) + "\n", query, self.effects,
                         [p.split("/")[0] for p in preds], self.continues)

    def top_handler(self, goal: str) -> str:
        r = self.r
        clauses = []
        for name, arity in self.effects:
            head = name if arity == 0 else f"{name}(V)"
            pre = "writeln(V), " if arity and r.random() < 0.5 else ""
            n = r.choice(self.allowed_continues)
            self.continues.add(n)
            body = pre + ", ".join(["continue"] * n) if n else pre + "true"
            clauses.append(f"{head} -> {body.rstrip(', ')}")
        return f"handle {goal} with ({' ; '.join(clauses)})"


def generate(seed: int, **kw) -> Generated:
    return ProgramGen(seed, **kw).program()


def corpus(n: int, start: int = 0, **kw) -> list[Generated]:
    return [generate(s, **kw) for s in range(start, start + n)]
