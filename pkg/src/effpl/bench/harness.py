"""Benchmark harness: time each program variant on generated inputs."""

from __future__ import annotations

import gc
import hashlib
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

from ..engine import Database, Machine
from ..optimizer import compile_program
from ..reader import SourceProgram, format_value, parse
from ..terms import Int, Term, Var, make_list, mk

VARIANTS = {"elaborated": "none", "rewritten": "rewrite", "rewritten_pe": "full"}
DEFAULT_SIZES = (1_000, 10_000, 100_000)
# below this both timings are dominated by call overhead and cache refill; ratios report 1
NOISE_FLOOR_NS = 1_000_000
WARMUP_SIZE = 8
SUITES = {
    "table1": ["ab"],
    "table2": ["state_dcg", "state_dcg_foo", "calculator"],
    "all": ["ab", "state_dcg", "state_dcg_foo", "calculator"],
}


def corpus_source(name: str) -> str:
    return resources.files("effpl.bench").joinpath(f"{name}.pl").read_text()


def load_corpus(name: str) -> SourceProgram:
    return parse(corpus_source(name))


def _ab_list(n: int) -> Term:
    return make_list(mk(x) for _ in range(n // 2) for x in ("a", "b"))


CALC_BLOCK = ("push1", "load", "add", "store")


def calculator_program(n: int) -> Term:
    """``n`` instructions: blocks of push(1), load, add, store, then push(1) padding."""
    out = []
    for i in range(n):
        op = CALC_BLOCK[i % 4] if i < n - n % 4 else "push1"
        out.append(mk("push", Int(1)) if op == "push1" else mk(op))
    return make_list(out)


def gen_input(benchmark: str, n: int) -> Term:
    if benchmark in ("ab", "state_dcg", "state_dcg_foo", "ab_dl"):
        return _ab_list(n)
    if benchmark == "calculator":
        return calculator_program(n)
    raise ValueError(f"unknown benchmark {benchmark!r}")


def bench_query(benchmark: str, n: int) -> tuple[Term, list[Var]]:
    """The timed goal and the variables whose bindings form the checksum."""
    data = gen_input(benchmark, n)
    if benchmark == "ab":
        return mk("query", data), []
    if benchmark == "ab_dl":
        return mk("ab_dl", data, mk("[]")), []
    if benchmark in ("state_dcg", "state_dcg_foo"):
        s = Var("S")
        return mk("state_phrase_handler", Int(0), s, data, mk("[]")), [s]
    if benchmark == "calculator":
        st, reg = Var("Stack"), Var("Reg")
        return mk("calc", data, st, reg), [st, reg]
    raise ValueError(f"unknown benchmark {benchmark!r}")


def checksum(values: list[Term] | None) -> str:
    text = "no" if values is None else "yes:" + ",".join(format_value(v) for v in values)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def run_once(db: Database, goal: Term, project: list[Var]) -> tuple[int, str]:
    m = Machine(db)
    # like timeit: keep the cyclic collector out of the measurement
    enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        first = None
        for _ in m.run(goal):
            first = [m.s.resolve(v) for v in project]
            break
        t1 = time.perf_counter_ns()
    finally:
        if enabled:
            gc.enable()
    return t1 - t0, checksum(first)


@dataclass
class BenchReport:
    program: str
    size: int
    reps: int
    times: dict[str, int] = field(default_factory=dict)
    checksums: dict[str, str] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return len(set(self.checksums.values())) <= 1

    @property
    def checksum(self) -> str:
        return next(iter(self.checksums.values()), "")

    def ratio(self, slow: str, fast: str) -> float:
        a, b = self.times.get(slow), self.times.get(fast)
        if a is None or b is None:
            return float("nan")
        if max(a, b) < NOISE_FLOOR_NS:
            return 1.0
        return a / max(b, 1)

    @property
    def ratios(self) -> dict[str, float]:
        out = {}
        names = list(self.times)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                out[f"{a}/{b}"] = self.ratio(a, b)
        return out

    def rows(self) -> list[dict]:
        return [
            {"program": self.program, "size": self.size, "variant": v,
             "median_ns": t, "reps": self.reps, "checksum": self.checksums[v]}
            for v, t in self.times.items()
        ]


class ChecksumMismatch(Exception):
    pass


def _compiled_db(name: str, level: str) -> Database:
    return Database(compile_program(load_corpus(name), None, level).elaborated)


def bench_program(name: str, sizes, reps: int = 5, variants=None) -> list[BenchReport]:
    variants = list(variants or VARIANTS)
    dbs = {v: _compiled_db(name, VARIANTS[v]) for v in variants}
    if name == "ab":
        dbs["handwritten"] = Database(load_corpus("ab_dl"))
    # compile clause matchers lazily built on first use outside the timed runs
    for v, db in dbs.items():
        run_once(db, *bench_query("ab_dl" if v == "handwritten" else name, WARMUP_SIZE))
    reports = []
    for n in sizes:
        rep = BenchReport(name, n, reps)
        queries = {v: bench_query("ab_dl" if v == "handwritten" else name, n) for v in dbs}
        samples: dict[str, list[int]] = {v: [] for v in dbs}
        # round-robin over variants so machine drift hits every variant alike
        for _ in range(reps):
            for v, db in dbs.items():
                dt, cs = run_once(db, *queries[v])
                samples[v].append(dt)
                rep.checksums[v] = cs
        rep.times = {v: int(statistics.median(ts)) for v, ts in samples.items()}
        if not rep.consistent:
            raise ChecksumMismatch(f"{name} at n={n}: variants disagree: {rep.checksums}")
        reports.append(rep)
    return reports


def run_bench(suite: str, sizes=DEFAULT_SIZES, reps: int = 5, *, parallel: bool = False) -> list[BenchReport]:
    """Run every program of ``suite`` (or the single program named ``suite``).

    With ``parallel`` the programs run on worker threads, one machine each;
    timings then include interference from the other rows.
    """
    names = SUITES.get(suite, [suite])
    if not parallel:
        return [rep for name in names for rep in bench_program(name, sizes, reps)]
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda name: bench_program(name, sizes, reps), names))
    return [rep for reps_ in results for rep in reps_]


def write_json(reports: list[BenchReport], path: str) -> None:
    rows = [r for rep in reports for r in rep.rows()]
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)


def format_report(reports: list[BenchReport]) -> str:
    lines = []
    for rep in reports:
        times = "  ".join(f"{v}={t / 1e6:.2f}ms" for v, t in rep.times.items())
        ratios = "  ".join(f"{k}={r:.1f}x" for k, r in rep.ratios.items() if k.startswith("elaborated/"))
        if "handwritten" in rep.times:
            ratios += f"  rewritten_pe/handwritten={rep.ratio('rewritten_pe', 'handwritten'):.2f}x"
        lines.append(f"{rep.program:14s} n={rep.size:<8d} {times}  {ratios}")
    return "\n".join(lines)


__all__ = [
    "BenchReport", "ChecksumMismatch", "DEFAULT_SIZES", "NOISE_FLOOR_NS", "SUITES", "VARIANTS",
    "bench_program", "bench_query", "calculator_program", "checksum", "corpus_source",
    "format_report", "gen_input", "load_corpus", "run_bench", "run_once", "write_json",
]
