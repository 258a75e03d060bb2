import io
import json
import subprocess
import sys

import pytest
from helpers import HW

from effpl.bench import corpus_source
from effpl.cli import main


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"hw": HW, "ab": corpus_source("ab"), "empty": "", "bad": "p :- .\n",
                       "loop": "loop :- loop.\n"}.items():
        path = tmp_path / f"{name}.pl"
        path.write_text(text)
        paths[name] = str(path)
    return paths


def test_run_hello_world(files):
    code, text = cli("run", files["hw"], "-q", "handle hw with (out(X) -> writeln(X), continue)")
    assert (code, text) == (0, "hello\nworld\ntrue.\n")


@pytest.mark.parametrize("opt", ["none", "rewrite", "full"])
def test_run_answers_at_every_level(files, opt):
    code, text = cli("run", files["hw"], "-q", "chooseAny(or(X = 1, X = 2))", "--opt", opt)
    assert (code, text) == (0, "X = 1 ;\nX = 2.\n")


def test_run_collector_and_failure(files):
    q = ("handle hw with (out(X) -> Lin = [X|Lmid], continue(Lmid,Lout)) "
         "finally (Lin=Lout) for (Lin = List, Lout=[])")
    assert cli("run", files["hw"], "-q", q) == (0, "List = [hello,world].\n")
    assert cli("run", files["hw"], "-q", "fail") == (0, "false.\n")
    assert cli("run", files["hw"], "-q", "chooseAny(or(X = 1, X = 2))", "--limit", "1") == (0, "X = 1.\n")


def test_run_empty_program(files):
    assert cli("run", files["empty"], "-q", "true") == (0, "true.\n")


def test_emit_optimized_ab(files):
    code, text = cli("emit", files["ab"], "--stage", "optimized")
    assert code == 0
    assert text.splitlines() == ["query(A) :- ab0(A,[]).", "ab0(A,A).", "ab0([a,b|A],B) :- ab0(A,B)."]


def test_emit_stages(files):
    assert cli("emit", files["hw"], "--stage", "source")[1].startswith(":- effect out/1.")
    code, text = cli("emit", files["hw"], "--stage", "effects")
    assert code == 0 and "hw/0 : {out/1}" in text.splitlines()
    code, text = cli("emit", files["hw"], "--stage", "elaborated", "-q", "handle hw with (out(X) -> true)")
    assert code == 0 and "out(A) :- shift(out(A))." in text and text.splitlines()[-1].startswith("?- '$handler")
    code, text = cli("emit", files["ab"], "--stage", "rewritten")
    assert code == 0 and "reset(" in text
    code, text = cli("emit", files["ab"], "--stage", "optimized", "--trace-rewrites")
    assert "% ab0: O-Drop" in text and "% ab0: O-Op" in text


def test_program_errors_exit_1(files, capsys):
    assert cli("run", files["bad"], "-q", "true")[0] == 1
    assert cli("run", files["hw"] + ".missing", "-q", "true")[0] == 1
    assert cli("run", files["hw"], "-q", "nope(1)")[0] == 1
    assert cli("run", files["hw"], "-q", "X = f(X), writeln(X)")[0] == 1
    assert cli("run", files["loop"], "-q", "loop", "--max-steps", "1000")[0] == 1
    assert cli("run", files["hw"], "-q", "p(")[0] == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_2(files, capsys):
    assert cli("run", files["hw"])[0] == 2
    assert cli("emit", files["hw"], "--stage", "bogus")[0] == 2
    assert cli("bench", "ab", "--sizes", "x")[0] == 2
    assert cli("bench", "ab", "--reps", "0")[0] == 2
    assert cli("bench", "nosuch")[0] == 2
    assert cli()[0] == 2


def test_bench_json(tmp_path):
    path = tmp_path / "out.json"
    code, text = cli("bench", "ab", "--sizes", "0,10", "--reps", "1", "--json", str(path))
    assert code == 0 and text.count("ab ") == 2
    rows = json.loads(path.read_text())
    assert {r["variant"] for r in rows} == {"elaborated", "rewritten", "rewritten_pe", "handwritten"}


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "effpl", "run", files["hw"], "-q",
                           "handle hw with (out(X) -> writeln(X))"], capture_output=True, text=True)
    assert (proc.returncode, proc.stdout) == (0, "hello\ntrue.\n")
