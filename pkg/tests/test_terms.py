import pytest
from hypothesis import given, settings, strategies as st

from effpl.engine import Store
from effpl.terms import (
    NIL, Atom, Compound, Int, Substitution, Var, canonical, conj, conj_list, copy_term,
    is_variant, list_items, make_list, mgu, mk, structurally_equal, term_size, term_vars, unify,
)


def test_atoms_are_interned():
    assert Atom("a") is Atom("a")
    assert Atom("a") is not Atom("b")


def test_var_identity():
    x, y = Var("X"), Var("X")
    assert x is not y and x.id != y.id
    assert len({x, y}) == 2


def test_conj_roundtrip():
    a, b, c = mk("a"), mk("b"), mk("c")
    g = conj(a, b, c)
    assert conj_list(g) == [a, b, c]
    assert conj() is Atom("true")


def test_lists():
    items = [Int(i) for i in range(5)]
    lst = make_list(items)
    got, tail = list_items(lst)
    assert tail is NIL
    assert [i.value for i in got] == list(range(5))


def test_unify_binds_and_undoes():
    s = Substitution()
    x, y = Var("X"), Var("Y")
    m = s.mark()
    assert s.unify(mk("f", x, Int(1)), mk("f", Int(2), y))
    assert s.resolve(x).value == 2
    s.undo(m)
    assert s.walk(x) is x and s.walk(y) is y


def test_unify_failure_leaves_no_bindings():
    s = Substitution()
    x = Var("X")
    assert not s.unify(mk("f", x, Int(1)), mk("f", Int(2), Int(3)))
    assert s.walk(x) is x


def test_occurs_check_flag():
    x = Var("X")
    assert Substitution(occurs_check=False).unify(x, mk("f", x))
    assert not Substitution(occurs_check=True).unify(x, mk("f", x))
    assert mgu([(x, mk("f", x))]) is None


def test_long_lists_do_not_recurse():
    n = 200_000
    a = make_list(Int(i) for i in range(n))
    v = Var("T")
    b = make_list((Int(i) for i in range(n)), v)
    s = Substitution()
    assert s.unify(a, b)
    assert s.walk(v) is NIL
    assert structurally_equal(s.resolve(a), a)


def test_variants():
    x, y, z = Var(), Var(), Var()
    assert is_variant(mk("f", x, y, x), mk("f", y, z, y))
    assert not is_variant(mk("f", x, y), mk("f", z, z))
    assert not is_variant(mk("f", x, x), mk("f", y, z))
    assert structurally_equal(canonical(mk("f", x, y)), canonical(mk("f", z, x)))


def test_copy_term_renames_apart():
    x = Var("X")
    t = mk("f", x, mk("g", x))
    c = copy_term(t)
    assert is_variant(t, c)
    assert not set(v.id for v in term_vars(c)) & {x.id}


# --- property tests against a small independent unifier -----------------------

VARS = [Var(f"V{i}") for i in range(4)]


def terms():
    leaf = st.one_of(st.sampled_from(VARS), st.sampled_from([Atom("a"), Atom("b")]),
                     st.integers(0, 2).map(Int))
    return st.recursive(
        leaf,
        lambda kids: st.builds(lambda f, xs: Compound(f, tuple(xs)),
                               st.sampled_from(["f", "g"]), st.lists(kids, min_size=1, max_size=2)),
        max_leaves=8,
    )


def ref_unify(a, b, env):
    """Textbook recursive unification with occurs check over a dict of bindings."""
    def walk(t):
        while isinstance(t, Var) and t.id in env:
            t = env[t.id]
        return t

    def occurs(v, t):
        t = walk(t)
        if isinstance(t, Var):
            return t is v
        if isinstance(t, Compound):
            return any(occurs(v, x) for x in t.args)
        return False

    a, b = walk(a), walk(b)
    if isinstance(a, Var) and isinstance(b, Var) and a is b:
        return True
    if isinstance(a, Var):
        if occurs(a, b):
            return False
        env[a.id] = b
        return True
    if isinstance(b, Var):
        return ref_unify(b, a, env)
    if isinstance(a, Compound) and isinstance(b, Compound):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return False
        return all(ref_unify(x, y, env) for x, y in zip(a.args, b.args))
    if isinstance(a, Int) and isinstance(b, Int):
        return a.value == b.value
    return a is b


def ref_resolve(t, env):
    while isinstance(t, Var) and t.id in env:
        t = env[t.id]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(ref_resolve(x, env) for x in t.args))
    return t


@settings(max_examples=300, deadline=None)
@given(terms(), terms())
def test_unify_agrees_with_reference(a, b):
    env = {}
    expected = ref_unify(a, b, env)
    for s in (Substitution(occurs_check=True), Store(occurs_check=True)):
        got = s.unify(a, b)
        assert got == expected
        if got:
            ra, rb = s.resolve(a), s.resolve(b)
            assert structurally_equal(ra, rb)
            # same instance as the reference mgu, up to renaming of free variables
            assert is_variant(ra, ref_resolve(a, env))
        s.undo(0)


@settings(max_examples=200, deadline=None)
@given(terms())
def test_variant_of_copy(t):
    assert is_variant(t, copy_term(t))
    assert term_size(t) == term_size(copy_term(t))


def test_functional_unify():
    x = Var()
    s = unify(x, Int(3))
    assert s is not None and s.walk(x).value == 3
    assert unify(Atom("a"), Atom("b")) is None


@pytest.mark.parametrize("store", [Substitution, Store])
def test_store_trail(store):
    s = store()
    x, y = Var(), Var()
    s.unify(x, y)
    m = s.mark()
    s.unify(y, Atom("a"))
    assert s.walk(x) is Atom("a")
    s.undo(m)
    assert type(s.walk(x)) is Var
    s.undo(0)


def test_resolve_detects_cycles_in_both_stores():
    from effpl.engine import Store
    from effpl.terms import CyclicTermError
    for s in (Substitution(), Store()):
        x, y = Var("X"), Var("Y")
        assert s.unify(x, Compound("f", (Compound("g", (y,)), y)))
        assert s.unify(y, Atom("a"))
        assert str(s.resolve(x)) == str(Compound("f", (Compound("g", (Atom("a"),)), Atom("a"))))
        z = Var("Z")
        assert s.unify(z, Compound("h", (z,)))
        with pytest.raises(CyclicTermError):
            s.resolve(z)
        s.undo(0)
