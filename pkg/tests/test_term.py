import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import terms
from xcrs.render import render_pair, render_term
from xcrs.syntax import parse_term
from xcrs.term import (
    C,
    Construction,
    Environment,
    MetaApp,
    Scope,
    Variable,
    all_variables,
    alpha_equal,
    bind,
    free_variables,
    free_variables_ordered,
    fresh_variable,
    is_pattern_term,
    naming_session,
    substitute,
)


def rename_binders(t):
    """Alpha-variant of ``t`` with every binder replaced by a new variable."""
    if isinstance(t, Variable):
        return t
    if isinstance(t, MetaApp):
        return MetaApp(t.name, tuple(rename_binders(a) for a in t.args))
    entries = tuple((k, rename_binders(v)) for k, v in t.env.entries)
    args = []
    for s in t.args:
        fresh = tuple(Variable(b.name + "r") for b in s.binders)
        body = substitute(s.body, dict(zip(s.binders, fresh)))
        args.append(Scope(fresh, rename_binders(body)))
    return Construction(t.name, tuple(args), Environment(entries, t.env.capture))


class TestVariables:
    def test_identity_is_uid_not_name(self):
        a, b = Variable("x"), Variable("x")
        assert a != b and a.uid != b.uid
        assert a == a

    def test_immutable(self):
        with pytest.raises(AttributeError):
            Variable("x").name = "y"

    def test_fresh_names_follow_suffix_scheme(self):
        with naming_session():
            names = [fresh_variable("id1").name for _ in range(3)]
            assert names == ["id1", "id1_1", "id1_2"]
            Variable("$x")
            assert fresh_variable("$x").name == "$x_1"

    def test_sessions_are_independent(self):
        with naming_session():
            fresh_variable("h")
            with naming_session():
                assert fresh_variable("h").name == "h"
            assert fresh_variable("h").name == "h_1"

    def test_uids_unique_across_threads(self):
        seen = []

        def work():
            seen.extend(Variable("t").uid for _ in range(500))

        threads = [threading.Thread(target=work) for _ in range(4)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert len(set(seen)) == 2000


class TestStructure:
    def test_scope_binders_distinct(self):
        x = Variable("x")
        with pytest.raises(ValueError):
            Scope((x, x), x)

    def test_environment_keys_distinct(self):
        with pytest.raises(ValueError):
            Environment((("K", C("A")), ("K", C("B"))))

    def test_meta_name_needs_hash(self):
        with pytest.raises(ValueError):
            MetaApp("m")

    def test_pattern_term_detection(self):
        assert is_pattern_term(C("F", MetaApp("#a")))
        assert is_pattern_term(Construction("F", (), Environment((), "#rho")))
        assert not is_pattern_term(C("F", C("G")))


class TestAlphaEqual:
    def test_bound_renaming(self):
        x, y = Variable("x"), Variable("y")
        assert alpha_equal(C("Dep", bind(x, x)), C("Dep", bind(y, y)))

    def test_bound_renaming_with_shared_free(self):
        i, j, f, r = (Variable(n) for n in ("i", "j", "f", "r"))
        a = C("Map", C("Dep", bind(i, C("Extract", i, f))), r)
        b = C("Map", C("Dep", bind(j, C("Extract", j, f))), r)
        assert alpha_equal(a, b)

    def test_distinct_free_variables(self):
        i, f, g = Variable("i"), Variable("f"), Variable("g")
        assert not alpha_equal(C("Extract", i, f), C("Extract", i, g))

    def test_free_same_name_different_uid(self):
        assert not alpha_equal(Variable("f"), Variable("f"))
        assert alpha_equal(Variable("f"), Variable("f"), free_by_name=True)

    def test_bound_does_not_equal_free(self):
        x, y = Variable("x"), Variable("y")
        assert not alpha_equal(C("L", bind(x, x)), C("L", bind(x, y)))

    def test_environments_are_key_sets(self):
        a = Construction("F", (), Environment((("K", C("A")), ("L", C("B")))))
        b = Construction("F", (), Environment((("L", C("B")), ("K", C("A")))))
        assert alpha_equal(a, b)
        c = Construction("F", (), Environment((("K", C("A")),)))
        assert not alpha_equal(a, c)

    def test_binder_count_matters(self):
        x, y = Variable("x"), Variable("y")
        assert not alpha_equal(C("L", bind(x, y, x)), C("L", bind(x, x)))

    @given(terms())
    def test_reflexive_and_invariant_under_renaming(self, t):
        assert alpha_equal(t, t)
        u = rename_binders(t)
        assert alpha_equal(t, u) and alpha_equal(u, t)
        w = rename_binders(u)
        assert alpha_equal(u, w) and alpha_equal(t, w)

    @given(terms(), terms())
    def test_symmetric(self, a, b):
        assert alpha_equal(a, b) == alpha_equal(b, a)

    @given(st.data())
    def test_transitive(self, data):
        free = [Variable("f"), Variable("g")]
        a, b, c = (data.draw(terms(max_depth=2, free=free)) for _ in range(3))
        if alpha_equal(a, b) and alpha_equal(b, c):
            assert alpha_equal(a, c)


class TestFreeVariables:
    def test_binder_removes(self):
        x, f = Variable("x"), Variable("f")
        assert free_variables(C("Dep", bind(x, C("Extract", x, f)))) == {f}

    def test_fragment_with_env_tag(self):
        i, f, ident = Variable("i"), Variable("f"), Variable("id")
        t = C("Map", C("Dep", bind(i, C("Tuple", C("ACons", C("@", f, i), C("ANil"))))), ident)
        assert free_variables(t) == {f, ident}

    def test_empty(self):
        assert free_variables(C("Empty")) == frozenset()

    def test_environment_keys_count(self):
        k = Variable("k")
        assert free_variables(Construction("F", (), Environment(((k, C("A")),)))) == {k}

    def test_ordered(self):
        a, b = Variable("a"), Variable("b")
        assert free_variables_ordered(C("F", b, a, b)) == [b, a]


class TestSubstitute:
    def test_simple(self):
        x = Variable("x")
        assert alpha_equal(substitute(C("Concat", x, x), {x: C("Empty")}), C("Concat", C("Empty"), C("Empty")))

    def test_capture_avoidance(self):
        x, y = Variable("x"), Variable("y")
        out = substitute(C("Dep", bind(y, C("Call", C("f"), x))), {x: y})
        (scope,) = out.args
        (new_binder,) = scope.binders
        assert new_binder is not y
        assert scope.body.arg(1) is y
        assert new_binder.name.startswith("y")
        assert free_variables(out) == {y}

    def test_bound_occurrence_untouched(self):
        y = Variable("y")
        t = C("Dep", bind(y, y))
        assert substitute(t, {y: C("Empty")}) is t

    def test_environment_variable_keys_renamed(self):
        k, k2 = Variable("k"), Variable("k2")
        t = Construction("F", (), Environment(((k, C("A")),)))
        assert substitute(t, {k: k2}).env.keys() == [k2]


class TestRender:
    def test_abstraction_sugar(self):
        i = Variable("i")
        assert render_term(C("Dep", bind(i, i))) == "(Dep i . i)"

    def test_application_sugar(self):
        assert render_term(C("@", Variable("$y"), Variable("id1"))) == '(v"$y" id1)'

    def test_list_sugar(self):
        assert render_term(C("$Cons", C("Empty"), C("$Nil"))) == "(Empty;)"

    def test_quoting(self):
        assert render_term(C("program", C("1"))) == '"program"["1"]'
        assert render_term(C("⊢?", C("Map"))) == '"⊢?"[Map]'

    def test_empty_brackets_omitted(self):
        assert render_term(C("Empty")) == "Empty"

    def test_environment_prefix(self):
        i = Variable("i")
        t = Construction("⊢?", (Scope((), i),), Environment(((i, C("int")),)))
        assert render_term(t) == '{i:"int"}"⊢?"[i]'

    def test_clashing_bound_names_disambiguated(self):
        outer, inner = Variable("x"), Variable("x")
        t = C("L", bind(outer, C("L", bind(inner, C("P", outer, inner)))))
        text = render_term(t, width=None)
        assert text == "(L x x_1 . P[x, x_1])"
        assert alpha_equal(parse_term(text), t)

    def test_bound_name_shadowing_free_is_renamed(self):
        free, bound = Variable("x"), Variable("x")
        t = C("F", free, C("L", bind(bound, bound)))
        text = render_term(t, width=None)
        assert text == "F[x, (L x_1 . x_1)]"

    def test_long_terms_wrap(self):
        t = C("F", *[C("Constructor%d" % n) for n in range(20)])
        text = render_term(t)
        assert "\n" in text and max(len(line) for line in text.splitlines()) <= 100
        assert alpha_equal(parse_term(text), t)

    def test_pair_rendering_shares_free_names(self):
        a, b = Variable("x"), Variable("x")
        ra, rb = render_pair(C("F", a), C("F", b, a))
        assert ra == "F[x]" and rb == "F[x_1, x]"

    @given(terms())
    def test_parse_render_round_trip(self, t):
        for width in (100, 20, None):
            back = parse_term(render_term(t, width=width))
            assert alpha_equal(back, t, free_by_name=True)

    @given(terms())
    def test_render_deterministic(self, t):
        assert render_term(t) == render_term(t)


def test_all_variables_lists_binders_and_keys():
    x, k = Variable("x"), Variable("k")
    t = Construction("F", (Scope((x,), x),), Environment(((k, C("A")),)))
    assert set(all_variables(t)) == {x, k}
