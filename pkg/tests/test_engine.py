import io

import pytest

from xcrs.engine import (
    Normalizer,
    Rule,
    RuleOptions,
    RuleSet,
    StrategyConfig,
    Valuation,
    apply_rule_at,
    format_position,
    instantiate,
    match_pattern,
    normalize,
    replace_at,
    subterm_at,
    try_rule,
    validate_rule,
)
from xcrs.errors import FreeSubstitutionError, InstantiationError, StepLimitExceeded, ValidationError
from xcrs.render import render_term
from xcrs.schemes import load_fixture, load_rules
from xcrs.syntax import parse_rule, parse_rule_file, parse_term
from xcrs.term import C, Construction, MetaApp, Scope, Variable, alpha_equal, free_variables


def rules(src: str) -> RuleSet:
    return parse_rule_file(src).rule_set()


def fig4_outer_map():
    return load_fixture("fig4").arg(0).arg(0)


class TestValidate:
    def test_duplicated_meta_rejected(self):
        with pytest.raises(ValidationError) as err:
            parse_rule("- : F[#a] → G[#a, #a] ;")
        assert err.value.kind == "duplicated-meta" and err.value.symbol == "#a"

    def test_copy_accepts_duplication(self):
        assert parse_rule("-[Copy[#a]] : F[#a] → G[#a, #a] ;")

    def test_incomplete_binders_need_weak(self):
        with pytest.raises(ValidationError) as err:
            parse_rule("- : Map[Dep id . #dop[]] → #dop ;")
        assert err.value.kind == "incomplete-binders" and err.value.symbol == "#dop"
        assert parse_rule("-[Weak[#dop]] : Map[Dep id . #dop[]] → #dop ;")

    def test_validate_rule_directly(self):
        x = Variable("x")
        rule = Rule("R", C("F", x), C("G"))
        with pytest.raises(ValidationError, match="unscoped-variable"):
            validate_rule(rule)
        assert validate_rule(Rule("R", C("F", x), C("G"), RuleOptions.of(free=["x"])))

    def test_error_message_names_rule_and_symbol(self):
        with pytest.raises(ValidationError) as err:
            parse_rule("Bad : F[#a] → G ;")
        assert "Bad" in str(err.value) and "#a" in str(err.value)

    def test_negative_subpattern_metas_are_exempt(self):
        parse_rule("-[Free[h]] : E2[MapConcat[Dep id.$[NotMatch,#dop[],#dop[id]], #], h] → X[#dop[h], #] ;")

    @pytest.mark.parametrize("name", ["N", "R", "E", "T"])
    def test_shipped_rules_validate(self, name):
        for rule in load_rules(name):
            validate_rule(rule)


class TestMatch:
    def test_map_pattern_against_fig4(self):
        p = parse_term("Map[Dep i . #b[i], #p]")
        t = fig4_outer_map()
        val = match_pattern(p, t)
        assert val is not None
        params, body = val.metas["#b"]
        assert body.name == "Call" and body.arg(0).name == "plus"
        assert params == t.arg(0).args[0].binders
        assert val.metas["#p"][1] is t.arg(1) and val.metas["#p"][1].name == "Select"

    def test_weak_pattern_matches_independent_body(self):
        p = parse_term("MapConcat[Dep id . #dop[], #p]")
        inner = fig4_outer_map().arg(1).arg(1)
        assert inner.name == "MapConcat"
        assert match_pattern(p, inner, RuleOptions.of(weak=["#dop"])) is not None

    def test_weak_pattern_rejects_dependent_body(self):
        p = parse_term("MapConcat[Dep id . #dop[], #p]")
        t = parse_term("MapConcat[Dep id . Extract[id, f], r]")
        assert match_pattern(p, t, RuleOptions.of(weak=["#dop"])) is None

    def test_constructor_arity_and_binder_count(self):
        p = parse_term("F[#a, #b]")
        assert match_pattern(p, parse_term("F[A]")) is None
        assert match_pattern(p, parse_term("G[A, B]")) is None
        assert match_pattern(parse_term("F[x . #a[x]]"), parse_term("F[A]")) is None

    def test_free_variable_consistency(self):
        rule = parse_rule("-[Free[v]] : F[v, v] → G ;")
        x, y = Variable("x"), Variable("y")
        assert match_pattern(rule.pattern, C("F", x, x)) is not None
        assert match_pattern(rule.pattern, C("F", x, y)) is None
        assert match_pattern(rule.pattern, C("F", x, Variable("x"))) is None

    def test_free_does_not_match_bound_variable(self):
        rule = parse_rule("-[Free[v]] : F[y . v] → G ;")
        b = Variable("b")
        assert match_pattern(rule.pattern, C("F", Scope((b,), b))) is None
        assert match_pattern(rule.pattern, C("F", Scope((b,), Variable("z")))) is not None

    def test_environment_key_and_capture(self):
        rule = parse_rule('- : {#rho; K:#v}F[#a] → {#rho}G[#a, #v] ;')
        t = parse_term("{K:A; L:B; M:C}F[X]")
        val = match_pattern(rule.pattern, t)
        assert val.metas["#v"][1].name == "A"
        assert [k for k, _ in val.envs["#rho"].entries] == ["L", "M"]
        out = instantiate(val, rule.contraction)
        assert render_term(out) == "{L:B;M:C}G[X, A]"

    def test_environment_missing_key(self):
        rule = parse_rule("- : {K:#v}F → G[#v] ;")
        assert match_pattern(rule.pattern, parse_term("{L:A}F")) is None

    def test_environment_variable_key_search(self):
        rule = parse_rule('Lookup : {i:#t}"⊢?"[i] → "⊢!"[#t] ;')
        t = parse_term('{j:"bool"; i:"int"}"⊢?"[i]')
        val = match_pattern(rule.pattern, t)
        assert val.metas["#t"][1].name == "int"

    def test_not_match_primitive(self):
        p = parse_term("F[$[NotMatch, G[#x], #y]]")
        assert match_pattern(p, parse_term("F[H]")) is not None
        assert match_pattern(p, parse_term("F[G[A]]")) is None

    def test_literal_primitive(self):
        p = parse_term("F[$[Literal, #n]]")
        assert match_pattern(p, parse_term('F["42"]')).metas["#n"][1].name == "42"
        assert match_pattern(p, parse_term("F[Map]")) is None

    def test_repeated_meta_requires_equal_subterms(self):
        rule = parse_rule("-[Copy[#a]] : F[#a, #a] → #a ;")
        assert match_pattern(rule.pattern, parse_term("F[G[A], G[A]]")) is not None
        assert match_pattern(rule.pattern, parse_term("F[G[A], G[B]]")) is None
        x, y = Variable("x"), Variable("y")
        assert match_pattern(rule.pattern, C("F", C("L", Scope((x,), x)), C("L", Scope((y,), y))))


class TestInstantiate:
    def test_fresh_variable_substituted_into_meta(self):
        x = Variable("x")
        val = Valuation(metas={"#Q": ((x,), C("return", x))})
        contraction = parse_rule("-[Fresh[f]] : K[y . #Q[y]] → NQ[#Q[f], A] ;").contraction
        out = instantiate(val, contraction, {"f"})
        ret = out.arg(0)
        assert ret.name == "return"
        f1 = ret.arg(0)
        assert isinstance(f1, Variable) and f1 is not x
        assert out.arg(1).name == "A"
        again = instantiate(val, contraction, {"f"})
        assert again.arg(0).arg(0) is not f1

    def test_copy_instantiation(self):
        val = Valuation(metas={"#a": ((), C("Empty"))})
        out = instantiate(val, parse_term("G[#a, #a]"))
        assert alpha_equal(out, parse_term("G[Empty, Empty]"))

    def test_missing_binding(self):
        with pytest.raises(InstantiationError):
            instantiate(Valuation(), parse_term("G[#a]"))

    def test_contraction_binders_are_new(self):
        rule = parse_rule("- : F[#a] → L[x . P[x, #a]] ;")
        t = parse_term("F[A]")
        one, two = try_rule(rule, t), try_rule(rule, t)
        assert one.args[0].binders[0] is not two.args[0].binders[0]
        assert alpha_equal(one, two)

    def test_guard_blocks_substituting_free_matched_variable(self):
        rule = parse_rule("-[Free[v]] : F[v, x . #b[x]] → #b[v] ;")
        v = Variable("v")
        t = C("F", v, Scope((Variable("x"),), C("A")))
        guard = {Variable("unrelated")}
        assert try_rule(rule, t, guard) is not None
        b = Variable("b")
        hostile = Rule("H", parse_term("K[y . #b[y]]"), parse_term("#b[Z]"))
        guard2 = {b}
        with pytest.raises(FreeSubstitutionError):
            try_rule(hostile, C("K", Scope((b,), b)), guard2)


class TestPositions:
    def test_apply_n_rule_at_root(self):
        out = apply_rule_at(load_rules("N"), parse_term("N[Empty, id]"))
        assert alpha_equal(out, parse_term("Empty"))

    def test_no_redex(self):
        assert apply_rule_at(load_rules("R"), parse_term("Extract[id, f]")) is None

    def test_remove_dep_map_at_inner_mapconcat(self):
        fig4 = load_fixture("fig4")
        path = (0, 0, 1, 1)
        assert subterm_at(fig4, path).name == "MapConcat"
        out = apply_rule_at(load_rules("R"), fig4, path)
        product = subterm_at(out, path)
        fig6_product = subterm_at(load_fixture("fig6"), path)
        assert product.name == "Product"
        # the inner MapConcat is still there until its own step
        assert product.arg(1).name == "MapConcat"
        assert alpha_equal(product.arg(0), fig6_product.arg(0), free_by_name=True)

    def test_invalid_path(self):
        with pytest.raises(IndexError):
            apply_rule_at(load_rules("R"), parse_term("F[A]"), (3,))

    def test_replace_and_format(self):
        t = parse_term("{K:A}F[B, C]")
        assert render_term(replace_at(t, (1,), parse_term("D"))) == "{K:A}F[B, D]"
        assert render_term(replace_at(t, (("env", 0),), parse_term("E"))) == "{K:E}F[B, C]"
        assert format_position(()) == "ε"
        assert format_position((0, ("env", 1), 2)) == "0.{1}.2"

    def test_outer_binders_untouched(self):
        rs = rules("- : F[#a] → G[#a] ;")
        x = Variable("x")
        t = C("L", Scope((x,), C("F", x)))
        out = normalize(rs, t)
        assert out.args[0].binders == (x,) and out.arg(0).arg(0) is x


class TestNormalize:
    def test_redex_free_term_zero_steps(self):
        n = Normalizer(load_rules("N"))
        t = parse_term("Extract[id, f]")
        assert n.run(t) is t and n.steps == 0

    def test_leftmost_innermost_order(self):
        rs = rules("A : F[#a] → G[#a] ; B : H → K ;")
        n = Normalizer(rs)
        n.run(parse_term("F[P[H, F[H]]]"))
        assert [(s.rule, s.path) for s in n.history] == [
            ("B", (0, 0)), ("B", (0, 1, 0)), ("A", (0, 1)), ("A", ()),
        ]

    def test_first_matching_rule_wins(self):
        rs = rules("First[Discard[#a]] : F[#a] → One ; Second[Discard[#a]] : F[#a] → Two ;")
        assert normalize(rs, parse_term("F[A]")).name == "One"

    def test_step_limit(self):
        rs = rules("Loop : F[#a] → F[G[#a]] ;")
        with pytest.raises(StepLimitExceeded) as err:
            normalize(rs, parse_term("F[A]"), StrategyConfig(max_steps=5))
        assert err.value.steps == 5 and err.value.term.name == "F"

    def test_step_limit_reached_exactly_at_normal_form(self):
        rs = rules("A : F → G ;")
        assert normalize(rs, parse_term("F"), StrategyConfig(max_steps=1)).name == "G"

    def test_trace_lines(self):
        buf = io.StringIO()
        rs = rules("A : F[#a] → G[#a] ;")
        normalize(rs, parse_term("H[F[B]]"), StrategyConfig(trace=True, trace_file=buf))
        assert buf.getvalue() == "A @ 0: F[B]\n"

    def test_determinism(self):
        fig4 = load_fixture("fig4")
        emit = load_rules("E")
        a = normalize(emit, Construction("E", (Scope((), load_fixture("fig6")),)))
        b = normalize(emit, Construction("E", (Scope((), load_fixture("fig6")),)))
        assert render_term(a) == render_term(b)
        assert render_term(normalize(load_rules("R"), fig4)) == render_term(normalize(load_rules("R"), fig4))

    def test_fresh_names_follow_goldens(self):
        out = normalize(load_rules("R"), load_fixture("fig4"))
        assert render_term(out) == render_term(load_fixture("fig6"))

    def test_environment_values_rewritten(self):
        rs = rules("A : F → G ;")
        assert render_term(normalize(rs, parse_term("{K:F}H[F]"))) == "{K:G}H[G]"

    def test_no_capture_on_example(self):
        out = normalize(load_rules("E"), parse_term("E[Algebraic[Dep id . Empty]]"))
        assert free_variables(out) == frozenset()
        assert alpha_equal(out, parse_term("TMain[in out . TPipe[h . TCopy[in, h], id . TNoop]]"))


def test_ruleset_index_and_editing():
    rs = load_rules("R")
    assert rs.names() == ["RemoveDepMap", "SelectFuse"]
    assert rs["SelectFuse"].root == "Select"
    assert rs.without("SelectFuse").names() == ["RemoveDepMap"]
    assert len(rs + load_rules("T")) == len(rs) + len(load_rules("T"))
    with pytest.raises(KeyError):
        rs["Nope"]
    assert rs.candidates(MetaApp("#x")) == []
