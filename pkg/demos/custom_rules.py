"""
Bring your own rules
====================

The engine is not tied to the query compiler: any rule file will do.
Here a few lines give beta reduction over a tiny
lambda calculus, with capture avoidance handled by the engine.
"""

from xcrs import StrategyConfig, normalize, parse_rule_file, parse_term, render_term

rules = parse_rule_file(
    """
    // application of an abstraction substitutes the argument
    Beta : App[Lam[x . #body[x]], #arg] → #body[#arg] ;
    // K combinator: the ignored argument must not mention the binder
    Const[Weak[#k]] : Konst[y . #k] → #k ;
    """
).rule_set()

# (\x. \y. x) y  -- the inner binder y must be renamed, not captured
term = parse_term("App[Lam[x . Lam[y . x]], y]")
print("before:", render_term(term))
print("after: ", render_term(normalize(rules, term)))

# Weak only fires when the body really ignores its binder
print(render_term(normalize(rules, parse_term("Pair[Konst[z . A], Konst[z . z]]"))))

# the step limit guards against rule sets that loop
omega = parse_term("App[Lam[x . App[x, x]], Lam[x . App[x, x]]]")
try:
    normalize(rules, omega, StrategyConfig(max_steps=50))
except Exception as exc:
    print(type(exc).__name__, "-", exc)
