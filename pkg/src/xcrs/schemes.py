"""The shipped rule sets and the compilation pipeline built from them.

Each stage is a single normalization under one rule set:

    X source --parse--> AST --N--> algebra --R--> algebra --E--> target

A stage whose output still contains constructors of its own scheme or of the
previous stage's vocabulary is reported as stuck.
"""

from __future__ import annotations

from functools import lru_cache
from importlib.resources import files

from .engine import RuleSet, StrategyConfig, normalize
from .errors import InferenceError, StuckError
from .render import render_term
from .syntax import parse_rule_file, parse_term
from .term import Construction, Environment, Scope, Term, Variable
from .xfront import AST_CONSTRUCTORS, parse_x

RULE_SET_NAMES = ("N", "R", "E", "T")

ALGEBRA_CONSTRUCTORS = frozenset({
    "Algebraic", "Dep", "Map", "MapConcat", "Select", "Product", "Tuple", "ACons", "ANil",
    "Extract", "Concat", "Call", "Empty", "If", "Elem",
})
TARGET_CONSTRUCTORS = frozenset({
    "TMain", "TPipe", "TCopy", "TSeq", "TNoop", "TEmpty", "TCall", "TLiteral", "TMakeTuple",
    "TDCons", "TDNil", "TPick", "TMerge", "TSwitch", "TCase", "TOtherwise", "TMakeElement",
    "True", "Columns",
})
SCHEME_CONSTRUCTORS = {"N": {"N", "NQ"}, "E": {"E", "E2", "D", "V"}}
FUSE_RULE = "SelectFuse"

# constructors whose first argument is a function name, not a term
_NAMED_CALLS = {"call", "Call", "TCall"}


def rule_text(name: str) -> str:
    return (files("xcrs") / "rules" / f"{name}.crs").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_rules(name: str) -> RuleSet:
    """Parse and validate one shipped rule set (``N``, ``R``, ``E`` or ``T``)."""
    if name not in RULE_SET_NAMES:
        raise KeyError(f"no shipped rule set {name!r}")
    return parse_rule_file(rule_text(name), file=f"{name}.crs").rule_set()


def load_fixture(name: str) -> Term:
    """Parse a bundled ``.term`` fixture such as ``fig4``."""
    text = (files("xcrs") / "fixtures" / f"{name}.term").read_text(encoding="utf-8")
    return parse_term(text, file=f"{name}.term")


def fixture_path(name: str):
    return files("xcrs") / "fixtures" / name


def _offending(t: Term, forbidden: set[str] | frozenset[str]) -> str | None:
    """First forbidden constructor name in ``t``, skipping call-name positions."""
    if isinstance(t, Variable):
        return None
    if not isinstance(t, Construction):
        return t.name
    if t.name in forbidden:
        return t.name
    for _, v in t.env.entries:
        hit = _offending(v, forbidden)
        if hit:
            return hit
    for i, s in enumerate(t.args):
        if i == 0 and t.name in _NAMED_CALLS:
            continue
        hit = _offending(s.body, forbidden)
        if hit:
            return hit
    return None


def check_stage(stage: str, t: Term, forbidden) -> Term:
    hit = _offending(t, forbidden)
    if hit is not None:
        raise StuckError(stage, t, f"residual constructor {hit!r}")
    return t


def normalize_query(ast: Term, config: StrategyConfig | None = None) -> Term:
    """Translate an X AST to nested-relational algebra."""
    out = normalize(load_rules("N"), ast, config)
    return check_stage("normalize", out, AST_CONSTRUCTORS | SCHEME_CONSTRUCTORS["N"])


def optimization_rules(fuse: bool = True) -> RuleSet:
    rules = load_rules("R")
    return rules if fuse else rules.without(FUSE_RULE)


def optimize_algebra(a: Term, config: StrategyConfig | None = None, *, fuse: bool = True) -> Term:
    return normalize(optimization_rules(fuse), a, config)


def emit_code(a: Term, config: StrategyConfig | None = None) -> Term:
    """Emit dataflow target code for an (optimized) algebra term."""
    out = normalize(load_rules("E"), Construction("E", (Scope((), a),)), config)
    return check_stage("emit", out, ALGEBRA_CONSTRUCTORS | SCHEME_CONSTRUCTORS["E"])


def compile_program(src: str, config: StrategyConfig | None = None, *, fuse: bool = True,
                    file: str = "<x>") -> Term:
    ast = parse_x(src, file)
    return emit_code(optimize_algebra(normalize_query(ast, config), config, fuse=fuse), config)


def inference_goal(env: Environment, a: Term) -> Term:
    return Construction("⊢?", (Scope((), a),), env)


def infer_type(env: Environment, a: Term, config: StrategyConfig | None = None) -> Term:
    """Derive ``"⊢!"[t]`` for ``{env}"⊢?"[a]`` under rule set T.

    Raises ``InferenceError`` with the residual term when no derivation exists.
    """
    out = normalize(load_rules("T"), inference_goal(env, a), config)
    if isinstance(out, Construction) and out.name == "⊢!" and out.arity == 1:
        return out
    raise InferenceError(out)


def describe_stuck(err: StuckError) -> str:
    return f"{err}\n{render_term(err.term)}"
