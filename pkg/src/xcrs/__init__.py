"""Higher-order rewriting workbench with a toy query compiler written as rule data."""

from .algebra import eval_algebra
from .dataflow import run_target
from .engine import (
    Normalizer,
    Rule,
    RuleOptions,
    RuleSet,
    StrategyConfig,
    Valuation,
    instantiate,
    match_pattern,
    normalize,
    validate_rule,
)
from .errors import (
    ExecutionError,
    InferenceError,
    SourceSpan,
    StepLimitExceeded,
    StuckError,
    TermSyntaxError,
    ValidationError,
    XcrsError,
    XSyntaxError,
)
from .render import render_term
from .schemes import (
    compile_program,
    emit_code,
    infer_type,
    load_fixture,
    load_rules,
    normalize_query,
    optimize_algebra,
)
from .syntax import RuleFile, parse_rule, parse_rule_file, parse_term, render_rule
from .term import (
    C,
    M,
    Construction,
    Environment,
    MetaApp,
    Scope,
    Term,
    Variable,
    alpha_equal,
    bind,
    fresh_variable,
    free_variables,
    naming_session,
    substitute,
)
from .values import Bool, Element, Num, Store, Str, TupleV, format_value
from .xfront import lex, parse_program, parse_x, validate_ast

__version__ = "0.1.0"

__all__ = [
    "Bool", "C", "Construction", "Element", "Environment", "ExecutionError", "InferenceError",
    "M", "MetaApp", "Normalizer", "Num", "Rule", "RuleFile", "RuleOptions", "RuleSet",
    "Scope", "SourceSpan", "StepLimitExceeded", "Store", "Str", "StrategyConfig",
    "StuckError", "Term", "TermSyntaxError", "TupleV", "Valuation", "ValidationError",
    "Variable", "XSyntaxError", "XcrsError", "alpha_equal", "bind", "compile_program",
    "emit_code", "eval_algebra", "format_value", "free_variables", "fresh_variable",
    "infer_type", "instantiate", "lex", "load_fixture", "load_rules", "match_pattern",
    "naming_session", "normalize", "normalize_query", "optimize_algebra", "parse_program",
    "parse_rule", "parse_rule_file", "parse_term", "parse_x", "render_rule", "render_term",
    "run_target", "substitute", "validate_ast", "validate_rule",
]
