"""Higher-order pattern matching and innermost normalization.

Rules are ``pattern → contraction`` pairs over :mod:`xcrs.term` terms.  In a
pattern, ``#m[x1 … xk]`` matches any subterm in which, among the pattern's
in-scope binders, only ``x1 … xk`` occur free; the matched fragment is kept
abstracted over those variables and re-instantiated with the contraction's
arguments.  Two primitive pattern forms are recognized:

``$[NotMatch, q, r]``
    matches whatever ``r`` matches, provided ``q`` does not match it.
``$[Literal, p]``
    matches a nullary numeric literal constructor, which ``p`` then matches.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import chain
from typing import Callable, Iterable, Iterator, TextIO

from .errors import (
    FreeSubstitutionError,
    InstantiationError,
    StepLimitExceeded,
    ValidationError,
)
from .term import (
    Construction,
    Environment,
    MetaApp,
    Scope,
    Term,
    Variable,
    alpha_equal,
    free_variables,
    fresh_variable,
    naming_session,
    substitute,
)

OPTION_NAMES = ("Free", "Fresh", "Weak", "Copy", "Discard")
PRIMITIVE = "$"
NOT_MATCH = "NotMatch"
LITERAL = "Literal"


@dataclass(frozen=True)
class RuleOptions:
    free: frozenset[str] = frozenset()
    fresh: frozenset[str] = frozenset()
    weak: frozenset[str] = frozenset()
    copy: frozenset[str] = frozenset()
    discard: frozenset[str] = frozenset()

    @classmethod
    def from_groups(cls, groups: dict[str, Iterable[str]]) -> RuleOptions:
        return cls(**{k.lower(): frozenset(v) for k, v in groups.items()})

    @classmethod
    def of(cls, **groups: Iterable[str]) -> RuleOptions:
        return cls(**{k: frozenset(v) for k, v in groups.items()})


@dataclass(frozen=True)
class Rule:
    name: str
    pattern: Term
    contraction: Term
    options: RuleOptions = RuleOptions()

    @property
    def root(self) -> str:
        return self.pattern.name if isinstance(self.pattern, Construction) else ""


class RuleSet:
    """Ordered, immutable rule collection indexed by root constructor."""

    def __init__(self, rules: Iterable[Rule] = ()):
        self.rules = tuple(rules)
        self._index: dict[tuple[str, int], list[Rule]] = {}
        for r in self.rules:
            key = (r.root, len(r.pattern.args))
            self._index.setdefault(key, []).append(r)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __add__(self, other: RuleSet) -> RuleSet:
        return RuleSet(chain(self.rules, other.rules))

    def __getitem__(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self) -> list[str]:
        return [r.name for r in self.rules]

    def without(self, *names: str) -> RuleSet:
        return RuleSet(r for r in self.rules if r.name not in names)

    def candidates(self, t: Term) -> list[Rule]:
        if not isinstance(t, Construction):
            return []
        return self._index.get((t.name, len(t.args)), [])


@dataclass
class Valuation:
    # meta name -> (parameter variables of the subject, matched body)
    metas: dict[str, tuple[tuple[Variable, ...], Term]] = field(default_factory=dict)
    # declared-free pattern variable name -> subject variable
    free: dict[str, Variable] = field(default_factory=dict)
    # environment meta name -> residual environment
    envs: dict[str, Environment] = field(default_factory=dict)

    def copy(self) -> Valuation:
        return Valuation(dict(self.metas), dict(self.free), dict(self.envs))


def _is_primitive(t: Term, kind: str) -> bool:
    return (
        isinstance(t, Construction)
        and t.name == PRIMITIVE
        and len(t.args) >= 1
        and isinstance(t.args[0].body, Construction)
        and t.args[0].body.name == kind
    )


# validation


@dataclass
class _Census:
    pattern_metas: dict[str, list[int]] = field(default_factory=dict)  # name -> arities
    contraction_metas: dict[str, list[int]] = field(default_factory=dict)
    pattern_envs: dict[str, int] = field(default_factory=dict)
    contraction_envs: dict[str, int] = field(default_factory=dict)
    incomplete: list[str] = field(default_factory=list)
    pattern_free: list[Variable] = field(default_factory=list)
    env_key_free: set[str] = field(default_factory=set)
    contraction_free: list[Variable] = field(default_factory=list)
    bad_meta_args: list[str] = field(default_factory=list)
    names: set[str] = field(default_factory=set)


def _scan_pattern(t: Term, bound: tuple[Variable, ...], c: _Census, negative: bool):
    if isinstance(t, Variable):
        c.names.add(t.name)
        if t not in bound:
            c.pattern_free.append(t)
        return
    if isinstance(t, MetaApp):
        c.names.add(t.name)
        args = list(t.args)
        if not all(isinstance(a, Variable) and a in bound for a in args) or len(set(args)) != len(args):
            c.bad_meta_args.append(t.name)
        if negative:
            return
        c.pattern_metas.setdefault(t.name, []).append(len(args))
        if set(bound) - set(args):
            c.incomplete.append(t.name)
        return
    if _is_primitive(t, NOT_MATCH) and len(t.args) == 3:
        _scan_pattern(t.args[1].body, bound, c, True)
        _scan_pattern(t.args[2].body, bound, c, negative)
        return
    if _is_primitive(t, LITERAL) and len(t.args) == 2:
        _scan_pattern(t.args[1].body, bound, c, negative)
        return
    if t.env.capture and not negative:
        c.names.add(t.env.capture)
        c.pattern_envs[t.env.capture] = c.pattern_envs.get(t.env.capture, 0) + 1
    for k, v in t.env.entries:
        if isinstance(k, Variable):
            c.names.add(k.name)
            if k not in bound:
                c.env_key_free.add(k.name)
        _scan_pattern(v, bound, c, negative)
    for s in t.args:
        c.names.update(b.name for b in s.binders)
        _scan_pattern(s.body, bound + s.binders, c, negative)


def _scan_contraction(t: Term, bound: tuple[Variable, ...], c: _Census):
    if isinstance(t, Variable):
        c.names.add(t.name)
        if t not in bound:
            c.contraction_free.append(t)
        return
    if isinstance(t, MetaApp):
        c.names.add(t.name)
        c.contraction_metas.setdefault(t.name, []).append(len(t.args))
        for a in t.args:
            _scan_contraction(a, bound, c)
        return
    if t.env.capture:
        c.names.add(t.env.capture)
        c.contraction_envs[t.env.capture] = c.contraction_envs.get(t.env.capture, 0) + 1
    for k, v in t.env.entries:
        if isinstance(k, Variable):
            c.names.add(k.name)
            if k not in bound:
                c.contraction_free.append(k)
        _scan_contraction(v, bound, c)
    for s in t.args:
        c.names.update(b.name for b in s.binders)
        _scan_contraction(s.body, bound + s.binders, c)


def _contains_primitive(t: Term) -> bool:
    if isinstance(t, Variable):
        return False
    if isinstance(t, MetaApp):
        return any(_contains_primitive(a) for a in t.args)
    if t.name == PRIMITIVE:
        return True
    return any(_contains_primitive(v) for _, v in t.env.entries) or any(
        _contains_primitive(s.body) for s in t.args
    )


def validate_rule(rule: Rule) -> Rule:
    """Check the linearity and scoping discipline; return ``rule`` or raise.

    Diagnostic kinds, in the order they are checked: ``pattern-root``,
    ``meta-arguments``, ``nonlinear-meta``, ``unscoped-variable``,
    ``incomplete-binders``, ``unbound-meta``, ``arity-mismatch``,
    ``unused-meta``, ``duplicated-meta``, ``fresh-in-pattern``,
    ``unknown-option-name``, ``primitive-in-contraction``.
    """
    fail = lambda kind, sym, detail="": ValidationError(rule.name, kind, sym, detail)  # noqa: E731
    p, opts = rule.pattern, rule.options
    if not isinstance(p, Construction) or p.name == PRIMITIVE:
        raise fail("pattern-root", getattr(p, "name", "?"), "pattern must be a construction")
    c = _Census()
    _scan_pattern(p, (), c, False)
    _scan_contraction(rule.contraction, (), c)

    if c.bad_meta_args:
        raise fail("meta-arguments", c.bad_meta_args[0], "arguments must be distinct bound variables")
    relaxed = opts.copy
    for name, arities in c.pattern_metas.items():
        if len(arities) > 1 and name not in relaxed:
            raise fail("nonlinear-meta", name, "occurs more than once in the pattern")
    for name, n in c.pattern_envs.items():
        if n > 1 and name not in relaxed:
            raise fail("nonlinear-meta", name, "occurs more than once in the pattern")
    declared_free = opts.free | c.env_key_free
    for v in c.pattern_free:
        if v.name not in declared_free:
            raise fail("unscoped-variable", v.name, "pattern variable neither bound nor Free")
    pattern_free_names = {v.name for v in c.pattern_free} | c.env_key_free
    for v in c.contraction_free:
        if v.name not in pattern_free_names and v.name not in opts.fresh:
            raise fail("unscoped-variable", v.name, "contraction variable neither bound, Free nor Fresh")
    for name in c.incomplete:
        if name not in opts.weak:
            raise fail("incomplete-binders", name, "omits in-scope binders without Weak")
    for name in chain(c.contraction_metas, c.contraction_envs):
        if name not in c.pattern_metas and name not in c.pattern_envs:
            raise fail("unbound-meta", name, "not matched by the pattern")
    for name, arities in c.contraction_metas.items():
        expected = c.pattern_metas[name][0] if name in c.pattern_metas else None
        if any(a != expected for a in arities):
            raise fail("arity-mismatch", name, f"pattern binds {expected} parameters")
        if name in c.pattern_envs:
            raise fail("arity-mismatch", name, "environment meta-variable used as a term")
    for name in c.contraction_envs:
        if name in c.pattern_metas:
            raise fail("arity-mismatch", name, "term meta-variable used as an environment")
    uses = {n: len(a) for n, a in c.contraction_metas.items()}
    uses.update(c.contraction_envs)
    for name in chain(c.pattern_metas, c.pattern_envs):
        if uses.get(name, 0) == 0 and name not in opts.discard and name not in relaxed:
            raise fail("unused-meta", name, "not used in the contraction without Discard")
    for name, n in uses.items():
        if n > 1 and name not in relaxed:
            raise fail("duplicated-meta", name, "used more than once without Copy")
    pattern_var_names = {v.name for v in c.pattern_free}
    for name in opts.fresh:
        if name in pattern_var_names:
            raise fail("fresh-in-pattern", name, "Fresh variables cannot occur in the pattern")
    for group in (opts.free, opts.fresh, opts.weak, opts.copy, opts.discard):
        for name in group:
            if name not in c.names:
                raise fail("unknown-option-name", name, "option names a symbol absent from the rule")
    if _contains_primitive(rule.contraction):
        raise fail("primitive-in-contraction", PRIMITIVE)
    return rule


# matching


class _Matcher:
    # unbound pattern variables match free subject variables; whether they
    # were declared is the business of validate_rule

    def match(self, p: Term, s: Term, pb: dict, val: Valuation) -> bool:
        """``pb`` maps pattern binders to the corresponding subject binders."""
        if isinstance(p, Variable):
            if p in pb:
                return s is pb[p]
            if not isinstance(s, Variable) or s in pb.values():
                return False
            seen = val.free.get(p.name)
            if seen is not None:
                return seen is s
            val.free[p.name] = s
            return True
        if isinstance(p, MetaApp):
            return self.match_meta(p, s, pb, val)
        if p.name == PRIMITIVE:
            if _is_primitive(p, NOT_MATCH):
                return self.match_not(p, s, pb, val)
            if _is_primitive(p, LITERAL):
                if not (isinstance(s, Construction) and s.literal and not s.args and not s.env):
                    return False
                return self.match(p.args[1].body, s, pb, val)
        if not isinstance(s, Construction) or s.name != p.name or len(s.args) != len(p.args):
            return False
        for ps, ss in zip(p.args, s.args):
            if len(ps.binders) != len(ss.binders):
                return False
        for ps, ss in zip(p.args, s.args):
            if ps.binders:
                inner = dict(pb)
                inner.update(zip(ps.binders, ss.binders))
            else:
                inner = pb
            if not self.match(ps.body, ss.body, inner, val):
                return False
        if p.env:
            return self.match_env(list(p.env.entries), p.env.capture, s.env, pb, val, set())
        return True

    def match_meta(self, p: MetaApp, s: Term, pb: dict, val: Valuation) -> bool:
        params = tuple(pb[a] for a in p.args)
        scoped = set(pb.values())
        if scoped and (free_variables(s) & scoped) - set(params):
            return False
        prev = val.metas.get(p.name)
        if prev is not None:
            old_params, old_body = prev
            if len(old_params) != len(params):
                return False
            renamed = substitute(old_body, dict(zip(old_params, params)))
            return alpha_equal(renamed, s)
        val.metas[p.name] = (params, s)
        return True

    def match_not(self, p: Construction, s: Term, pb: dict, val: Valuation) -> bool:
        probe = Valuation(free=dict(val.free))
        if self.match(p.args[1].body, s, pb, probe):
            return False
        return self.match(p.args[2].body, s, pb, val)

    def match_env(self, entries, capture, env: Environment, pb, val, used: set) -> bool:
        if not entries:
            if capture:
                residual = tuple((k, v) for k, v in env.entries if not _key_in(k, used))
                prev = val.envs.get(capture)
                if prev is not None:
                    return _env_same(prev, Environment(residual))
                val.envs[capture] = Environment(residual)
            return True
        (pk, pv), rest = entries[0], entries[1:]
        if isinstance(pk, Variable) and pk not in pb and pk.name not in val.free:
            for sk, sv in env.entries:
                if not isinstance(sk, Variable) or sk in pb.values() or _key_in(sk, used):
                    continue
                trial = val.copy()
                trial.free[pk.name] = sk
                if self.match(pv, sv, pb, trial) and self.match_env(
                    rest, capture, env, pb, trial, used | {sk}
                ):
                    val.metas, val.free, val.envs = trial.metas, trial.free, trial.envs
                    return True
            return False
        if isinstance(pk, Variable):
            key = pb.get(pk) or val.free[pk.name]
        else:
            key = pk
        sv = env.get(key)
        if sv is None or not self.match(pv, sv, pb, val):
            return False
        return self.match_env(rest, capture, env, pb, val, used | {key})


def _key_in(k, keys: set) -> bool:
    return any(k is u if isinstance(k, Variable) else k == u for u in keys)


def _env_same(a: Environment, b: Environment) -> bool:
    return alpha_equal(Construction("E", (), a), Construction("E", (), b))


def match_pattern(pattern: Term, term: Term, options: RuleOptions | None = None) -> Valuation | None:
    """Match ``pattern`` against the data term ``term``; ``None`` if no match."""
    val = Valuation()
    if _Matcher().match(pattern, term, {}, val):
        return val
    return None


# contraction


class _Instantiator:
    def __init__(self, val: Valuation, fresh: frozenset[str], guard: set[Variable] | None):
        self.val = val
        self.fresh = fresh
        self.fresh_vars: dict[str, Variable] = {}
        self.guard = guard

    def fresh_var(self, name: str, hint: str | None = None) -> Variable:
        v = self.fresh_vars.get(name)
        if v is None:
            v = self.fresh_vars[name] = fresh_variable(hint or name)
        return v

    def hint_fresh(self, t: Term):
        # a Fresh variable passed to a meta-application inherits the display
        # name of the subject binder it replaces
        if isinstance(t, MetaApp):
            params = self.val.metas.get(t.name, ((), None))[0]
            for i, a in enumerate(t.args):
                if (
                    isinstance(a, Variable)
                    and a.name in self.fresh
                    and a.name not in self.fresh_vars
                    and i < len(params)
                ):
                    self.fresh_var(a.name, params[i].name)
                self.hint_fresh(a)
        elif isinstance(t, Construction):
            for _, v in t.env.entries:
                self.hint_fresh(v)
            for s in t.args:
                self.hint_fresh(s.body)

    def var(self, v: Variable, cmap: dict) -> Variable:
        if v in cmap:
            return cmap[v]
        if v.name in self.val.free:
            return self.val.free[v.name]
        if v.name in self.fresh:
            return self.fresh_var(v.name)
        raise InstantiationError(f"no binding for variable {v.name!r}")

    def build(self, t: Term, cmap: dict) -> Term:
        if isinstance(t, Variable):
            return self.var(t, cmap)
        if isinstance(t, MetaApp):
            binding = self.val.metas.get(t.name)
            if binding is None:
                raise InstantiationError(f"no binding for meta-variable {t.name}")
            params, body = binding
            if len(params) != len(t.args):
                raise InstantiationError(
                    f"{t.name} expects {len(params)} arguments, got {len(t.args)}"
                )
            args = [self.build(a, cmap) for a in t.args]
            if self.guard:
                for x, a in zip(params, args):
                    if x is not a and x in self.guard:
                        raise FreeSubstitutionError(
                            f"substitution for {x.name!r}, previously matched as Free"
                        )
            return substitute(body, dict(zip(params, args)))
        env = t.env
        if env:
            base: tuple = ()
            if env.capture:
                residual = self.val.envs.get(env.capture)
                if residual is None:
                    raise InstantiationError(f"no binding for environment {env.capture}")
                base = residual.entries
            out = Environment(base)
            for k, v in env.entries:
                key = self.var(k, cmap) if isinstance(k, Variable) else k
                out = out.extended(key, self.build(v, cmap))
            env = out
        args = []
        for s in t.args:
            if s.binders:
                fresh = tuple(fresh_variable(b.name) for b in s.binders)
                inner = dict(cmap)
                inner.update(zip(s.binders, fresh))
                args.append(Scope(fresh, self.build(s.body, inner)))
            else:
                args.append(Scope((), self.build(s.body, cmap)))
        return Construction(t.name, tuple(args), env)


def instantiate(
    valuation: Valuation,
    contraction: Term,
    fresh: Iterable[str] = (),
    *,
    guard: set[Variable] | None = None,
) -> Term:
    """Build the contraction under ``valuation``.

    Binders of the contraction become new variables on every call; names in
    ``fresh`` denote one new variable each.  ``guard`` lists variables that
    must not be substituted (those matched through Free options).
    """
    inst = _Instantiator(valuation, frozenset(fresh), guard)
    inst.hint_fresh(contraction)
    return inst.build(contraction, {})


def try_rule(rule: Rule, t: Term, guard: set[Variable] | None = None) -> Term | None:
    val = match_pattern(rule.pattern, t, rule.options)
    if val is None:
        return None
    if guard is not None:
        guard.update(val.free[n] for n in rule.options.free if n in val.free)
    return instantiate(val, rule.contraction, rule.options.fresh, guard=guard)


# positions


Position = tuple  # elements: int (argument index) or ("env", i)


def subterm_at(t: Term, path: Position) -> Term:
    for step in path:
        if isinstance(t, Construction) and isinstance(step, int) and 0 <= step < len(t.args):
            t = t.args[step].body
        elif isinstance(t, Construction) and isinstance(step, tuple) and step[0] == "env":
            t = t.env.entries[step[1]][1]
        else:
            raise IndexError(f"invalid position {path!r}")
    return t


def replace_at(t: Term, path: Position, new: Term) -> Term:
    if not path:
        return new
    if not isinstance(t, Construction):
        raise IndexError(f"invalid position {path!r}")
    step, rest = path[0], path[1:]
    if isinstance(step, int):
        if not 0 <= step < len(t.args):
            raise IndexError(f"invalid position {path!r}")
        args = list(t.args)
        s = args[step]
        args[step] = Scope(s.binders, replace_at(s.body, rest, new))
        return Construction(t.name, tuple(args), t.env)
    entries = list(t.env.entries)
    k, v = entries[step[1]]
    entries[step[1]] = (k, replace_at(v, rest, new))
    return Construction(t.name, t.args, Environment(tuple(entries), t.env.capture))


def format_position(path: Position) -> str:
    if not path:
        return "ε"
    return ".".join(str(s) if isinstance(s, int) else "{%d}" % s[1] for s in path)


def apply_rule_at(rules: RuleSet, t: Term, path: Position = ()) -> Term | None:
    """Rewrite the subterm at ``path`` with the first matching rule."""
    sub = subterm_at(t, path)
    for rule in rules.candidates(sub):
        out = try_rule(rule, sub)
        if out is not None:
            return replace_at(t, path, out)
    return None


# strategy


@dataclass
class StrategyConfig:
    max_steps: int | None = None
    trace: bool = False
    trace_file: TextIO | None = None


@dataclass(frozen=True)
class TraceStep:
    rule: str
    path: Position
    redex: Term

    def __str__(self):
        from .render import render_term

        return f"{self.rule} @ {format_position(self.path)}: {render_term(self.redex, width=None)}"


class Normalizer:
    """Leftmost-innermost rewriting with first-matching-rule selection.

    Fresh names are drawn from a naming session seeded with the free
    variable names of the input, so repeated runs give identical output.
    """

    def __init__(self, rules: RuleSet, config: StrategyConfig | None = None,
                 on_step: Callable[[TraceStep], None] | None = None):
        self.rules = rules
        self.config = config or StrategyConfig()
        self.on_step = on_step
        self.steps = 0
        self.history: list[TraceStep] = []
        self._normal: dict[int, Term] = {}
        self._guard: set[Variable] = set()

    def run(self, term: Term) -> Term:
        with naming_session(v.name for v in free_variables(term)):
            limit = self.config.max_steps
            while True:
                if limit is not None and self.steps >= limit:
                    if self._has_redex(term):
                        raise StepLimitExceeded(term, self.steps)
                    return term
                out = self._step(term, ())
                if out is None:
                    return term
                term = out

    def _has_redex(self, t: Term) -> bool:
        if isinstance(t, Variable) or id(t) in self._normal:
            return False
        if isinstance(t, Construction):
            for _, v in t.env.entries:
                if self._has_redex(v):
                    return True
            for s in t.args:
                if self._has_redex(s.body):
                    return True
        return any(match_pattern(r.pattern, t, r.options) is not None for r in self.rules.candidates(t))

    def _step(self, t: Term, path: Position) -> Term | None:
        if isinstance(t, (Variable, MetaApp)) or id(t) in self._normal:
            return None
        for i, (k, v) in enumerate(t.env.entries):
            out = self._step(v, path + (("env", i),))
            if out is not None:
                entries = list(t.env.entries)
                entries[i] = (k, out)
                return Construction(t.name, t.args, Environment(tuple(entries), t.env.capture))
        for i, s in enumerate(t.args):
            out = self._step(s.body, path + (i,))
            if out is not None:
                args = list(t.args)
                args[i] = Scope(s.binders, out)
                return Construction(t.name, tuple(args), t.env)
        for rule in self.rules.candidates(t):
            out = try_rule(rule, t, self._guard)
            if out is not None:
                self.steps += 1
                step = TraceStep(rule.name, path, t)
                self.history.append(step)
                if self.config.trace:
                    print(step, file=self.config.trace_file or sys.stderr)
                if self.on_step:
                    self.on_step(step)
                return out
        self._normal[id(t)] = t
        return None


def normalize(rules: RuleSet, term: Term, config: StrategyConfig | None = None) -> Term:
    return Normalizer(rules, config).run(term)
