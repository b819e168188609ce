"""Term representation: variables, constructions over scopes, meta-applications.

A construction carries an environment and a sequence of scopes; a scope is
the only place a binder can occur.  Variables are compared by identity (each
instance has a unique ``uid``); the name is only a display hint.
"""

from __future__ import annotations

import itertools
import re
import threading
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

NUMERAL = re.compile(r"-?[0-9]+\Z")
_SUFFIX = re.compile(r"_[0-9]+\Z")

_uids = itertools.count(1)
_uid_lock = threading.Lock()


def _next_uid() -> int:
    with _uid_lock:
        return next(_uids)


class NameSupply:
    """Set of display names in use within one naming session."""

    def __init__(self, names: Iterable[str] = ()):
        self.used = set(names)

    def register(self, name: str) -> None:
        self.used.add(name)

    def fresh_name(self, hint: str) -> str:
        if hint not in self.used:
            return hint
        k = 1
        while f"{hint}_{k}" in self.used:
            k += 1
        return f"{hint}_{k}"


_global_supply = NameSupply()
_supply: ContextVar[NameSupply | None] = ContextVar("xcrs_name_supply", default=None)


def current_supply() -> NameSupply:
    supply = _supply.get()
    return _global_supply if supply is None else supply


@contextmanager
def naming_session(names: Iterable[str] = ()) -> Iterator[NameSupply]:
    """Scope fresh-name generation to a new supply seeded with ``names``."""
    supply = NameSupply(names)
    token = _supply.set(supply)
    try:
        yield supply
    finally:
        _supply.reset(token)


class Variable:
    __slots__ = ("name", "uid")
    __match_args__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "uid", _next_uid())
        current_supply().register(name)

    def __setattr__(self, key, value):
        raise AttributeError("Variable is immutable")

    def __repr__(self):
        return f"Variable({self.name!r}#{self.uid})"


def fresh_variable(hint: str) -> Variable:
    """Create a new variable named ``hint`` or ``hint_k`` for the least free k."""
    return Variable(current_supply().fresh_name(hint))


def base_name(name: str) -> str:
    return _SUFFIX.sub("", name)


@dataclass(frozen=True, slots=True)
class Scope:
    binders: tuple[Variable, ...]
    body: Term

    def __post_init__(self):
        if len(set(self.binders)) != len(self.binders):
            raise ValueError("scope binders must be distinct")


@dataclass(frozen=True, slots=True)
class Environment:
    """Associative component of a construction.

    Keys are constructor names (``str``) or ``Variable`` instances.  A
    ``capture`` names an environment meta-variable and is only meaningful in
    rule patterns and contractions.
    """

    entries: tuple[tuple[Union[str, Variable], Term], ...] = ()
    capture: str | None = None

    def __post_init__(self):
        keys = [k for k, _ in self.entries]
        if len(set(keys)) != len(keys):
            raise ValueError("environment keys must be distinct")

    def __bool__(self):
        return bool(self.entries) or self.capture is not None

    def keys(self):
        return [k for k, _ in self.entries]

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def extended(self, key, value) -> Environment:
        rest = tuple((k, v) for k, v in self.entries if k != key)
        return Environment(rest + ((key, value),), self.capture)


EMPTY_ENV = Environment()


@dataclass(frozen=True, slots=True)
class Construction:
    name: str
    args: tuple[Scope, ...] = ()
    env: Environment = EMPTY_ENV
    _fv: frozenset | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def literal(self) -> bool:
        return bool(NUMERAL.match(self.name))

    @property
    def arity(self) -> int:
        return len(self.args)

    def arg(self, i: int) -> Term:
        return self.args[i].body


@dataclass(frozen=True, slots=True)
class MetaApp:
    name: str
    args: tuple[Term, ...] = ()
    _fv: frozenset | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if "#" not in self.name:
            raise ValueError(f"meta-variable name {self.name!r} lacks '#'")


Term = Union[Variable, Construction, MetaApp]


def C(name: str, *args, env: Environment | Mapping | None = None) -> Construction:
    """Build a construction; each argument is a Term or a Scope."""
    scopes = tuple(a if isinstance(a, Scope) else Scope((), a) for a in args)
    if env is None:
        env = EMPTY_ENV
    elif not isinstance(env, Environment):
        env = Environment(tuple(env.items()))
    return Construction(name, scopes, env)


def bind(*binders_and_body) -> Scope:
    *binders, body = binders_and_body
    return Scope(tuple(binders), body)


def M(name: str, *args: Term) -> MetaApp:
    return MetaApp(name, tuple(args))


def is_pattern_term(t: Term) -> bool:
    """True if ``t`` contains a meta-application or an environment capture."""
    if isinstance(t, Variable):
        return False
    if isinstance(t, MetaApp):
        return True
    if t.env.capture is not None:
        return True
    return any(is_pattern_term(v) for _, v in t.env.entries) or any(
        is_pattern_term(s.body) for s in t.args
    )


def free_variables(t: Term) -> frozenset[Variable]:
    if isinstance(t, Variable):
        return frozenset((t,))
    if t._fv is not None:
        return t._fv
    acc: set[Variable] = set()
    if isinstance(t, MetaApp):
        for a in t.args:
            acc |= free_variables(a)
    else:
        for k, v in t.env.entries:
            if isinstance(k, Variable):
                acc.add(k)
            acc |= free_variables(v)
        for s in t.args:
            fv = free_variables(s.body)
            acc |= fv.difference(s.binders) if s.binders else fv
    result = frozenset(acc)
    object.__setattr__(t, "_fv", result)
    return result


def free_variables_ordered(*terms: Term) -> list[Variable]:
    """Free variables in first-occurrence order (environments before arguments)."""
    seen: dict[Variable, None] = {}

    def walk(t, bound):
        if isinstance(t, Variable):
            if t not in bound:
                seen.setdefault(t)
        elif isinstance(t, MetaApp):
            for a in t.args:
                walk(a, bound)
        else:
            for k, v in t.env.entries:
                if isinstance(k, Variable) and k not in bound:
                    seen.setdefault(k)
                walk(v, bound)
            for s in t.args:
                walk(s.body, bound | set(s.binders) if s.binders else bound)

    for t in terms:
        walk(t, frozenset())
    return list(seen)


def all_variables(t: Term) -> Iterator[Variable]:
    """Every variable occurrence and binder in ``t``."""
    if isinstance(t, Variable):
        yield t
    elif isinstance(t, MetaApp):
        for a in t.args:
            yield from all_variables(a)
    else:
        for k, v in t.env.entries:
            if isinstance(k, Variable):
                yield k
            yield from all_variables(v)
        for s in t.args:
            yield from s.binders
            yield from all_variables(s.body)


def _free_equal(a: Variable, b: Variable, by_name: bool) -> bool:
    return a is b or (by_name and a.name == b.name)


def alpha_equal(a: Term, b: Term, *, free_by_name: bool = False) -> bool:
    """Equality up to consistent renaming of bound variables.

    Free variables compare by identity unless ``free_by_name`` is set, in
    which case they compare by display name (used to compare terms parsed
    from separate texts).
    """
    return _alpha(a, b, {}, {}, free_by_name)


def _alpha(a, b, ab: dict, ba: dict, by_name: bool) -> bool:
    if a is b and not ab:
        return True
    if isinstance(a, Variable):
        if not isinstance(b, Variable):
            return False
        if a in ab or b in ba:
            return ab.get(a) is b and ba.get(b) is a
        return _free_equal(a, b, by_name)
    if isinstance(a, MetaApp):
        return (
            isinstance(b, MetaApp)
            and a.name == b.name
            and len(a.args) == len(b.args)
            and all(_alpha(x, y, ab, ba, by_name) for x, y in zip(a.args, b.args))
        )
    if not isinstance(b, Construction):
        return False
    if a.name != b.name or len(a.args) != len(b.args):
        return False
    if not _env_alpha(a.env, b.env, ab, ba, by_name):
        return False
    for sa, sb in zip(a.args, b.args):
        if len(sa.binders) != len(sb.binders):
            return False
        if sa.binders:
            ab2, ba2 = dict(ab), dict(ba)
            for x, y in zip(sa.binders, sb.binders):
                ab2[x] = y
                ba2[y] = x
            if not _alpha(sa.body, sb.body, ab2, ba2, by_name):
                return False
        elif not _alpha(sa.body, sb.body, ab, ba, by_name):
            return False
    return True


def _env_alpha(ea: Environment, eb: Environment, ab, ba, by_name) -> bool:
    if ea.capture != eb.capture or len(ea.entries) != len(eb.entries):
        return False
    for ka, va in ea.entries:
        match = None
        for kb, vb in eb.entries:
            if isinstance(ka, Variable) and isinstance(kb, Variable):
                if ka in ab or kb in ba:
                    ok = ab.get(ka) is kb
                else:
                    ok = _free_equal(ka, kb, by_name)
            else:
                ok = ka == kb
            if ok:
                match = vb
                break
        if match is None or not _alpha(va, match, ab, ba, by_name):
            return False
    return True


def substitute(t: Term, bindings: Mapping[Variable, Term]) -> Term:
    """Simultaneous capture-avoiding substitution of free variables."""
    live = {k: v for k, v in bindings.items() if v is not k}
    if not live:
        return t
    return _subst(t, live)


def _subst(t, m: dict):
    if isinstance(t, Variable):
        return m.get(t, t)
    fv = free_variables(t)
    if not any(k in fv for k in m):
        return t
    if isinstance(t, MetaApp):
        return MetaApp(t.name, tuple(_subst(a, m) for a in t.args))
    env = t.env
    if env.entries:
        entries = []
        for k, v in env.entries:
            if isinstance(k, Variable) and isinstance(m.get(k), Variable):
                k = m[k]
            entries.append((k, _subst(v, m)))
        env = Environment(tuple(entries), env.capture)
    args = []
    for s in t.args:
        if not s.binders:
            args.append(Scope((), _subst(s.body, m)))
            continue
        body_fv = free_variables(s.body)
        m2 = {k: v for k, v in m.items() if k in body_fv and k not in s.binders}
        if not m2:
            args.append(s)
            continue
        captured: set[Variable] = set()
        for v in m2.values():
            captured |= free_variables(v)
        binders = []
        for b in s.binders:
            if b in captured:
                nb = fresh_variable(base_name(b.name))
                m2[b] = nb
                binders.append(nb)
            else:
                binders.append(b)
        args.append(Scope(tuple(binders), _subst(s.body, m2)))
    return Construction(t.name, tuple(args), env)


def term_size(t: Term) -> int:
    if isinstance(t, Variable):
        return 1
    if isinstance(t, MetaApp):
        return 1 + sum(term_size(a) for a in t.args)
    return (
        1
        + sum(term_size(v) for _, v in t.env.entries)
        + sum(term_size(s.body) for s in t.args)
    )


def constructor_names(t: Term) -> set[str]:
    out: set[str] = set()

    def walk(t):
        if isinstance(t, Construction):
            out.add(t.name)
            for _, v in t.env.entries:
                walk(v)
            for s in t.args:
                walk(s.body)
        elif isinstance(t, MetaApp):
            for a in t.args:
                walk(a)

    walk(t)
    return out
