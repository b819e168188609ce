"""Parser for the textual term notation and for ``.crs`` rule files.

Abbreviations accepted by :func:`parse_term`:

* ``(t)`` is ``t``;
* ``c x y . t`` is ``c[x . c[y . t]]``;
* juxtaposition ``t1 t2`` is ``@[t1, t2]`` (left associative);
* inside parentheses ``t1; t2`` is ``$Cons[t1, t2]`` and an empty segment
  is ``$Nil``, so ``(a;b;)`` is ``$Cons[a, $Cons[b, $Nil]]``;
* empty brackets may be omitted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .engine import OPTION_NAMES, Rule, RuleOptions, RuleSet, validate_rule
from .errors import SourceSpan, TermSyntaxError
from .render import Renderer, _flat, constructor_text, variable_text
from .term import Construction, Environment, MetaApp, Scope, Term, Variable

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<vstr>v"(?:[^"\\]|\\.)*")
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<rulename>[A-Za-z_][A-Za-z0-9_]*@[0-9]+)
  | (?P<meta>\#[A-Za-z0-9_]*)
  | (?P<var>[a-z][A-Za-z0-9_]*)
  | (?P<con>[A-Z$][A-Za-z0-9_]*|@|[0-9]+|[^\x00-\x7f\s→][^\s\[\](){},;.:→"]*)
  | (?P<arrow>→)
  | (?P<punct>[\[\](){},;.:\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: "\n" if m.group(1) == "n" else m.group(1), body)


def tokenize(src: str, file: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            span = SourceSpan(file, line, col, line, col + 1)
            raise TermSyntaxError(f"unexpected character {src[pos]!r}", span)
        text = m.group()
        kind = m.lastgroup
        nl = text.count("\n")
        end_line = line + nl
        end_col = len(text) - text.rfind("\n") if nl else col + len(text)
        if kind != "ws":
            tokens.append(Token(kind, text, SourceSpan(file, line, col, end_line, end_col)))
        pos, line, col = m.end(), end_line, end_col
    tokens.append(Token("eof", "", SourceSpan(file, line, col, line, col)))
    return tokens


_UNIT_START = {"(", "{"}
_UNIT_KINDS = {"con", "str", "var", "vstr", "meta"}


class _Parser:
    def __init__(self, tokens: list[Token], free: dict[str, Variable] | None = None):
        self.toks = tokens
        self.pos = 0
        self.free = {} if free is None else free
        self.scopes: list[dict[str, Variable]] = []

    # token helpers

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "arrow") and t.text == text

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def fail(self, message: str):
        t = self.peek()
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise TermSyntaxError(f"{message}, found {found}", t.span)

    # names

    def variable_name(self, tok: Token) -> str:
        if tok.kind == "vstr":
            return _unescape(tok.text[2:-1])
        return tok.text

    def constructor_name(self, tok: Token) -> str:
        if tok.kind == "str":
            return _unescape(tok.text[1:-1])
        return tok.text

    def lookup(self, name: str) -> Variable:
        for frame in reversed(self.scopes):
            if name in frame:
                return frame[name]
        v = self.free.get(name)
        if v is None:
            v = self.free[name] = Variable(name)
        return v

    def starts_unit(self) -> bool:
        t = self.peek()
        return t.kind in _UNIT_KINDS or (t.kind == "punct" and t.text in _UNIT_START)

    def binder_run(self, k: int = 0) -> int:
        """Number of variable tokens at offset ``k`` if they are followed by '.'."""
        n = 0
        while self.peek(k + n).kind in ("var", "vstr"):
            n += 1
        t = self.peek(k + n)
        return n if n and t.kind == "punct" and t.text == "." else 0

    # grammar

    def term(self) -> Term:
        if not self.starts_unit():
            self.fail("expected a term")
        t = self.unit()
        while self.starts_unit():
            t = Construction("@", (Scope((), t), Scope((), self.unit())))
        return t

    def unit(self) -> Term:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "(":
            self.next()
            t = self.paren_body()
            self.expect(")")
            return t
        if tok.kind == "punct" and tok.text == "{":
            env = self.environment()
            if self.peek().kind not in ("con", "str"):
                self.fail("expected a constructor after environment")
            return self.construction(env)
        if tok.kind in ("var", "vstr"):
            self.next()
            return self.lookup(self.variable_name(tok))
        if tok.kind == "meta":
            self.next()
            args: tuple[Term, ...] = ()
            if self.at("["):
                self.next()
                items = []
                if not self.at("]"):
                    items.append(self.term())
                    while self.at(","):
                        self.next()
                        items.append(self.term())
                self.expect("]")
                args = tuple(items)
            return MetaApp(tok.text, args)
        return self.construction(Environment())

    def paren_body(self) -> Term:
        if self.at(")"):
            return Construction("$Nil")
        head = self.term()
        if not self.at(";"):
            return head
        self.next()
        if self.at(")"):
            tail: Term = Construction("$Nil")
        else:
            tail = self.paren_body()
        return Construction("$Cons", (Scope((), head), Scope((), tail)))

    def construction(self, env: Environment) -> Term:
        tok = self.next()
        name = self.constructor_name(tok)
        if self.at("["):
            self.next()
            args = []
            if not self.at("]"):
                args.append(self.scope())
                while self.at(","):
                    self.next()
                    args.append(self.scope())
            self.expect("]")
            return Construction(name, tuple(args), env)
        n = self.binder_run()
        if n:
            # c x y . t  ==  c[x . c[y . t]]
            binders = [self.declare_binders(1) for _ in range(n)]
            self.expect(".")
            body = self.term()
            for _ in binders:
                self.scopes.pop()
            for b in reversed(binders):
                body = Construction(name, (Scope(b, body),))
            return Construction(body.name, body.args, env)
        return Construction(name, (), env)

    def declare_binders(self, n: int) -> tuple[Variable, ...]:
        frame: dict[str, Variable] = {}
        for _ in range(n):
            tok = self.next()
            name = self.variable_name(tok)
            if name in frame:
                raise TermSyntaxError(f"binder {name!r} reused within one scope", tok.span)
            frame[name] = Variable(name)
        self.scopes.append(frame)
        return tuple(frame.values())

    def scope(self) -> Scope:
        n = self.binder_run()
        if not n:
            return Scope((), self.term())
        binders = self.declare_binders(n)
        self.expect(".")
        body = self.term()
        self.scopes.pop()
        return Scope(binders, body)

    def environment(self) -> Environment:
        self.expect("{")
        capture = None
        entries: list[tuple] = []
        if self.peek().kind == "meta":
            capture = self.next().text
            if not self.at("}"):
                self.expect(";")
        while not self.at("}"):
            tok = self.next()
            if tok.kind in ("var", "vstr"):
                key = self.lookup(self.variable_name(tok))
            elif tok.kind in ("con", "str"):
                key = self.constructor_name(tok)
            else:
                self.pos -= 1
                self.fail("expected an environment key")
            self.expect(":")
            if any(k == key for k, _ in entries):
                raise TermSyntaxError("duplicate environment key", tok.span)
            entries.append((key, self.term()))
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        return Environment(tuple(entries), capture)


def parse_term(src: str, *, file: str = "<term>", free: dict[str, Variable] | None = None) -> Term:
    """Parse one term.  Free variables with equal names share one Variable."""
    p = _Parser(tokenize(src, file), free)
    t = p.term()
    if p.peek().kind != "eof":
        p.fail("unexpected trailing input")
    return t


# rule files


@dataclass(frozen=True)
class RuleFile:
    rules: tuple[Rule, ...]
    file: str = "<rules>"

    def rule_set(self) -> RuleSet:
        return RuleSet(self.rules)


def _options_from(header: Term, span: SourceSpan) -> tuple[str | None, RuleOptions]:
    if isinstance(header, Variable):
        return header.name, RuleOptions()
    if not isinstance(header, Construction) or header.env:
        raise TermSyntaxError("malformed rule header", span)
    groups: dict[str, set[str]] = {k: set() for k in OPTION_NAMES}
    for s in header.args:
        opt = s.body
        if not isinstance(opt, Construction) or opt.name not in OPTION_NAMES or s.binders:
            raise TermSyntaxError(f"unknown rule option {_describe(opt)}", span)
        for a in opt.args:
            item = a.body
            if isinstance(item, Variable):
                groups[opt.name].add(item.name)
            elif isinstance(item, MetaApp) and not item.args:
                groups[opt.name].add(item.name)
            else:
                raise TermSyntaxError(f"bad argument to option {opt.name}", span)
    return header.name, RuleOptions.from_groups(groups)


def _describe(t) -> str:
    return t.name if isinstance(t, (Construction, MetaApp, Variable)) else repr(t)


def _parse_rule(p: _Parser, index: int) -> Rule:
    start = p.peek().span
    name: str | None = None
    options = RuleOptions()
    if p.at("-") or p.peek().kind == "rulename":
        tok = p.next()
        name = None if tok.text == "-" else tok.text
        if p.at("["):
            p.next()
            args = []
            while not p.at("]"):
                args.append(p.scope())
                if not p.at("]"):
                    p.expect(",")
            p.next()
            options = _options_from(Construction("-", tuple(args)), start)[1]
        p.expect(":")
        p.free.clear()
        first = p.term()
    else:
        first = p.term()
        if p.at(":"):
            p.next()
            name, options = _options_from(first, start)
            p.free.clear()
            first = p.term()
    p.expect("→")
    contraction = p.term()
    return Rule(name or f"rule@{index}", first, contraction, options)


def parse_rule_file(src: str, *, file: str = "<rules>", validate: bool = True) -> RuleFile:
    """Parse ``;``-separated rules ``name[options] : pattern → contraction``."""
    tokens = tokenize(src, file)
    pos = 0
    rules: list[Rule] = []
    names: set[str] = set()
    while True:
        p = _Parser(tokens)
        p.pos = pos
        while p.at(";"):
            p.next()
        if p.peek().kind == "eof":
            break
        start = p.peek().span
        rule = _parse_rule(p, len(rules) + 1)
        if not (p.at(";") or p.peek().kind == "eof"):
            p.fail("expected ';' after rule")
        if rule.name in names:
            raise TermSyntaxError(f"duplicate rule name {rule.name!r}", start)
        names.add(rule.name)
        if validate:
            validate_rule(rule)
        rules.append(rule)
        pos = p.pos
    return RuleFile(tuple(rules), file)


def parse_rule(src: str, *, validate: bool = True) -> Rule:
    rf = parse_rule_file(src, validate=validate)
    if len(rf.rules) != 1:
        raise TermSyntaxError(f"expected exactly one rule, found {len(rf.rules)}")
    return rf.rules[0]


def render_options(opts: RuleOptions) -> str:
    items = []
    for group in OPTION_NAMES:
        names = sorted(getattr(opts, group.lower()))
        if names:
            shown = [n if n.startswith("#") else variable_text(n) for n in names]
            items.append(f"{group}[{', '.join(shown)}]")
    return ", ".join(items)


def render_rule(rule: Rule) -> str:
    r = Renderer(rule.pattern, rule.contraction)
    pattern = _flat(r.doc(rule.pattern))
    contraction = _flat(r.doc(rule.contraction))
    opts = render_options(rule.options)
    name = rule.name if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*(@[0-9]+)?", rule.name) else "-"
    header = f"{name}[{opts}]" if opts else name
    return f"{header} : {pattern} → {contraction} ;"


__all__ = [
    "RuleFile",
    "Token",
    "constructor_text",
    "parse_rule",
    "parse_rule_file",
    "parse_term",
    "render_rule",
    "tokenize",
]
