"""Lexer and recursive-descent parser for X, producing higher-order AST terms.

Grammar (one token of lookahead)::

    P ::= E                                   "program"[E]
    E ::= S ("," E)?                          ","[S, E]  or just S
    S ::= Q                                   "query"[Q]
        | F
    Q ::= "for" VAR "in" S Q                  "for"[S, v . Q]
        | "let" VAR ":=" S Q                  "let"[S, v . Q]
        | "where" S Q                         "where"[S, Q]
        | "return" S                          "return"[S]
    F ::= VAR | NUM                           variable / numeral tag
        | IDENT "(" E? ")"                    "call"[name, E or "empty"]
        | "if" "(" E ")" "then" S "else" S    "if"[E, S, S]
        | "element" F "{" E? "}"              "element"[F, E or "empty"]
        | "(" E ")"

``for`` and ``let`` variables are real binders scoped over the continuation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import SourceSpan, XSyntaxError
from .term import Construction, Scope, Term, Variable

KEYWORDS = frozenset({"for", "let", "in", "where", "return", "if", "then", "else", "element"})
AST_CONSTRUCTORS = frozenset(
    {"program", "query", "for", "let", "where", "return", ",", "call", "empty", "if", "element"}
)

_X_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<VAR>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<NUM>[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>:=|[(),{}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class XToken:
    kind: str  # VAR, NUM, IDENT, KEYWORD, PUNCT or EOF
    text: str
    span: SourceSpan


def lex(src: str, file: str = "<x>") -> list[XToken]:
    tokens: list[XToken] = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _X_TOKEN.match(src, pos)
        if m is None:
            raise XSyntaxError(
                f"unexpected character {src[pos]!r}", SourceSpan(file, line, col, line, col + 1)
            )
        text, kind = m.group(), m.lastgroup
        nl = text.count("\n")
        end_line = line + nl
        end_col = len(text) - text.rfind("\n") if nl else col + len(text)
        if kind != "ws":
            if kind == "word":
                kind = "KEYWORD" if text in KEYWORDS else "IDENT"
            tokens.append(XToken(kind, text, SourceSpan(file, line, col, end_line, end_col)))
        pos, line, col = m.end(), end_line, end_col
    tokens.append(XToken("EOF", "", SourceSpan(file, line, col, line, col)))
    return tokens


def _c(name: str, *args) -> Construction:
    return Construction(name, tuple(a if isinstance(a, Scope) else Scope((), a) for a in args))


class _XParser:
    def __init__(self, tokens: list[XToken]):
        self.toks = tokens
        self.pos = 0
        self.scope: list[tuple[str, Variable]] = []

    def peek(self) -> XToken:
        return self.toks[self.pos]

    def next(self) -> XToken:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def is_(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("KEYWORD", "PUNCT") and t.text == text

    def expect(self, text: str) -> XToken:
        if not self.is_(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def fail(self, message: str):
        t = self.peek()
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise XSyntaxError(f"{message}, found {found}", t.span)

    def program(self) -> Term:
        e = self.expr()
        if self.peek().kind != "EOF":
            self.fail("expected end of input")
        return _c("program", e)

    def expr(self) -> Term:
        s = self.single()
        if self.is_(","):
            self.next()
            return _c(",", s, self.expr())
        return s

    def single(self) -> Term:
        if self.peek().kind == "KEYWORD" and self.peek().text in ("for", "let", "where", "return"):
            return _c("query", self.query())
        return self.factor()

    def binder(self) -> tuple[XToken, Variable]:
        tok = self.peek()
        if tok.kind != "VAR":
            self.fail("expected a $variable")
        self.next()
        return tok, Variable(tok.text)

    def query(self) -> Term:
        tok = self.peek()
        if self.is_("for") or self.is_("let"):
            self.next()
            _, v = self.binder()
            self.expect("in" if tok.text == "for" else ":=")
            src = self.single()
            self.scope.append((v.name, v))
            body = self.query()
            self.scope.pop()
            return _c(tok.text, src, Scope((v,), body))
        if self.is_("where"):
            self.next()
            cond = self.single()
            return _c("where", cond, self.query())
        if self.is_("return"):
            self.next()
            return _c("return", self.single())
        self.fail("expected for, let, where or return")

    def factor(self) -> Term:
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            for name, v in reversed(self.scope):
                if name == tok.text:
                    return v
            raise XSyntaxError(f"unbound variable {tok.text}", tok.span)
        if tok.kind == "NUM":
            self.next()
            return Construction(tok.text)
        if tok.kind == "IDENT":
            self.next()
            self.expect("(")
            args = _c("empty") if self.is_(")") else self.expr()
            self.expect(")")
            return _c("call", Construction(tok.text), args)
        if self.is_("if"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect("then")
            then = self.single()
            self.expect("else")
            return _c("if", cond, then, self.single())
        if self.is_("element"):
            self.next()
            name = self.factor()
            self.expect("{")
            content = _c("empty") if self.is_("}") else self.expr()
            self.expect("}")
            return _c("element", name, content)
        if self.is_("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected an expression")


def parse_program(tokens: list[XToken]) -> Term:
    ast = _XParser(tokens).program()
    validate_ast(ast)
    return ast


def parse_x(src: str, file: str = "<x>") -> Term:
    return parse_program(lex(src, file))


def validate_ast(ast: Term) -> None:
    """Check the AST shape invariants; raise ``ValueError`` on violation."""

    def walk(t: Term, bound: tuple, top: bool, head: bool):
        if isinstance(t, Variable):
            if t not in bound:
                raise ValueError(f"variable {t.name} is not bound by for/let")
            return
        if not isinstance(t, Construction):
            raise ValueError("meta-application in AST")
        n = t.name
        shapes = {"program": 1, "query": 1, "for": 2, "let": 2, "where": 2, "return": 1,
                  ",": 2, "call": 2, "if": 3, "element": 2, "empty": 0}
        if n == "program" and not top:
            raise ValueError("nested program")
        if n in shapes:
            if len(t.args) != shapes[n]:
                raise ValueError(f"{n} has {len(t.args)} children")
        elif not (t.literal or head) or t.args:
            raise ValueError(f"unexpected constructor {n!r}")
        for i, s in enumerate(t.args):
            if n in ("for", "let"):
                if len(s.binders) != (1 if i == 1 else 0):
                    raise ValueError(f"{n} binder shape")
            elif s.binders:
                raise ValueError(f"unexpected binder under {n}")
            walk(s.body, bound + s.binders, False, n == "call" and i == 0)

    if not (isinstance(ast, Construction) and ast.name == "program"):
        raise ValueError("AST root must be program")
    walk(ast, (), True, False)
