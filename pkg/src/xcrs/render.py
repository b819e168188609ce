"""Canonical text rendering of terms.

The output re-parses (``xcrs.syntax.parse_term``) to an alpha-equal term.
Display names are kept where they are unambiguous; a bound variable whose
name would clash with a free variable or an enclosing binder is printed with
a ``_k`` suffix instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .term import (
    Construction,
    Environment,
    MetaApp,
    Term,
    Variable,
    free_variables_ordered,
)

BARE_VARIABLE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
BARE_CONSTRUCTOR = re.compile(r"[A-Z$][A-Za-z0-9_]*\Z")
DEFAULT_WIDTH = 100


def quote(text: str) -> str:
    body = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{body}"'


def variable_text(name: str) -> str:
    return name if BARE_VARIABLE.match(name) else "v" + quote(name)


def constructor_text(name: str) -> str:
    return name if BARE_CONSTRUCTOR.match(name) else quote(name)


@dataclass
class _Block:
    head: str
    parts: list = field(default_factory=list)
    tail: str = ""
    sep: str = ", "
    gap: str = ""


def _flat(d) -> str:
    if isinstance(d, str):
        return d
    return d.head + d.gap + d.sep.join(_flat(p) for p in d.parts) + d.tail


def _layout(d, indent: int, width: int) -> str:
    flat = _flat(d)
    if isinstance(d, str) or not d.parts or indent + len(flat) <= width:
        return flat
    pad = "\n" + " " * (indent + 1)
    lines = [_layout(p, indent + 1, width) for p in d.parts]
    return d.head.rstrip() + pad + (d.sep.rstrip() + pad).join(lines) + d.tail


class Renderer:
    """Assigns display names and builds layout blocks for terms."""

    def __init__(self, *roots: Term):
        self.names: dict[Variable, str] = {}
        self.free_names: set[str] = set()
        for v in free_variables_ordered(*roots):
            name = self._unique(v.name, self.free_names)
            self.names[v] = name
            self.free_names.add(name)

    @staticmethod
    def _unique(name: str, taken) -> str:
        if name not in taken:
            return name
        k = 1
        while f"{name}_{k}" in taken:
            k += 1
        return f"{name}_{k}"

    def _bind(self, binders, in_scope: frozenset) -> frozenset:
        taken = set(self.free_names) | in_scope
        for b in binders:
            name = self._unique(b.name, taken)
            self.names[b] = name
            taken.add(name)
            in_scope = in_scope | {name}
        return in_scope

    def var(self, v: Variable) -> str:
        return variable_text(self.names.get(v, v.name))

    def key(self, k) -> str:
        return self.var(k) if isinstance(k, Variable) else constructor_text(k)

    def env(self, env: Environment, in_scope) -> str:
        items = [env.capture] if env.capture else []
        items += [f"{self.key(k)}:{_flat(self.doc(v, in_scope))}" for k, v in env.entries]
        return "{" + ";".join(items) + "}"

    def doc(self, t: Term, in_scope: frozenset = frozenset()):
        if isinstance(t, Variable):
            return self.var(t)
        if isinstance(t, MetaApp):
            if not t.args:
                return t.name
            return _Block(t.name + "[", [self.doc(a, in_scope) for a in t.args], "]")
        prefix = self.env(t.env, in_scope) if t.env else ""
        if not prefix:
            sugar = self._sugar(t, in_scope)
            if sugar is not None:
                return sugar
        head = prefix + constructor_text(t.name)
        if not t.args:
            return head
        parts = []
        for s in t.args:
            if s.binders:
                inner = self._bind(s.binders, in_scope)
                binders = " ".join(self.var(b) for b in s.binders)
                parts.append(_Block(binders + " .", [self.doc(s.body, inner)], gap=" "))
            else:
                parts.append(self.doc(s.body, in_scope))
        return _Block(head + "[", parts, "]")

    def _sugar(self, t: Construction, in_scope):
        if t.name == "@" and len(t.args) == 2 and not any(s.binders for s in t.args):
            items = []
            head = t
            while (
                isinstance(head, Construction)
                and head.name == "@"
                and len(head.args) == 2
                and not head.env
                and not any(s.binders for s in head.args)
            ):
                items.append(head.args[1].body)
                head = head.args[0].body
            items.append(head)
            items.reverse()
            return _Block("(", [self.doc(x, in_scope) for x in items], ")", sep=" ")
        if t.name == "$Cons" and len(t.args) == 2 and not any(s.binders for s in t.args):
            items = []
            cur = t
            while (
                isinstance(cur, Construction)
                and cur.name == "$Cons"
                and len(cur.args) == 2
                and not cur.env
                and not any(s.binders for s in cur.args)
            ):
                items.append(self.doc(cur.args[0].body, in_scope))
                cur = cur.args[1].body
            if isinstance(cur, Construction) and cur.name == "$Nil" and not cur.args and not cur.env:
                return _Block("(", items, ";)", sep=";")
            items.append(self.doc(cur, in_scope))
            return _Block("(", items, ")", sep=";")
        if len(t.args) == 1 and len(t.args[0].binders) == 1:
            binders = []
            cur = t
            while (
                isinstance(cur, Construction)
                and cur.name == t.name
                and not cur.env
                and len(cur.args) == 1
                and len(cur.args[0].binders) == 1
            ):
                b = cur.args[0].binders[0]
                in_scope = self._bind((b,), in_scope)
                binders.append(self.var(b))
                cur = cur.args[0].body
            head = "(" + constructor_text(t.name) + " " + " ".join(binders) + " ."
            return _Block(head, [self.doc(cur, in_scope)], ")", gap=" ")
        return None


def render_term(t: Term, *, width: int | None = DEFAULT_WIDTH) -> str:
    """Render ``t``; ``width=None`` gives a single line."""
    d = Renderer(t).doc(t)
    return _flat(d) if width is None else _layout(d, 0, width)


def render_pair(a: Term, b: Term, *, width: int | None = None) -> tuple[str, str]:
    """Render two terms with one shared naming (free variables agree)."""
    r = Renderer(a, b)
    da, db = r.doc(a), r.doc(b)
    if width is None:
        return _flat(da), _flat(db)
    return _layout(da, 0, width), _layout(db, 0, width)
