"""Interpreter for the T* dataflow target language.

Handlers are buffers that collect values; cursors are bound to one value at
a time.  ``TPipe[h . P, c . C]`` runs P with h bound to a new buffer, then
runs C once per buffered value.  Constructs that produce a value without
naming a handler (``TMakeElement`` and the two-argument ``TCall``) send it to
the handler of the innermost enclosing pipe producer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ExecutionError
from .term import Construction, Term, Variable
from .values import UNIT, Bool, Element, Num, Store, Str, TupleV, Value, call_builtin, literal_value, tag_text


@dataclass
class _Input:
    """The stream bound to TMain's input channel."""

    values: list = field(default_factory=list)


def run_target(prog: Term, store: Store) -> list[Value]:
    """Run a ``TMain[in out . body]`` program; returns what reaches ``out``."""
    if not (isinstance(prog, Construction) and prog.name == "TMain" and prog.arity == 1
            and len(prog.args[0].binders) == 2):
        raise ExecutionError("target program must be rooted at TMain[in out . body]")
    (inp, out), body = prog.args[0].binders, prog.args[0].body
    sink: list = []
    _Machine(store).run(body, {inp: _Input([UNIT]), out: sink}, sink)
    return sink


def _unary(s) -> tuple[Variable, Term]:
    if len(s.binders) != 1:
        raise ExecutionError("expected a single binder")
    return s.binders[0], s.body


class _Machine:
    def __init__(self, store: Store):
        self.store = store

    def lookup(self, v: Term, env: dict):
        if not isinstance(v, Variable):
            raise ExecutionError("handler or cursor position holds a non-variable")
        if v not in env:
            raise ExecutionError(f"unbound handler or cursor {v.name}")
        return env[v]

    def handler(self, v: Term, env: dict) -> list:
        h = self.lookup(v, env)
        if not isinstance(h, list):
            raise ExecutionError(f"{v.name} is not a handler")
        return h

    def cursor(self, v: Term, env: dict):
        c = self.lookup(v, env)
        if isinstance(c, list):
            raise ExecutionError(f"{v.name} is a handler, not a cursor")
        return c

    def collect(self, s, env: dict) -> list:
        """Run a ``h . code`` scope with h bound to a new buffer."""
        h, body = _unary(s)
        buf: list = []
        self.run(body, {**env, h: buf}, buf)
        return buf

    def single(self, s, env: dict, what: str) -> Value:
        vals = self.collect(s, env)
        if len(vals) != 1:
            raise ExecutionError(f"{what} produced {len(vals)} values, expected one")
        return vals[0]

    def run(self, t: Term, env: dict, current: list) -> None:
        if not isinstance(t, Construction):
            raise ExecutionError("target code must be a construction")
        n, a = t.name, t.args
        if n == "TPipe":
            buf = self.collect(a[0], env)
            c, consumer = _unary(a[1])
            for v in buf:
                self.run(consumer, {**env, c: v}, current)
        elif n == "TCopy":
            src = self.cursor(a[0].body, env)
            dest = self.handler(a[1].body, env)
            dest.extend(src.values if isinstance(src, _Input) else [src])
        elif n == "TSeq":
            self.run(a[0].body, env, current)
            self.run(a[1].body, env, current)
        elif n in ("TNoop", "TEmpty"):
            pass
        elif n == "TLiteral":
            self.handler(a[1].body, env).append(literal_value(a[0].body.name))
        elif n == "TCall":
            args = self.collect(a[1], env)
            dest = self.handler(a[2].body, env) if len(a) == 3 else current
            dest.extend(call_builtin(a[0].body.name, args, self.store))
        elif n == "TMakeTuple":
            self.handler(a[2].body, env).append(self.make_tuple(a[0].body, a[1], env))
        elif n == "TPick":
            tup = self.cursor(a[0].body, env)
            tag = a[1].body
            if not isinstance(tup, TupleV) or not isinstance(tag, Variable):
                raise ExecutionError("TPick needs a tuple cursor and a field tag")
            self.handler(a[2].body, env).extend(tup.get(tag))
        elif n == "TMerge":
            left, right = self.cursor(a[0].body, env), self.cursor(a[1].body, env)
            if not (isinstance(left, TupleV) and isinstance(right, TupleV)):
                raise ExecutionError("TMerge needs tuple cursors")
            self.handler(a[2].body, env).append(left.merge(right))
        elif n == "TSwitch":
            v = self.single(a[0], env, "switch scrutinee")
            self.switch(v, a[1].body, env, current)
        elif n == "TMakeElement":
            tag = tag_text(self.single(a[0], env, "element name"))
            current.append(Element(tag, tuple(self.collect(a[1], env))))
        else:
            raise ExecutionError(f"unknown target construct {n!r}")

    def make_tuple(self, desc: Term, values, env: dict) -> TupleV:
        # the value code has one TSeq member per descriptor field
        vh, code = _unary(values)
        fields = []
        while isinstance(desc, Construction) and desc.name == "TDCons":
            if not (isinstance(code, Construction) and code.name == "TSeq"):
                raise ExecutionError("tuple value code does not match its descriptor")
            buf: list = []
            self.run(code.arg(0), {**env, vh: buf}, buf)
            fields.append((desc.arg(0), buf))
            desc, code = desc.arg(1), code.arg(1)
        if not (isinstance(desc, Construction) and desc.name == "TDNil"):
            raise ExecutionError("malformed tuple descriptor")
        self.run(code, {**env, vh: []}, [])
        return TupleV(fields)

    def switch(self, v: Value, cases: Term, env: dict, current: list) -> None:
        while isinstance(cases, Construction) and cases.name == "TCase":
            if _case_matches(cases.arg(0), v):
                self.run(cases.arg(1), env, current)
                return
            cases = cases.arg(2)
        if isinstance(cases, Construction) and cases.name == "TOtherwise":
            self.run(cases.arg(0), env, current)
            return
        raise ExecutionError("malformed switch cases")


def _case_matches(tag: Term, v: Value) -> bool:
    if not isinstance(tag, Construction) or tag.args:
        raise ExecutionError("case tag must be a nullary constructor")
    if tag.name == "True":
        return v == Bool(True)
    if tag.name == "False":
        return v == Bool(False)
    if isinstance(v, Element):
        return v.tag == tag.name
    lit = literal_value(tag.name)
    return isinstance(v, (Num, Str)) and v == lit
