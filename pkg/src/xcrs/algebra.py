"""Direct evaluator for nested-relational algebra terms.

Serves as the reference semantics the compiled dataflow code is checked
against.  A relation is an ordered list of values; a variable denotes the
singleton relation holding its current tuple.
"""

from __future__ import annotations

from .errors import ExecutionError
from .term import Construction, Term, Variable
from .values import UNIT, Bool, Element, Store, TupleV, Value, call_builtin, literal_value, tag_text


def eval_algebra(a: Term, store: Store) -> list[Value]:
    """Evaluate an ``Algebraic[Dep id . body]`` term over ``store``."""
    if not (isinstance(a, Construction) and a.name == "Algebraic" and a.arity == 1):
        raise ExecutionError("algebra term must be rooted at Algebraic")
    dep = a.arg(0)
    i, body = _dep(dep)
    return _Evaluator(store).ev(body, {i: UNIT})


def _dep(t: Term) -> tuple[Variable, Term]:
    if isinstance(t, Construction) and t.name == "Dep" and t.arity == 1 and len(t.args[0].binders) == 1:
        return t.args[0].binders[0], t.args[0].body
    raise ExecutionError("expected a Dep abstraction")


def _tuple(v: Value) -> TupleV:
    if not isinstance(v, TupleV):
        raise ExecutionError("relation member is not a tuple")
    return v


class _Evaluator:
    def __init__(self, store: Store):
        self.store = store

    def truth(self, vals: list) -> bool:
        if len(vals) != 1 or not isinstance(vals[0], Bool):
            raise ExecutionError("non-boolean condition")
        return vals[0].value

    def apply(self, dep: Term, v: Value, env: dict) -> list:
        i, body = _dep(dep)
        return self.ev(body, {**env, i: v})

    def ev(self, t: Term, env: dict) -> list:
        if isinstance(t, Variable):
            if t not in env:
                raise ExecutionError(f"unbound variable {t.name}")
            return [env[t]]
        if not isinstance(t, Construction):
            raise ExecutionError("meta-application in algebra term")
        n, args = t.name, [s.body for s in t.args]
        if n == "Map":
            return [u for v in self.ev(args[1], env) for u in self.apply(args[0], v, env)]
        if n == "Select":
            return [v for v in self.ev(args[1], env) if self.truth(self.apply(args[0], v, env))]
        if n == "MapConcat":
            return [
                _tuple(v).merge(_tuple(u))
                for v in self.ev(args[1], env)
                for u in self.apply(args[0], v, env)
            ]
        if n == "Product":
            right = self.ev(args[1], env)
            return [_tuple(x).merge(_tuple(y)) for x in self.ev(args[0], env) for y in right]
        if n == "Tuple":
            fields = []
            row = args[0]
            while isinstance(row, Construction) and row.name == "ACons":
                cell, row = row.arg(0), row.arg(1)
                if not (isinstance(cell, Construction) and cell.name == "@"
                        and isinstance(cell.arg(0), Variable)):
                    raise ExecutionError("malformed tuple field")
                fields.append((cell.arg(0), self.ev(cell.arg(1), env)))
            if not (isinstance(row, Construction) and row.name == "ANil"):
                raise ExecutionError("malformed tuple row")
            return [TupleV(fields)]
        if n == "Extract":
            (cur,) = self.ev(args[0], env)
            tag = args[1]
            if not isinstance(tag, Variable):
                raise ExecutionError("field tag must be a variable")
            return list(_tuple(cur).get(tag))
        if n == "Concat":
            return self.ev(args[0], env) + self.ev(args[1], env)
        if n == "Call":
            return call_builtin(args[0].name, self.ev(args[1], env), self.store)
        if n == "Empty":
            return []
        if n == "If":
            branch = args[1] if self.truth(self.ev(args[0], env)) else args[2]
            return self.ev(branch, env)
        if n == "Elem":
            name = self.ev(args[0], env)
            if len(name) != 1:
                raise ExecutionError("element name must be a single value")
            return [Element(tag_text(name[0]), tuple(self.ev(args[1], env)))]
        if not t.args and t.literal:
            return [literal_value(n)]
        raise ExecutionError(f"not an algebra construct: {n!r}")
