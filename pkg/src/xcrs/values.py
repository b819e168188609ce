"""Runtime values, the toy document store, and the builtin functions.

Shared by the dataflow VM and the algebra evaluator so that both interpret
calls identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import ExecutionError
from .term import Variable


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Element:
    tag: str
    children: tuple = ()


class TupleV:
    """A record of field tag -> sequence of values.

    Field order is kept for display; equality ignores it.
    """

    __slots__ = ("fields",)

    def __init__(self, fields: Iterable[tuple[Variable, Sequence]] = ()):
        items: dict[Variable, tuple] = {}
        for tag, vals in fields:
            items[tag] = tuple(vals)
        object.__setattr__(self, "fields", tuple(items.items()))

    def __setattr__(self, key, value):
        raise AttributeError("TupleV is immutable")

    def get(self, tag: Variable) -> tuple:
        for k, v in self.fields:
            if k is tag:
                return v
        raise ExecutionError(f"tuple has no field {tag.name}")

    def merge(self, other: TupleV) -> TupleV:
        """Union of fields; ``other`` wins on collision."""
        return TupleV(self.fields + other.fields)

    def __eq__(self, other):
        return isinstance(other, TupleV) and dict(self.fields) == dict(other.fields)

    def __hash__(self):
        return hash(frozenset(self.fields))

    def __repr__(self):
        inner = ", ".join(f"{k.name}: {list(v)!r}" for k, v in self.fields)
        return f"TupleV({{{inner}}})"


Value = Union[Num, Str, Bool, Element, TupleV]
UNIT = TupleV()


def format_value(v: Value) -> str:
    if isinstance(v, Num):
        return str(v.value)
    if isinstance(v, Str):
        return v.value
    if isinstance(v, Bool):
        return "true" if v.value else "false"
    if isinstance(v, Element):
        return f"<{v.tag}>" + " ".join(format_value(c) for c in v.children) + f"</{v.tag}>"
    inner = ", ".join(
        f"{k.name}: " + " ".join(format_value(x) for x in vals) for k, vals in v.fields
    )
    return "{" + inner + "}"


def tag_text(v: Value) -> str:
    """Element tag named by a value."""
    if isinstance(v, Element):
        return v.tag
    if isinstance(v, TupleV):
        raise ExecutionError("a tuple cannot name an element")
    return format_value(v)


def literal_value(name: str) -> Value:
    """Value of a nullary literal constructor: numerals are numbers, the rest strings."""
    try:
        return Num(int(name))
    except ValueError:
        return Str(name)


@dataclass(frozen=True)
class Store:
    """Toy document store; ``doc()`` returns ``document``."""

    document: Element

    @classmethod
    def of(cls, numbers: Iterable[int], tag: str = "doc") -> Store:
        return cls(Element(tag, tuple(Num(n) for n in numbers)))

    @classmethod
    def parse(cls, text: str) -> Store:
        """One integer per non-blank line."""
        numbers = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                numbers.append(int(line))
            except ValueError:
                raise ValueError(f"store line {lineno}: not an integer: {line!r}") from None
        return cls.of(numbers)

    @classmethod
    def load(cls, path: str | Path) -> Store:
        return cls.parse(Path(path).read_text(encoding="utf-8"))


EMPTY_STORE = Store.of([])


def _pair(name: str, args: list) -> tuple[Value, Value]:
    if len(args) != 2:
        raise ExecutionError(f"{name} expects 2 arguments, got {len(args)}")
    return args[0], args[1]


def call_builtin(name: str, args: list, store: Store) -> list:
    if name == "doc":
        return [store.document]
    if name == "child":
        out = []
        for a in args:
            if not isinstance(a, Element):
                raise ExecutionError(f"child of non-element {format_value(a)}")
            out.extend(a.children)
        return out
    if name == "eq":
        a, b = _pair(name, args)
        return [Bool(a == b)]
    if name == "plus":
        a, b = _pair(name, args)
        if not (isinstance(a, Num) and isinstance(b, Num)):
            raise ExecutionError("plus expects numbers")
        return [Num(a.value + b.value)]
    if name == "and":
        if not all(isinstance(a, Bool) for a in args):
            raise ExecutionError("and expects booleans")
        return [Bool(all(a.value for a in args))]
    raise ExecutionError(f"unknown builtin {name!r}")


BUILTINS = ("doc", "child", "eq", "plus", "and")
