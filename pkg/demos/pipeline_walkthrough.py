"""
Compiling a query step by step
==============================

A join of the document's children with themselves, taken through each
stage of the compiler and then run on a three-element store.
"""

from xcrs import (
    Store,
    emit_code,
    eval_algebra,
    normalize_query,
    optimize_algebra,
    parse_x,
    render_term,
    run_target,
)
from xcrs.values import format_value

src = "for $x in child(doc()) for $y in child(doc()) where eq($x,$y) return plus($x,$y)"

# the parser binds $x and $y as real binders in the AST term
ast = parse_x(src)
print(render_term(ast), end="\n\n")

# normalization turns the FLWOR chain into nested relational algebra;
# $x and $y survive as free field tags
algebra = normalize_query(ast)
print(render_term(algebra), end="\n\n")

# both generators are independent of the context tuple, so the
# dependent joins become products
optimized = optimize_algebra(algebra)
print(render_term(optimized), end="\n\n")

# and the products become cached dataflow pipelines
code = emit_code(optimized)
print(render_term(code), end="\n\n")

store = Store.of([1, 2, 3])
print("algebra:", [format_value(v) for v in eval_algebra(optimized, store)])
print("target: ", [format_value(v) for v in run_target(code, store)])
