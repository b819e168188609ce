"""
Types from environments
=======================

Rule set T infers a type for an algebra term by threading an
environment through helper schemes.  Watching the trace shows each
rule as it fires.
"""

import sys

from xcrs import Environment, Normalizer, StrategyConfig, load_rules, parse_term, render_term
from xcrs.schemes import inference_goal

rules = load_rules("T")

goal = inference_goal(Environment(), parse_term("Map[Dep i . i, Empty]"))
n = Normalizer(rules, StrategyConfig(trace=True, trace_file=sys.stdout))
result = n.run(goal)
print(f"\n{render_term(result)} in {n.steps} steps\n")

# a typed variable in the environment answers directly
n = Normalizer(rules)
print(render_term(n.run(parse_term('{i:"int"}Type[i]'))), f"({n.steps} step)")
