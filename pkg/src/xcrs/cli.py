"""Command-line front end: ``xcrs <command> FILE [options]``.

Exit status is 0 on success, 1 for bad input (syntax, validation, missing
files, usage) and 2 when rewriting gets stuck or hits the step limit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataflow import run_target
from .engine import RuleSet, StrategyConfig, normalize
from .errors import InferenceError, StepLimitExceeded, StuckError, XcrsError
from .render import render_term
from .schemes import (
    RULE_SET_NAMES,
    emit_code,
    load_rules,
    normalize_query,
    optimize_algebra,
)
from .syntax import parse_rule_file, parse_term, render_rule
from .values import Store, format_value
from .xfront import parse_x

EXIT_OK, EXIT_INPUT, EXIT_STUCK = 0, 1, 2

COMMANDS = {
    "parse": "X source to AST term",
    "normalize": "X source to algebra",
    "optimize": "algebra term to optimized algebra",
    "emit": "algebra term to dataflow code",
    "compile": "X source to dataflow code",
    "run": "run an X program or a TMain term over a store",
    "rewrite": "normalize a term under the given --rules files",
    "check": "validate a .crs rule file",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xcrs", description="Higher-order rewriting workbench and X compiler.")
    p.add_argument("command", choices=list(COMMANDS), metavar="command",
                   help="; ".join(f"{k}: {v}" for k, v in COMMANDS.items()))
    p.add_argument("input", help="input file, or - for standard input")
    p.add_argument("--rules", action="append", default=[], metavar="FILE",
                   help="rule file for rewrite (repeatable); N, R, E or T name a shipped set")
    p.add_argument("--max-steps", type=int, default=None, metavar="N")
    p.add_argument("--trace", action="store_true", help="print each rewrite step to stderr")
    p.add_argument("--no-fuse", action="store_true", help="disable the select-fusion rule")
    p.add_argument("--store", metavar="FILE", help="store file for run: one integer per line")
    p.add_argument("--format", choices=("canonical", "compact"), default="canonical")
    return p


def read_input(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    return Path(path).read_text(encoding="utf-8"), path


def _rules_from(specs: list[str]) -> RuleSet:
    if not specs:
        raise UsageError("rewrite needs at least one --rules file")
    rules = RuleSet()
    for spec in specs:
        if spec in RULE_SET_NAMES and not Path(spec).exists():
            rules = rules + load_rules(spec)
        else:
            rules = rules + parse_rule_file(Path(spec).read_text(encoding="utf-8"), file=spec).rule_set()
    return rules


def _looks_like_target(text: str, name: str) -> bool:
    if name.endswith(".term"):
        return True
    lines = (ln.strip() for ln in text.splitlines())
    first = next((ln for ln in lines if ln and not ln.startswith("//")), "")
    return first.startswith("TMain")


def execute(args: argparse.Namespace, out) -> None:
    config = StrategyConfig(max_steps=args.max_steps, trace=args.trace)
    width = None if args.format == "compact" else 100
    text, name = read_input(args.input)

    def emit(t):
        print(render_term(t, width=width), file=out)

    cmd = args.command
    if cmd == "parse":
        emit(parse_x(text, name))
    elif cmd == "normalize":
        emit(normalize_query(parse_x(text, name), config))
    elif cmd == "optimize":
        emit(optimize_algebra(parse_term(text, file=name), config, fuse=not args.no_fuse))
    elif cmd == "emit":
        emit(emit_code(parse_term(text, file=name), config))
    elif cmd == "compile":
        algebra = normalize_query(parse_x(text, name), config)
        emit(emit_code(optimize_algebra(algebra, config, fuse=not args.no_fuse), config))
    elif cmd == "run":
        if not args.store:
            raise UsageError("run requires --store")
        store = Store.load(args.store)
        if _looks_like_target(text, name):
            prog = parse_term(text, file=name)
        else:
            algebra = normalize_query(parse_x(text, name), config)
            prog = emit_code(optimize_algebra(algebra, config, fuse=not args.no_fuse), config)
        for v in run_target(prog, store):
            print(format_value(v), file=out)
    elif cmd == "rewrite":
        emit(normalize(_rules_from(args.rules), parse_term(text, file=name), config))
    elif cmd == "check":
        for rule in parse_rule_file(text, file=name).rules:
            print(render_rule(rule), file=out)


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        execute(args, out)
    except (StepLimitExceeded, StuckError, InferenceError) as e:
        print(f"xcrs: {e.stage}: {e}", file=sys.stderr)
        if getattr(e, "term", None) is not None:
            print(render_term(e.term), file=sys.stderr)
        return EXIT_STUCK
    except XcrsError as e:
        print(f"xcrs: {e.stage}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as e:
        print(f"xcrs: usage: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as e:
        print(f"xcrs: input: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
