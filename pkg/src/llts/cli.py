"""Command-line front end.

Exit codes: 0 holds/pass, 1 refuted/fail/inconsistent, 2 input or limit
errors.  ``LLTS_MAX_STATES`` overrides the default state bound.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import properties, refinement, semantics, syntax
from .semantics import BuildLimits, StateBoundExceeded, UnfoldDepthExceeded
from .syntax import ParseError
from .terms import GuardednessError, UnboundRecVar


def _default_max_states() -> int:
    env = os.environ.get("LLTS_MAX_STATES")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"error: LLTS_MAX_STATES is not an integer: {env!r}")
    return semantics.DEFAULT_MAX_STATES


def _limits(args) -> BuildLimits:
    return BuildLimits(
        max_states=args.max_states, max_unfold_depth=args.max_unfold_depth
    )


def _add_limit_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-states", type=int, default=_default_max_states())
    sub.add_argument(
        "--max-unfold-depth", type=int, default=semantics.DEFAULT_MAX_UNFOLD_DEPTH
    )


def expand_source(text: str) -> str:
    """Strip ``#`` comments and expand ``let NAME = TERM`` definitions in the
    remaining term, textually and in order."""
    lets: list[tuple[str, str]] = []
    term_lines: list[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("let "):
            head, _, rhs = stripped[4:].partition("=")
            name = head.strip()
            if not name or not rhs.strip():
                raise ParseError(
                    syntax.SourceSpan(0, 0), f"malformed let definition: {stripped!r}"
                )
            lets.append((name, _expand(rhs.strip(), lets)))
        else:
            term_lines.append(stripped)
    return _expand(" ".join(term_lines), lets)


def _expand(text: str, lets: list[tuple[str, str]]) -> str:
    out = []
    i, n = 0, len(text)
    table = dict(lets)
    while i < n:
        c = text[i]
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            out.append(f"({table[word]})" if word in table else word)
            i = j
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="llts",
        description="Workbench for process terms over logic labelled transition systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse a file (or - for stdin) and print the canonical form")
    p_parse.add_argument("file")

    p_lts = sub.add_parser("lts", help="build and export the transition graph of a term")
    p_lts.add_argument("term")
    p_lts.add_argument("--format", choices=("text", "json", "dot"), default="text")
    _add_limit_args(p_lts)

    p_check = sub.add_parser("check", help="report whether a term is consistent")
    p_check.add_argument("term")
    _add_limit_args(p_check)

    p_refine = sub.add_parser("refine", help="decide whether the second term refines the first")
    p_refine.add_argument("p")
    p_refine.add_argument("q")
    p_refine.add_argument("--format", choices=("text", "json"), default="text")
    _add_limit_args(p_refine)

    p_equiv = sub.add_parser("equiv", help="decide mutual refinement")
    p_equiv.add_argument("p")
    p_equiv.add_argument("q")
    _add_limit_args(p_equiv)

    p_validate = sub.add_parser("validate", help="run the model validators on a term's graph")
    p_validate.add_argument("term")
    _add_limit_args(p_validate)

    p_props = sub.add_parser("props", help="run the theorem checks on generated terms")
    p_props.add_argument("--seed", type=int, default=0)
    p_props.add_argument("--trials", type=int, default=None)
    p_props.add_argument("--only", choices=sorted(properties.ALL_CHECKS), default=None)
    p_props.add_argument("--format", choices=("text", "json"), default="text")
    p_props.add_argument(
        "--baseline", default=None, help="run a pinned-seed baseline file instead"
    )

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (GuardednessError, UnboundRecVar, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except StateBoundExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except UnfoldDepthExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "parse":
        text = expand_source(_read_source(args.file))
        term = syntax.parse(text)
        print(syntax.print_term(term))
        return 0

    if args.command == "lts":
        term = syntax.parse(args.term)
        lts = semantics.build_lts(term, _limits(args))
        if args.format == "json":
            print(semantics.lts_to_json(lts))
        elif args.format == "dot":
            print(semantics.lts_to_dot(lts))
        else:
            ids = lts.state_ids()
            print(f"states: {len(ids)} (universe {len(lts.terms)})")
            for i in ids:
                flags = []
                if i == lts.root:
                    flags.append("root")
                if lts.stable[i]:
                    flags.append("stable")
                if lts.inconsistent[i]:
                    flags.append("inconsistent")
                print(f"  [{i}] {lts.terms[i]} ({', '.join(flags) or '-'})")
                for a, j in lts.transitions[i]:
                    print(f"      --{a}--> [{j}] {lts.terms[j]}")
        return 0

    if args.command == "check":
        term = syntax.parse(args.term)
        lts = semantics.build_lts(term, _limits(args))
        if lts.inconsistent[lts.root]:
            print("inconsistent")
            return 1
        print("consistent")
        return 0

    if args.command == "refine":
        p = syntax.parse(args.p)
        q = syntax.parse(args.q)
        verdict = refinement.refines(p, q, _limits(args))
        if args.format == "json":
            print(refinement.verdict_to_json(verdict))
        elif verdict.holds:
            print("holds")
        else:
            cex = verdict.counterexample
            print("refuted")
            print(f"  reason: {cex.reason}")
            for action, state in cex.path:
                print(f"  {action}: {state}")
        return 0 if verdict.holds else 1

    if args.command == "equiv":
        p = syntax.parse(args.p)
        q = syntax.parse(args.q)
        if refinement.equivalent(p, q, _limits(args)):
            print("equivalent")
            return 0
        print("not equivalent")
        return 1

    if args.command == "validate":
        term = syntax.parse(args.term)
        lts = semantics.build_lts(term, _limits(args))
        report = semantics.validate_llts(lts)
        for name, value in (
            ("tau-pure", report.tau_pure),
            ("lts1", report.lts1),
            ("lts2", report.lts2),
            ("forward-tau-f", report.forward_tau_f),
        ):
            print(f"{name}: {'ok' if value else 'VIOLATED'}")
        for state, prop in report.counterexamples:
            print(f"  violation {prop}: {state}")
        return 0 if report.ok else 1

    if args.command == "props":
        if args.baseline:
            entries = properties.load_baseline(args.baseline)
            reports = properties.run_baseline(entries)
        else:
            reports = properties.run_checks(args.seed, args.trials, args.only)
        failed = False
        for report in reports:
            if args.format == "json":
                print(properties.report_to_json(report))
            else:
                print(report.summary())
                for inputs, observed, expected in report.failures[:5]:
                    print(f"  failure: inputs={list(inputs)}")
                    print(f"           observed={observed} expected={expected}")
                for note in report.notes:
                    print(f"  note: {note}")
            failed = failed or not report.passed
        return 1 if failed else 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
