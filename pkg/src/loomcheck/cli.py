"""Command-line front end.

    loomcheck PROGRAM --query ATOM [--query ATOM ...] [--budget N] [--threshold N]
              [--trace] [--dot PATH] [--json] [--jobs N] [--no-loop-check]

One verdict line per query on stdout.  Exit status is the most severe
outcome over all queries: 0 terminated, 2 predicted non-terminating,
3 budget exhausted, 4 floundered, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .engine import Outcome
from .loopcheck import DEFAULT_BUDGET, DEFAULT_THRESHOLD, Verdict, VerdictKind, predict
from .render import to_dot, trace_lines
from .syntax import Atom, ParseError, Program, parse_atom, parse_program

BUDGET_ENV = "LOOMCHECK_BUDGET"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONTERMINATING = 2
EXIT_BUDGET = 3
EXIT_FLOUNDER = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    program_path: Path
    queries: tuple[Atom, ...]
    budget: int = DEFAULT_BUDGET
    threshold: int | None = DEFAULT_THRESHOLD
    trace: bool = False
    dot_output: Path | None = None
    json: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise UsageError("budget must be at least 1")
        if self.threshold is not None and self.threshold < 2:
            raise UsageError("threshold must be at least 2")
        if not self.queries:
            raise UsageError("at least one --query is required")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


def _positive_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="loomcheck",
        description=(
            "Run queries against a general logic program and flag the ones that most "
            "likely do not terminate.  A PREDICTED-NONTERMINATING verdict is a heuristic: "
            "it reports a chain of loop goals, not a proof."
        ),
    )
    p.add_argument("program", type=Path, help="program file (pure Prolog subset, \\+ for negation)")
    p.add_argument("--query", "-q", action="append", default=[], metavar="ATOM", help="query atom (repeatable)")
    p.add_argument("--budget", type=_positive_int, default=None, help=f"node expansions per query (default {DEFAULT_BUDGET}, or ${BUDGET_ENV})")
    p.add_argument("--threshold", type=_positive_int, default=DEFAULT_THRESHOLD, help="loop goals needed for a prediction (default 3)")
    p.add_argument("--no-loop-check", action="store_true", help="only run the engine; never predict")
    p.add_argument("--trace", action="store_true", help="print one line per node expansion")
    p.add_argument("--dot", type=Path, default=None, metavar="PATH", help="write the derivation forest(s) as Graphviz DOT")
    p.add_argument("--json", action="store_true", help="emit one JSON record per query instead of verdict lines")
    p.add_argument("--jobs", type=_positive_int, default=1, help="run queries in parallel (output order is preserved)")
    return p


def _default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} is not an integer: {raw!r}") from None


def parse_config(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    queries = []
    for q in ns.query:
        try:
            queries.append(parse_atom(q))
        except ParseError as exc:
            raise UsageError(f"bad query {q!r}: {exc}") from None
    return RunConfig(
        program_path=ns.program,
        queries=tuple(queries),
        budget=ns.budget if ns.budget is not None else _default_budget(),
        threshold=None if ns.no_loop_check else ns.threshold,
        trace=ns.trace,
        dot_output=ns.dot,
        json=ns.json,
        jobs=ns.jobs,
    )


def severity(verdict: Verdict) -> int:
    if verdict.kind is VerdictKind.PREDICTED_NONTERMINATING:
        return EXIT_NONTERMINATING
    if verdict.kind is VerdictKind.BUDGET_EXHAUSTED:
        return EXIT_BUDGET
    if verdict.outcome is Outcome.FLOUNDERS:
        return EXIT_FLOUNDER
    return EXIT_OK


def run_queries(program: Program, config: RunConfig) -> list[Verdict]:
    def one(q: Atom) -> Verdict:
        return predict(program, q, config.budget, config.threshold)

    if config.jobs > 1 and len(config.queries) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(one, config.queries))
    return [one(q) for q in config.queries]


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        try:
            text = config.program_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {config.program_path}: {exc.strerror or exc}") from None
        try:
            program = parse_program(text)
        except ParseError as exc:
            raise UsageError(f"{config.program_path}: {exc}") from None
    except UsageError as exc:
        print(f"loomcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    verdicts = run_queries(program, config)
    for v in verdicts:
        if config.trace:
            print(f"TRACE {v.query}")
            for line in trace_lines(v.forest):
                print(f"  {line}")
        if config.json:
            print(json.dumps(v.to_dict(), ensure_ascii=False))
        else:
            print(v.line())

    if config.dot_output is not None:
        graphs = [to_dot(v.forest) for v in verdicts]
        try:
            config.dot_output.write_text("".join(graphs), encoding="utf-8")
        except OSError as exc:
            print(f"loomcheck: error: cannot write {config.dot_output}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_USAGE

    return max(severity(v) for v in verdicts)
