from pathlib import Path

import pytest

from loomcheck.syntax import parse_atom, parse_program

CORPUS = Path(__file__).parent / "corpus"

# (file, query, expected CLI label prefix)
CORPUS_CASES = [
    ("p1.pl", "p(a)", "PREDICTED-NONTERMINATING"),
    ("p2.pl", "p", "FAILS"),
    ("abnormal.pl", "a", "PREDICTED-NONTERMINATING"),
    ("append.pl", "append([a, b], [c], X)", "SUCCEEDS"),
    ("append.pl", "append(X, Y, [a, b])", "SUCCEEDS"),
    ("guarded.pl", "p(a)", "FAILS"),
    ("guarded.pl", "p(b)", "SUCCEEDS"),
    ("even.pl", "even(s(s(0)))", "SUCCEEDS"),
    ("even.pl", "even(s(0))", "FAILS"),
    ("ancestor.pl", "anc(a, b)", "PREDICTED-NONTERMINATING"),
    ("grow.pl", "p(a)", "PREDICTED-NONTERMINATING"),
    ("nat.pl", "nat(X)", "SUCCEEDS"),
    ("nat.pl", "nat(s(s(a)))", "FAILS"),
    ("flounder.pl", "p", "FLOUNDERS"),
    ("win.pl", "win(a)", "PREDICTED-NONTERMINATING"),
]


def load(name):
    return parse_program((CORPUS / name).read_text(encoding="utf-8"))


@pytest.fixture
def p1():
    return load("p1.pl")


@pytest.fixture
def p2():
    return load("p2.pl")


@pytest.fixture
def abnormal():
    return load("abnormal.pl")


def q(text):
    return parse_atom(text)


_acceptance_lines = []


def record_acceptance(number, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}"
    if detail:
        line += f" ({detail})"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
