"""Object language: terms, atoms, literals, clauses and programs.

Concrete syntax is a small Edinburgh-style subset::

    p(X) :- q(X, [a, b | T]), \\+ r(X).   % negation is written \\+
    q(a, []).

There are no operators, no arithmetic and no cut.
"""

from __future__ import annotations

import re
from functools import cached_property
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

LIST_FUNCTOR = "[|]"
NIL = "[]"
VARIABLE_SYMBOL = "\U0001d4b3"  # MATHEMATICAL SCRIPT CAPITAL X


@dataclass(frozen=True)
class Var:
    """A logic variable.

    Parsed variables carry their source name.  Variables produced by
    renaming apart carry a ``serial`` and can never collide with parsed ones.
    """

    name: str
    serial: int | None = None

    def __str__(self) -> str:
        return self.name if self.serial is None else f"{self.name}{self.serial}"


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class Compound:
    functor: str
    args: tuple[Term, ...]
    # cached from the children so no operation has to recurse through deep terms
    _hash: int = field(init=False, repr=False, compare=False)
    variables: frozenset[Var] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError("compound terms need at least one argument; use Const")
        object.__setattr__(self, "_hash", hash((self.functor, self.args)))
        object.__setattr__(self, "variables", _union_vars(self.args))

    @property
    def ground(self) -> bool:
        return not self.variables

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Compound):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, Compound) and isinstance(b, Compound):
                if a._hash != b._hash or a.functor != b.functor or len(a.args) != len(b.args):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Const, Compound]
_NO_VARS: frozenset = frozenset()


def _union_vars(args) -> frozenset:
    found = None
    for a in args:
        if isinstance(a, Var):
            vs = frozenset((a,))
        elif isinstance(a, Compound):
            vs = a.variables
        else:
            continue
        if not vs:
            continue
        found = vs if found is None else found | vs
    return _NO_VARS if found is None else found


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        return (self.predicate, len(self.args))

    @cached_property
    def variables(self) -> frozenset[Var]:
        return _union_vars(self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"\\+ {self.atom}"


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Literal, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(lit) for lit in self.body)}."


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()

    def __str__(self) -> str:
        return "".join(f"{c}\n" for c in self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)


@dataclass(frozen=True)
class SymbolString:
    """Left-to-right symbols of a term or atom, variables collapsed to one placeholder."""

    symbols: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __str__(self) -> str:
        return " ".join(self.symbols)


# -- construction helpers ---------------------------------------------------


def make_list(items: Iterable[Term], tail: Term | None = None) -> Term:
    result: Term = Const(NIL) if tail is None else tail
    for item in reversed(list(items)):
        result = Compound(LIST_FUNCTOR, (item, result))
    return result


def list_items(term: Term) -> tuple[list[Term], Term]:
    """Split a (possibly partial) list into its elements and its tail."""
    items = []
    while isinstance(term, Compound) and term.functor == LIST_FUNCTOR and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items, term


# -- printing ---------------------------------------------------------------


def format_term(term: Term) -> str:
    parts: list[str] = []
    stack: list = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, str):
            parts.append(t)
        elif isinstance(t, (Var, Const)):
            parts.append(str(t))
        elif t.functor == LIST_FUNCTOR and len(t.args) == 2:
            items, tail = list_items(t)
            seq: list = ["["]
            for i, item in enumerate(items):
                seq.extend([", ", item] if i else [item])
            if tail != Const(NIL):
                seq.extend([" | ", tail])
            seq.append("]")
            stack.extend(reversed(seq))
        else:
            seq = [f"{t.functor}("]
            for i, arg in enumerate(t.args):
                seq.extend([", ", arg] if i else [arg])
            seq.append(")")
            stack.extend(reversed(seq))
    return "".join(parts)


# -- measures ---------------------------------------------------------------


def _symbols(term: Term) -> Iterator[str]:
    stack: list[Term] = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield VARIABLE_SYMBOL
        elif isinstance(t, Const):
            yield t.name
        else:
            yield t.functor
            stack.extend(reversed(t.args))


def symbol_string(t: Term | Atom) -> SymbolString:
    if isinstance(t, Atom):
        syms = [t.predicate]
        for arg in t.args:
            syms.extend(_symbols(arg))
        return SymbolString(tuple(syms))
    return SymbolString(tuple(_symbols(t)))


def term_size(t: Term | Atom) -> int:
    """Occurrences of function symbols, variables and constants.

    The predicate symbol of an atom is not counted.
    """
    if isinstance(t, Atom):
        return sum(term_size(a) for a in t.args)
    return sum(1 for _ in _symbols(t))


# -- variables and substitution ---------------------------------------------


def term_vars(t: Term | Atom | Literal) -> Iterator[Var]:
    """Variables in left-to-right order of occurrence (with repeats)."""
    if isinstance(t, Literal):
        t = t.atom
    stack: list = list(reversed(t.args)) if isinstance(t, Atom) else [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            yield x
        elif isinstance(x, Compound) and not x.ground:
            stack.extend(reversed(x.args))


def is_ground(t: Term | Atom | Literal) -> bool:
    if isinstance(t, Literal):
        t = t.atom
    if isinstance(t, Atom):
        return not t.variables
    return next(term_vars(t), None) is None


Substitution = dict  # Var -> Term


def map_leaves(t: Term, leaf, domain=None, descend: bool = False) -> Term:
    """Rebuild ``t`` bottom-up, replacing each variable ``v`` by ``leaf(v)``.

    Subterms with no variable in ``domain`` (when given) are kept as they
    are.  With ``descend`` a compound returned by ``leaf`` is traversed in
    turn, as triangular bindings need.
    """
    out: list[Term] = []
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, built = stack.pop()
        if isinstance(node, Var):
            r = leaf(node)
            if descend and isinstance(r, Compound):
                stack.append((r, False))
            else:
                out.append(r)
        elif isinstance(node, Const) or node.ground or (
            domain is not None and node.variables.isdisjoint(domain)
        ):
            out.append(node)
        elif built:
            n = len(node.args)
            args = tuple(out[-n:])
            del out[-n:]
            same = all(a is b for a, b in zip(args, node.args))
            out.append(node if same else Compound(node.functor, args))
        else:
            stack.append((node, True))
            stack.extend((a, False) for a in reversed(node.args))
    return out[0]


def substitute(t: Term, theta: Substitution) -> Term:
    if not theta or isinstance(t, Const):
        return t
    if isinstance(t, Var):
        return theta.get(t, t)
    return map_leaves(t, lambda v: theta.get(v, v), domain=theta.keys())


def substitute_atom(atom: Atom, theta: Substitution) -> Atom:
    if not theta or not atom.args or theta.keys().isdisjoint(atom.variables):
        return atom
    return Atom(atom.predicate, tuple(substitute(a, theta) for a in atom.args))


def substitute_literal(lit: Literal, theta: Substitution) -> Literal:
    atom = substitute_atom(lit.atom, theta)
    return lit if atom is lit.atom else Literal(atom, lit.positive)


def rename_apart(clause: Clause, counter: Iterator[int]) -> Clause:
    """Replace every variable of ``clause`` by a fresh one drawn from ``counter``.

    Fresh variables are numbered in order of first occurrence, head first.
    """
    mapping: dict[Var, Var] = {}
    for lit in (Literal(clause.head), *clause.body):
        for v in term_vars(lit):
            if v not in mapping:
                mapping[v] = Var("V", next(counter))
    if not mapping:
        return clause
    return Clause(
        substitute_atom(clause.head, mapping),
        tuple(substitute_literal(lit, mapping) for lit in clause.body),
    )


# -- parsing ----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<neck>:-)
  | (?P<naf>\\\+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<number>[0-9]+)
  | (?P<punct>[()\[\],|.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "punct":
                kind = m.group()
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self._anon = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "eof" and "end of input" not in message:
            message += " (at end of input)"
        return ParseError(message, tok.line, tok.column)

    def expect(self, kind: str) -> _Token:
        tok = self.tok
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {kind!r}, found {found}")
        self.pos += 1
        return tok

    def accept(self, kind: str) -> bool:
        if self.tok.kind == kind:
            self.pos += 1
            return True
        return False

    def program(self) -> Program:
        clauses = []
        while self.tok.kind != "eof":
            clauses.append(self.clause())
        return Program(tuple(clauses))

    def clause(self) -> Clause:
        self._anon = 0
        if self.tok.kind == "naf":
            raise self.error("negation '\\+' is not allowed in a clause head")
        head = self.atom()
        body: list[Literal] = []
        if self.accept("neck"):
            body.append(self.literal())
            while self.accept(","):
                body.append(self.literal())
        self.expect(".")
        return Clause(head, tuple(body))

    def literal(self) -> Literal:
        if self.accept("naf"):
            if self.tok.kind == "naf":
                raise self.error("nested negation is not supported")
            return Literal(self.atom(), positive=False)
        return Literal(self.atom())

    def atom(self) -> Atom:
        tok = self.tok
        if tok.kind == "var":
            raise self.error(f"a variable ({tok.text}) cannot be used as a predicate")
        if tok.kind != "name":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected a predicate name, found {found}")
        self.pos += 1
        if self.accept("("):
            return Atom(tok.text, self.arguments())
        return Atom(tok.text)

    def arguments(self) -> tuple[Term, ...]:
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.pos += 1
            if tok.text == "_":
                self._anon += 1
                return Var(f"_{self._anon}")
            return Var(tok.text)
        if tok.kind == "number":
            self.pos += 1
            return Const(tok.text)
        if tok.kind == "name":
            self.pos += 1
            if self.accept("("):
                return Compound(tok.text, self.arguments())
            return Const(tok.text)
        if tok.kind == "[":
            self.pos += 1
            if self.accept("]"):
                return Const(NIL)
            items = [self.term()]
            while self.accept(","):
                items.append(self.term())
            tail = self.term() if self.accept("|") else None
            self.expect("]")
            return make_list(items, tail)
        if tok.kind == "naf":
            raise self.error("'\\+' may only prefix a body literal")
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.error(f"expected a term, found {found}")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_atom(text: str) -> Atom:
    """Parse a single atom, e.g. a query.  A trailing '.' is allowed."""
    p = _Parser(text)
    if p.tok.kind == "naf":
        raise p.error("a query must be a single positive atom")
    atom = p.atom()
    p.accept(".")
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after atom")
    return atom


def parse_term(text: str) -> Term:
    p = _Parser(text)
    term = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return term
