"""Loop goals and the most-likely non-termination predictor.

An atom *loops into* another atom of the same predicate when its symbol
string can be obtained from the other's by deleting symbols.  A goal whose
selected subgoal is looped into by the selected subgoal of one of its
ancestors is a loop goal of that ancestor.  An infinite derivation is
exactly one that contains an infinite chain of such loop goals, so a short
chain seen while the forest is being built is taken as evidence (not proof)
of non-termination.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .engine import (
    BudgetExhausted,
    DerivationForest,
    NodeId,
    Outcome,
    classify,
)
from .syntax import Atom, Program, SymbolString, symbol_string

DEFAULT_THRESHOLD = 3
DEFAULT_BUDGET = 10000


def is_projection(s1: SymbolString | Sequence[str], s2: SymbolString | Sequence[str]) -> bool:
    """True iff ``s1`` is a (not necessarily contiguous) subsequence of ``s2``."""
    if len(s1) > len(s2):
        return False
    it = iter(s2)
    return all(sym in it for sym in s1)


def loops_into(a1: Atom, a2: Atom) -> bool:
    return a1.key == a2.key and is_projection(symbol_string(a1), symbol_string(a2))


@dataclass(frozen=True)
class LoopChainWitness:
    """Selected subgoals, oldest first; each loops into the next and is its ancestor."""

    links: tuple[tuple[NodeId, Atom], ...]

    def __post_init__(self) -> None:
        if len(self.links) < 2:
            raise ValueError("a loop chain needs at least two goals")

    def __len__(self) -> int:
        return len(self.links)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(n for n, _ in self.links)

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(a for _, a in self.links)

    def __str__(self) -> str:
        return " ⤳ ".join(str(a) for a in self.atoms)

    def to_dict(self) -> list[dict]:
        return [
            {"node": str(n), "atom": str(a), "symbols": list(symbol_string(a).symbols)}
            for n, a in self.links
        ]


class ChainTracker:
    """Longest loop chain ending at each selected positive subgoal.

    An ancestor list is a suffix of the ancestor lists below it, so the
    chain length computed for an ancestor can be reused by every descendant.
    """

    def __init__(self) -> None:
        self._best: dict[NodeId, tuple[int, NodeId | None]] = {}
        self._atoms: dict[NodeId, Atom] = {}
        self._strings: dict[NodeId, SymbolString] = {}

    def _string(self, node: NodeId, atom: Atom) -> SymbolString:
        s = self._strings.get(node)
        if s is None:
            s = self._strings[node] = symbol_string(atom)
        return s

    def _record(self, node: NodeId, atom: Atom, older: Sequence[tuple[NodeId, Atom]]) -> tuple[int, NodeId | None]:
        # ``older`` holds the same-predicate ancestors of ``node``, oldest first
        target = self._string(node, atom)
        best: tuple[int, NodeId | None] = (1, None)
        for anc, anc_atom in older:
            if anc_atom.key != atom.key:
                continue
            length = self._best[anc][0] + 1
            if length > best[0] and is_projection(self._string(anc, anc_atom), target):
                best = (length, anc)
        self._best[node] = best
        self._atoms[node] = atom
        return best

    def longest(self, node: NodeId, atom: Atom, ancestors: Iterable) -> LoopChainWitness | None:
        """Longest chain ending at ``atom`` selected at ``node``; None if shorter than 2."""
        same = [(e.node, e.atom) for e in ancestors if e.atom.key == atom.key]
        same.reverse()
        for i, (anc, anc_atom) in enumerate(same):
            if anc not in self._best:
                self._record(anc, anc_atom, same[:i])
        length, _ = self._record(node, atom, same) if node not in self._best else self._best[node]
        if length < 2:
            return None
        links = []
        cur: NodeId | None = node
        while cur is not None:
            links.append((cur, self._atoms[cur]))
            cur = self._best[cur][1]
        links.reverse()
        return LoopChainWitness(tuple(links))


def find_loop_chain(
    forest: DerivationForest,
    node: NodeId,
    threshold: int = DEFAULT_THRESHOLD,
    tracker: ChainTracker | None = None,
) -> LoopChainWitness | None:
    """Loop chain of at least ``threshold`` goals ending at ``node``'s selected subgoal."""
    if threshold < 2:
        raise ValueError("threshold must be at least 2")
    sel = forest.nodes[node].selected
    if sel is None or not sel.literal.positive:
        raise ValueError(f"{node} does not select a positive subgoal")
    tracker = tracker or ChainTracker()
    chain = tracker.longest(node, sel.literal.atom, sel.ancestors)
    if chain is None or len(chain) < threshold:
        return None
    return chain


class VerdictKind(enum.Enum):
    TERMINATED = "terminated"
    PREDICTED_NONTERMINATING = "predicted-nonterminating"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class Verdict:
    query: Atom
    kind: VerdictKind
    expansions_used: int
    budget: int
    threshold: int | None
    outcome: Outcome | None = None
    witness: LoopChainWitness | None = None
    forest: DerivationForest | None = field(default=None, repr=False, compare=False)

    @property
    def label(self) -> str:
        if self.kind is VerdictKind.TERMINATED:
            return self.outcome.value
        if self.kind is VerdictKind.PREDICTED_NONTERMINATING:
            return f"PREDICTED-NONTERMINATING {self.witness}"
        return "BUDGET-EXHAUSTED"

    def line(self) -> str:
        return f"QUERY {self.query} => {self.label}"

    def to_dict(self) -> dict:
        d = {
            "query": str(self.query),
            "kind": self.kind.value,
            "outcome": self.outcome.value if self.outcome else None,
            "witness": self.witness.to_dict() if self.witness else None,
            "heuristic": self.kind is VerdictKind.PREDICTED_NONTERMINATING,
            "expansions_used": self.expansions_used,
            "threshold": self.threshold,
            "budget": self.budget,
        }
        if self.forest is not None and self.kind is VerdictKind.TERMINATED:
            d["main_tree_exhausted"] = self.forest.main.exhausted
        return d


def predict(
    program: Program,
    query: Atom,
    budget: int = DEFAULT_BUDGET,
    threshold: int | None = DEFAULT_THRESHOLD,
) -> Verdict:
    """Build the forest for ``query`` and watch every selected positive subgoal.

    Stops with a prediction as soon as a loop chain of ``threshold`` goals
    shows up.  ``threshold=None`` turns loop checking off.
    """
    if threshold is not None and threshold < 2:
        raise ValueError("threshold must be at least 2")
    forest = DerivationForest(program, query, budget)
    tracker = ChainTracker()

    def verdict(kind, **kw) -> Verdict:
        return Verdict(query, kind, forest.budget_spent, budget, threshold, forest=forest, **kw)

    while True:
        node = forest.select()
        if node is None:
            break
        sel = node.selected
        if threshold is not None and sel is not None and sel.literal.positive:
            chain = find_loop_chain(forest, node.id, threshold, tracker)
            if chain is not None:
                return verdict(VerdictKind.PREDICTED_NONTERMINATING, witness=chain)
        try:
            forest.expand(node.id)
        except BudgetExhausted:
            return verdict(VerdictKind.BUDGET_EXHAUSTED)
    return verdict(VerdictKind.TERMINATED, outcome=classify(forest))
