"""SLDNF*-trees and generalized SLDNF-trees under depth-first, left-most control.

A :class:`DerivationForest` holds every SLDNF*-tree built for one top goal.
Trees are linked through the negative subgoals that spawned them (the dotted
"subsidiary" edges).  Expansion proceeds depth first across trees: a
subsidiary tree is finished before its parent tree resumes.

Each literal of a goal carries its ancestor list, the chain of selected
positive subgoals whose proof goes through it.  Subsidiary trees inherit the
ancestor list of the negative subgoal they were built for, so ancestry is
tracked across trees.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .syntax import (
    Atom,
    Compound,
    Literal,
    Program,
    Substitution,
    Term,
    Var,
    is_ground,
    map_leaves,
    rename_apart,
    substitute_literal,
)

# -- unification --------------------------------------------------------------


def _walk(t: Term, s: Substitution) -> Term:
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def _occurs(v: Var, t: Term, s: Substitution) -> bool:
    stack = [t]
    while stack:
        x = _walk(stack.pop(), s)
        if x == v:
            return True
        if isinstance(x, Compound):
            if v in x.variables:
                return True
            stack.extend(w for w in x.variables if w in s)
    return False


def _resolve(t: Term, s: Substitution) -> Term:
    return map_leaves(t, lambda v: _walk(v, s), domain=s.keys(), descend=True)


def unify(a: Atom, b: Atom) -> Substitution | None:
    """Most general unifier of two atoms (occurs check on), or None.

    When two variables meet, the one from ``a`` is bound.
    """
    if a.key != b.key:
        return None
    s: Substitution = {}
    stack = list(zip(reversed(a.args), reversed(b.args)))
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, s), _walk(y, s)
        if x == y:
            continue
        if isinstance(x, Var):
            if _occurs(x, y, s):
                return None
            s[x] = y
        elif isinstance(y, Var):
            if _occurs(y, x, s):
                return None
            s[y] = x
        elif (
            isinstance(x, Compound)
            and isinstance(y, Compound)
            and x.functor == y.functor
            and len(x.args) == len(y.args)
        ):
            stack.extend(zip(reversed(x.args), reversed(y.args)))
        else:
            return None
    return {v: _resolve(t, s) for v, t in s.items()}


# -- forest data ----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class NodeId:
    index: int
    tree: int = field(compare=False)

    def __str__(self) -> str:
        return f"N{self.index}"


@dataclass(frozen=True)
class AncestorEntry:
    node: NodeId
    atom: Atom


class AncestorList:
    """Persistent list of ancestor entries, nearest ancestor first.

    Prepending shares the tail, so long chains of nested subgoals stay cheap.
    """

    __slots__ = ("_head", "_rest", "_len")

    def __init__(self, head: AncestorEntry | None = None, rest: AncestorList | None = None):
        self._head = head
        self._rest = rest
        self._len = 0 if head is None else 1 + (len(rest) if rest is not None else 0)

    def push(self, node: NodeId, atom: Atom) -> AncestorList:
        return AncestorList(AncestorEntry(node, atom), self if self._len else None)

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[AncestorEntry]:
        cur: AncestorList | None = self
        while cur is not None and cur._head is not None:
            yield cur._head
            cur = cur._rest

    def __eq__(self, other) -> bool:
        if not isinstance(other, AncestorList):
            return NotImplemented
        return len(self) == len(other) and all(a == b for a, b in zip(self, other))

    def __hash__(self) -> int:
        return hash(tuple(self))

    def __repr__(self) -> str:
        return "AncestorList([" + ", ".join(f"({e.node}, {e.atom})" for e in self) + "])"


EMPTY_ANCESTORS = AncestorList()


@dataclass(frozen=True)
class AnnotatedLiteral:
    literal: Literal
    ancestors: AncestorList = EMPTY_ANCESTORS

    def __str__(self) -> str:
        return render_literal(self.literal)


class Goal:
    """Immutable sequence of annotated literals with shared tails.

    ``goal[1:]`` and prepending a clause body are O(1) per literal added, so
    goals that keep growing (left recursion) do not cost quadratic memory.
    """

    __slots__ = ("first", "rest", "_len")

    def __init__(self, first: AnnotatedLiteral | None = None, rest: Goal | None = None):
        self.first = first
        self.rest = rest
        self._len = 0 if first is None else 1 + len(rest)

    @classmethod
    def of(cls, literals, tail: Goal | None = None) -> Goal:
        goal = tail if tail is not None else EMPTY_GOAL
        for lit in reversed(list(literals)):
            goal = cls(lit, goal)
        return goal

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[AnnotatedLiteral]:
        cur = self
        while cur._len:
            yield cur.first
            cur = cur.rest

    def __getitem__(self, index):
        if isinstance(index, slice):
            if index.step is None and index.stop is None and (index.start or 0) >= 0:
                cur = self
                for _ in range(min(index.start or 0, self._len)):
                    cur = cur.rest
                return cur
            return Goal.of(tuple(self)[index])
        if index < 0:
            index += self._len
        if not 0 <= index < self._len:
            raise IndexError("goal index out of range")
        cur = self
        for _ in range(index):
            cur = cur.rest
        return cur.first

    def __eq__(self, other) -> bool:
        if not isinstance(other, Goal):
            return NotImplemented
        return self._len == other._len and all(a == b for a, b in zip(self, other))

    def __hash__(self) -> int:
        return hash(tuple(self))

    def __repr__(self) -> str:
        return f"Goal({list(self)!r})"


EMPTY_GOAL = Goal()


def render_literal(lit: Literal) -> str:
    return str(lit.atom) if lit.positive else f"¬{lit.atom}"


def render_goal(goal: Goal) -> str:
    if not goal:
        return "←"
    return "← " + ", ".join(str(lit) for lit in goal)


class Mark(enum.Enum):
    SUCCESS = "□t"
    FAILURE = "□f"
    FLOUNDER = "□fl"
    LAST = "LAST"
    SUCCESS_AND_LAST = "□t LAST"

    @property
    def is_success(self) -> bool:
        return self in (Mark.SUCCESS, Mark.SUCCESS_AND_LAST)

    @property
    def is_last(self) -> bool:
        return self in (Mark.LAST, Mark.SUCCESS_AND_LAST)


class EdgeKind(enum.Enum):
    CLAUSE = "clause"  # resolution step with a program clause
    NO_MATCH = "no-match"  # no clause head unifies: failure leaf
    NEG_FAIL = "neg-fail"  # subsidiary tree has a success leaf
    NEG_FLOUNDER = "neg-flounder"  # subsidiary tree flounders
    NEG_SUCCEED = "neg-succeed"  # subsidiary tree finitely fails
    FLOUNDER = "flounder"  # non-ground negative subgoal selected


@dataclass(frozen=True)
class Edge:
    kind: EdgeKind
    clause_index: int | None = None
    mgu: Substitution | None = field(default=None, compare=False, hash=False)

    @property
    def label(self) -> str:
        if self.kind is EdgeKind.CLAUSE:
            return f"C{self.clause_index + 1}"
        return self.kind.value


@dataclass(eq=False)
class Node:
    id: NodeId
    goal: Goal
    parent: NodeId | None = None
    mark: Mark | None = None
    children: list[tuple[Edge, NodeId]] = field(default_factory=list)

    @property
    def selected(self) -> AnnotatedLiteral | None:
        return self.goal.first if self.goal else None


class TreeStatus(enum.Enum):
    OPEN = "open"
    COMPLETE = "complete"
    TRUNCATED = "truncated"


@dataclass(eq=False)
class SldnfStarTree:
    id: int
    root: NodeId
    spawned_by: NodeId | None = None  # negative-subgoal node in the parent tree
    nodes: list[NodeId] = field(default_factory=list)
    subsidiary_links: dict[NodeId, int] = field(default_factory=dict)
    status: TreeStatus = TreeStatus.OPEN
    # frontier is a stack; the last entry is the next node to select
    frontier: list[NodeId] = field(default_factory=list, repr=False)
    last_node: NodeId | None = None
    success_leaves: list[NodeId] = field(default_factory=list)
    flounder_leaves: list[NodeId] = field(default_factory=list)
    # False when expansion stopped at a success leaf with branches left unexplored
    exhausted: bool = True

    @property
    def closed(self) -> bool:
        return self.last_node is not None or not self.frontier or not self.exhausted


@dataclass(frozen=True)
class TraceEvent:
    step: int
    node: NodeId
    goal: Goal = field(repr=False)  # rendered on demand; goals can be large
    rule: str
    marks: str = ""

    def __str__(self) -> str:
        parts = [f"{self.step:>5}", f"{self.node}", render_goal(self.goal), "|", self.rule]
        if self.marks:
            parts.append(self.marks)
        return " ".join(parts)


class BudgetExhausted(Exception):
    pass


class Outcome(enum.Enum):
    SUCCEEDS = "SUCCEEDS"
    FAILS = "FAILS"
    FLOUNDERS = "FLOUNDERS"
    UNDETERMINED = "UNDETERMINED"
    UNKNOWN = "UNKNOWN"


class DerivationForest:
    """A generalized SLDNF-tree under construction (or finished).

    ``trees[0]`` is the main tree.  The forest also keeps the depth-first
    agenda: a stack of open trees whose top is the tree being expanded.
    """

    def __init__(self, program: Program, query: Atom, budget: int):
        if budget < 1:
            raise ValueError("budget must be at least 1")
        self.program = program
        self.query = query
        self.budget = budget
        self.budget_spent = 0
        self.nodes: dict[NodeId, Node] = {}
        self.trees: list[SldnfStarTree] = []
        self.trace: list[TraceEvent] = []
        self._next_index = 0
        self._fresh = itertools.count()
        self._agenda: list[int] = []
        self._new_tree(Literal(query), EMPTY_ANCESTORS, spawned_by=None)

    @property
    def main(self) -> SldnfStarTree:
        return self.trees[0]

    @property
    def complete(self) -> bool:
        return self.main.status is TreeStatus.COMPLETE

    @property
    def truncated(self) -> bool:
        return self.main.status is TreeStatus.TRUNCATED

    @property
    def root(self) -> NodeId:
        return self.main.root

    def tree_of(self, node_id: NodeId) -> SldnfStarTree:
        return self.trees[node_id.tree]

    def subsidiary_of(self, node_id: NodeId) -> SldnfStarTree | None:
        tid = self.tree_of(node_id).subsidiary_links.get(node_id)
        return None if tid is None else self.trees[tid]

    # -- construction --------------------------------------------------------

    def _new_node(self, tree: SldnfStarTree, goal, parent: NodeId | None, mark=None) -> Node:
        nid = NodeId(self._next_index, tree.id)
        self._next_index += 1
        node = Node(nid, goal if isinstance(goal, Goal) else Goal.of(goal), parent, mark)
        self.nodes[nid] = node
        tree.nodes.append(nid)
        if mark is Mark.FLOUNDER:
            tree.flounder_leaves.append(nid)
        return node

    def _new_tree(self, lit: Literal, ancestors: AncestorList, spawned_by: NodeId | None):
        tree = SldnfStarTree(id=len(self.trees), root=NodeId(self._next_index, len(self.trees)))
        tree.spawned_by = spawned_by
        self.trees.append(tree)
        root = self._new_node(tree, [AnnotatedLiteral(lit, ancestors)], parent=None)
        tree.frontier.append(root.id)
        self._agenda.append(tree.id)
        return tree

    def _add_child(self, node: Node, edge: Edge, goal=EMPTY_GOAL, mark: Mark | None = None) -> Node:
        tree = self.tree_of(node.id)
        child = self._new_node(tree, goal, node.id, mark)
        node.children.append((edge, child.id))
        return child

    def _settle(self) -> None:
        """Close finished trees and hand their verdict back to the parent node."""
        while self._agenda:
            tree = self.trees[self._agenda[-1]]
            if not tree.closed:
                return
            self._agenda.pop()
            tree.status = TreeStatus.COMPLETE
            if tree.spawned_by is not None:
                self._resolve_negation(tree)

    def _resolve_negation(self, sub: SldnfStarTree) -> None:
        node = self.nodes[sub.spawned_by]
        parent_tree = self.tree_of(node.id)
        rest = node.goal.rest
        if sub.success_leaves:
            child = self._add_child(node, Edge(EdgeKind.NEG_FAIL), mark=Mark.FAILURE)
            tag = "NEG-FAIL"
        elif sub.flounder_leaves:
            child = self._add_child(node, Edge(EdgeKind.NEG_FLOUNDER), mark=Mark.FLOUNDER)
            tag = "NEG-FLOUNDER"
        elif sub.last_node is None:
            child = self._add_child(node, Edge(EdgeKind.NEG_SUCCEED), goal=rest)
            parent_tree.frontier.append(child.id)
            tag = "NEG-SUCCEED"
        else:
            node.mark = Mark.LAST
            parent_tree.last_node = node.id
            self.trace.append(
                TraceEvent(self.budget_spent, node.id, node.goal, "NEG-UNDETERMINED", "LAST")
            )
            return
        marks = child.mark.value if child.mark else ""
        self.trace.append(
            TraceEvent(self.budget_spent, node.id, node.goal, f"{tag} -> {child.id}", marks)
        )

    def select(self) -> Node | None:
        """The node depth-first order picks next, or None once the main tree is closed."""
        if self.main.status is not TreeStatus.OPEN:
            return None
        self._settle()
        if not self._agenda:
            return None
        return self.nodes[self.trees[self._agenda[-1]].frontier[-1]]

    def _truncate(self) -> None:
        for tid in self._agenda:
            self.trees[tid].status = TreeStatus.TRUNCATED

    def expand(self, node_id: NodeId) -> None:
        nxt = self.select()
        if nxt is None or nxt.id != node_id:
            raise ValueError(f"{node_id} is not the node selected by depth-first order")
        if self.budget_spent >= self.budget:
            self._truncate()
            raise BudgetExhausted(f"budget of {self.budget} expansions spent")
        self.budget_spent += 1
        tree = self.tree_of(node_id)
        tree.frontier.pop()
        node = nxt
        goal = node.goal

        if not node.goal:
            tree.success_leaves.append(node.id)
            root_ancestors = self.nodes[tree.root].goal.first.ancestors
            if root_ancestors:
                node.mark = Mark.SUCCESS_AND_LAST
                tree.last_node = node.id
            else:
                # main tree: stop at the first answer, remaining branches unexplored
                node.mark = Mark.SUCCESS
                tree.exhausted = not tree.frontier
            self.trace.append(TraceEvent(self.budget_spent, node.id, goal, "success", node.mark.value))
            return

        first, rest = node.goal.first, node.goal.rest
        lit = first.literal
        if lit.positive:
            self._resolve_positive(node, first, rest, tree, goal)
        elif is_ground(lit.atom):
            assert first.ancestors, "subsidiary tree root must have a nonempty ancestor list"
            sub = self._new_tree(Literal(lit.atom), first.ancestors, spawned_by=node.id)
            tree.subsidiary_links[node.id] = sub.id
            self.trace.append(
                TraceEvent(self.budget_spent, node.id, goal, f"NEG subsidiary T{sub.id} -> {sub.root}")
            )
        else:
            child = self._add_child(node, Edge(EdgeKind.FLOUNDER), mark=Mark.FLOUNDER)
            self.trace.append(
                TraceEvent(self.budget_spent, node.id, goal, f"FLOUNDER -> {child.id}", Mark.FLOUNDER.value)
            )

    def _resolve_positive(self, node: Node, first: AnnotatedLiteral, rest: Goal, tree, goal: Goal) -> None:
        selected = first.literal.atom
        inherited = first.ancestors.push(node.id, selected)
        created = []
        for index, clause in enumerate(self.program.clauses):
            if clause.head.key != selected.key:
                continue
            renamed = rename_apart(clause, self._fresh)
            # head first: a head variable is bound when two variables meet, so
            # goal variables (and the carried literals) are left alone when possible
            theta = unify(renamed.head, selected)
            if theta is None:
                continue
            body = [AnnotatedLiteral(substitute_literal(b, theta), inherited) for b in renamed.body]
            on_goal = {v: t for v, t in theta.items() if v not in renamed.head.variables}
            carried = _substitute_goal(rest, on_goal) if on_goal else rest
            child = self._add_child(node, Edge(EdgeKind.CLAUSE, index, theta), goal=Goal.of(body, carried))
            created.append(child.id)
        if created:
            tree.frontier.extend(reversed(created))
            rule = " ".join(f"{e.label}->{c}" for e, c in node.children)
            self.trace.append(TraceEvent(self.budget_spent, node.id, goal, rule))
        else:
            child = self._add_child(node, Edge(EdgeKind.NO_MATCH), mark=Mark.FAILURE)
            self.trace.append(
                TraceEvent(self.budget_spent, node.id, goal, f"no-match -> {child.id}", Mark.FAILURE.value)
            )

    def step(self) -> Node | None:
        """Expand the next selected node; return it, or None when finished."""
        node = self.select()
        if node is None:
            return None
        self.expand(node.id)
        return node

    def build(self) -> DerivationForest:
        try:
            while self.step() is not None:
                pass
        except BudgetExhausted:
            pass
        return self


def _substitute_goal(goal: Goal, theta: Substitution) -> Goal:
    """Apply ``theta`` to carried literals; the untouched suffix is shared."""
    rebuilt: list[AnnotatedLiteral] = []
    keep_from = 0
    for i, al in enumerate(goal):
        lit = substitute_literal(al.literal, theta)
        if lit is al.literal:
            rebuilt.append(al)
        else:
            rebuilt.append(AnnotatedLiteral(lit, al.ancestors))
            keep_from = i + 1
    return Goal.of(rebuilt[:keep_from], goal[keep_from:])


def expand(forest: DerivationForest, node_id: NodeId) -> DerivationForest:
    forest.expand(node_id)
    return forest


def run(program: Program, query: Atom, budget: int = 10000) -> DerivationForest:
    return DerivationForest(program, query, budget).build()


def classify(forest: DerivationForest) -> Outcome:
    main = forest.main
    if main.success_leaves:
        return Outcome.SUCCEEDS
    if forest.truncated or main.status is TreeStatus.OPEN:
        return Outcome.UNKNOWN
    if main.flounder_leaves:
        return Outcome.FLOUNDERS
    if main.last_node is not None:
        return Outcome.UNDETERMINED
    return Outcome.FAILS


# -- derivations and structural checks ------------------------------------------


@dataclass(frozen=True)
class PathStep:
    node: NodeId
    goal: Goal

    @property
    def selected(self) -> AnnotatedLiteral | None:
        return self.goal.first if self.goal else None


def successors(forest: DerivationForest, node_id: NodeId) -> list[NodeId]:
    """Dotted edge into the subsidiary tree first, then ordinary children."""
    out = []
    sub = forest.subsidiary_of(node_id)
    if sub is not None:
        out.append(sub.root)
    out.extend(child for _, child in forest.nodes[node_id].children)
    return out


def derivations(forest: DerivationForest) -> Iterator[list[PathStep]]:
    """Every maximal root-originating path, crossing subsidiary edges."""
    stack: list[tuple[NodeId, int]] = [(forest.root, 0)]
    path: list[NodeId] = []
    while stack:
        nid, depth = stack.pop()
        del path[depth:]
        path.append(nid)
        nxt = successors(forest, nid)
        if not nxt:
            yield [PathStep(n, forest.nodes[n].goal) for n in path]
            continue
        stack.extend((c, depth + 1) for c in reversed(nxt))


def path_to(forest: DerivationForest, node_id: NodeId) -> list[NodeId]:
    """Nodes from the main root down to ``node_id``, crossing subsidiary edges."""
    path = []
    cur: NodeId | None = node_id
    while cur is not None:
        path.append(cur)
        node = forest.nodes[cur]
        if node.parent is not None:
            cur = node.parent
        else:
            cur = forest.tree_of(cur).spawned_by
    path.reverse()
    return path


def check_forest(forest: DerivationForest) -> list[str]:
    """Structural invariants of a forest; returns a list of violations."""
    problems = []
    for tree in forest.trees[1:]:
        if not forest.nodes[tree.root].goal.first.ancestors:
            problems.append(f"subsidiary root {tree.root} has an empty ancestor list")
        if len(tree.success_leaves) > 1:
            problems.append(f"subsidiary tree T{tree.id} has {len(tree.success_leaves)} success leaves")
    for node in forest.nodes.values():
        on_path = set(path_to(forest, node.id))
        for al in node.goal:
            for entry in al.ancestors:
                if entry.node not in on_path:
                    problems.append(f"{entry.node} listed as ancestor at {node.id} but not on its path")
                    continue
                sel = forest.nodes[entry.node].selected
                if sel is None or not sel.literal.positive or sel.literal.atom != entry.atom:
                    problems.append(f"{entry.atom} was not the selected subgoal at {entry.node}")
    return problems
