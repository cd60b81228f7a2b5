"""Brute-force bottom-up evaluation of function-free stratified programs.

Used as ground truth for the top-down engine.  Every clause is grounded by
enumerating all assignments of its variables over the program's constants,
so nothing here shares code with unification or resolution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .syntax import Atom, Clause, Compound, Const, Program, Var, term_vars

PredicateKey = tuple[str, int]
DUMMY_CONSTANT = Const("dummy")


class Unstratifiable(ValueError):
    pass


@dataclass
class GroundInterpretation:
    facts: set[Atom] = field(default_factory=set)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.facts

    def __len__(self) -> int:
        return len(self.facts)


def _check_function_free(program: Program) -> None:
    for clause in program:
        for atom in (clause.head, *(lit.atom for lit in clause.body)):
            if any(isinstance(a, Compound) for a in atom.args):
                raise ValueError(f"not function-free: {clause}")


def _predicates(program: Program) -> list[PredicateKey]:
    seen: dict[PredicateKey, None] = {}
    for clause in program:
        seen[clause.head.key] = None
        for lit in clause.body:
            seen[lit.atom.key] = None
    return list(seen)


def stratify(program: Program) -> list[set[PredicateKey]]:
    """Predicates grouped into strata, lowest first.

    A predicate sits at least as high as everything it uses positively and
    strictly higher than everything it uses negatively.
    """
    _check_function_free(program)
    preds = _predicates(program)
    level = {p: 0 for p in preds}
    changed = True
    while changed:
        changed = False
        for clause in program:
            h = clause.head.key
            for lit in clause.body:
                need = level[lit.atom.key] + (0 if lit.positive else 1)
                if level[h] < need:
                    if need >= len(preds):
                        raise Unstratifiable(f"negative cycle through {h[0]}/{h[1]}")
                    level[h] = need
                    changed = True
    if not preds:
        return []
    strata: list[set[PredicateKey]] = [set() for _ in range(max(level.values()) + 1)]
    for p in preds:
        strata[level[p]].add(p)
    return [s for s in strata if s]


def herbrand_constants(program: Program, *extra: Atom) -> list[Const]:
    consts: dict[Const, None] = {}
    atoms = [a for c in program for a in (c.head, *(lit.atom for lit in c.body))]
    for atom in (*atoms, *extra):
        for arg in atom.args:
            if isinstance(arg, Const):
                consts[arg] = None
    return sorted(consts, key=lambda c: c.name) or [DUMMY_CONSTANT]


def _ground(atom: Atom, env: dict[Var, Const]) -> Atom:
    return Atom(atom.predicate, tuple(env.get(a, a) for a in atom.args))


def _instances(clause: Clause, constants: list[Const]):
    vs = list(dict.fromkeys(v for atom in (clause.head, *(b.atom for b in clause.body)) for v in term_vars(atom)))
    for values in itertools.product(constants, repeat=len(vs)):
        yield dict(zip(vs, values))


def _fires(clause: Clause, env, facts: set[Atom], negation_facts: set[Atom]) -> bool:
    for lit in clause.body:
        g = _ground(lit.atom, env)
        if lit.positive and g not in facts:
            return False
        if not lit.positive and g in negation_facts:
            return False
    return True


def immediate_consequences(program: Program, interp: GroundInterpretation, constants=None) -> GroundInterpretation:
    """One application of the immediate-consequence operator (negation read against ``interp``)."""
    constants = constants or herbrand_constants(program)
    out = set()
    for clause in program:
        for env in _instances(clause, constants):
            if _fires(clause, env, interp.facts, interp.facts):
                out.add(_ground(clause.head, env))
    return GroundInterpretation(out)


def bottom_up(program: Program, query: Atom | None = None) -> GroundInterpretation:
    """Perfect model, computed stratum by stratum to a fixpoint."""
    strata = stratify(program)
    constants = herbrand_constants(program, *([query] if query is not None else []))
    facts: set[Atom] = set()
    for stratum in strata:
        rules = [c for c in program if c.head.key in stratum]
        frozen = set(facts)
        while True:
            new = set()
            for clause in rules:
                for env in _instances(clause, constants):
                    head = _ground(clause.head, env)
                    if head not in facts and _fires(clause, env, facts, frozen):
                        new.add(head)
            if not new:
                break
            facts |= new
    return GroundInterpretation(facts)
