"""Generalized SLDNF-trees with ancestor lists and loop-goal based non-termination prediction."""

from .engine import DerivationForest, NodeId, Outcome, classify, derivations, expand, run, unify
from .loopcheck import (
    LoopChainWitness,
    Verdict,
    VerdictKind,
    find_loop_chain,
    is_projection,
    loops_into,
    predict,
)
from .syntax import (
    Atom,
    Clause,
    Compound,
    Const,
    Literal,
    ParseError,
    Program,
    SymbolString,
    Var,
    parse_atom,
    parse_program,
    parse_term,
    rename_apart,
    symbol_string,
    term_size,
)

__version__ = "0.1.0"
