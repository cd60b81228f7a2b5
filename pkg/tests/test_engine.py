import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS_CASES, load, q
from loomcheck.engine import (
    BudgetExhausted,
    DerivationForest,
    EdgeKind,
    Mark,
    Outcome,
    TreeStatus,
    check_forest,
    classify,
    derivations,
    expand,
    run,
    unify,
)
from loomcheck.syntax import Atom, Compound, Const, Var, parse_program, substitute_atom

from test_syntax import atoms


def labels(forest):
    return {str(nid): (str(n.goal and n.goal[0]), n.mark) for nid, n in forest.nodes.items()}


# -- unify ------------------------------------------------------------------


def test_unify_binds_variable():
    assert unify(q("p(X)"), q("p(f(Y))")) == {Var("X"): Compound("f", (Var("Y"),))}


def test_unify_constant_clash():
    assert unify(q("p(a)"), q("p(b)")) is None


def test_unify_occurs_check():
    assert unify(q("p(X)"), q("p(f(X))")) is None


def test_unify_binds_first_argument_variable_on_var_var():
    assert unify(q("p(X)"), q("p(Y)")) == {Var("X"): Var("Y")}


def test_unify_needs_same_predicate_and_arity():
    assert unify(q("p(a)"), q("r(a)")) is None
    assert unify(q("p(a)"), q("p(a, b)")) is None


def test_unify_result_is_idempotent():
    theta = unify(q("p(X, Y, Z)"), q("p(Y, Z, f(a))"))
    assert theta is not None
    once = substitute_atom(q("p(X, Y, Z)"), theta)
    assert substitute_atom(once, theta) == once
    assert once == q("p(f(a), f(a), f(a))")


@given(atoms, atoms)
def test_unifier_unifies(a, b):
    b = Atom(a.predicate, b.args[: len(a.args)] + a.args[len(b.args):])
    theta = unify(a, b)
    if theta is not None:
        assert substitute_atom(a, theta) == substitute_atom(b, theta)


@given(atoms, st.dictionaries(st.sampled_from([Var("X"), Var("Y"), Var("Zs")]), st.sampled_from([Const("a"), Compound("g", (Const("b"),))])))
def test_instance_always_unifies_with_its_pattern(a, sigma):
    # rename the instance apart so it shares no variables with the pattern
    inst = substitute_atom(a, sigma)
    inst = substitute_atom(inst, {v: Var("W", i) for i, v in enumerate(sorted({v for v in _vars(inst)}, key=str))})
    theta = unify(a, inst)
    assert theta is not None
    assert substitute_atom(a, theta) == substitute_atom(inst, theta)


def _vars(atom):
    from loomcheck.syntax import term_vars

    return term_vars(atom)


# -- expansion ----------------------------------------------------------------


def test_p2_forest_shape_with_pruned_subsidiary(p2):
    forest = run(p2, q("p"), 100)
    assert forest.complete
    n = {str(k): v for k, v in forest.nodes.items()}
    assert sorted(n) == ["N0", "N1", "N2", "N3", "N4", "N5"]
    assert str(n["N0"].goal[0]) == "p"
    assert str(n["N1"].goal[0]) == "¬q"
    assert str(n["N2"].goal[0]) == "q"
    assert not n["N3"].goal and n["N3"].mark is Mark.SUCCESS_AND_LAST
    assert str(n["N4"].goal[0]) == "q" and n["N4"].mark is None  # created, never expanded
    assert n["N5"].mark is Mark.FAILURE
    assert [(e.kind, str(c)) for e, c in n["N1"].children] == [(EdgeKind.NEG_FAIL, "N5")]
    assert [e.label for e, _ in n["N2"].children] == ["C2", "C3"]
    assert forest.subsidiary_of(n["N1"].id).root == n["N2"].id
    assert len(forest.trees) == 2
    assert forest.budget_spent == 4


def test_p1_forest_nests_subsidiary_trees(p1):
    forest = run(p1, q("p(a)"), 50)
    assert forest.truncated
    roots = [str(forest.nodes[t.root].goal[0]) for t in forest.trees[:4]]
    assert roots == ["p(a)", "p(f(a))", "p(f(f(a)))", "p(f(f(f(a))))"]
    first = [(str(k), str(v.goal[0])) for k, v in list(forest.nodes.items())[:5]]
    assert first == [
        ("N0", "p(a)"),
        ("N1", "¬p(f(a))"),
        ("N2", "p(f(a))"),
        ("N3", "¬p(f(f(a)))"),
        ("N4", "p(f(f(a)))"),
    ]
    # N1 would be the LAST node of the main tree, but that needs an infinite subsidiary
    assert forest.nodes[forest.root].mark is None
    assert all(t.status is TreeStatus.TRUNCATED for t in forest.trees)


def test_p1_ancestor_lists_nest_through_subsidiaries(p1):
    forest = run(p1, q("p(a)"), 10)
    n = {str(k): v for k, v in forest.nodes.items()}
    assert [(str(e.node), str(e.atom)) for e in n["N1"].goal[0].ancestors] == [("N0", "p(a)")]
    # the subsidiary root inherits the negative subgoal's list unchanged
    assert [(str(e.node), str(e.atom)) for e in n["N2"].goal[0].ancestors] == [("N0", "p(a)")]
    assert [(str(e.node), str(e.atom)) for e in n["N4"].goal[0].ancestors] == [("N2", "p(f(a))"), ("N0", "p(a)")]


def test_carried_literals_keep_their_ancestor_lists():
    prog = parse_program("p :- q, r.\nq :- s.\ns.\nr.\n")
    forest = run(prog, q("p"), 100)
    n = {str(k): v for k, v in forest.nodes.items()}
    # N1: <- q, r ; N2: <- s, r
    assert [str(l) for l in n["N2"].goal] == ["s", "r"]
    assert [str(e.node) for e in n["N2"].goal[0].ancestors] == ["N1", "N0"]
    assert [str(e.node) for e in n["N2"].goal[1].ancestors] == ["N0"]
    assert classify(forest) is Outcome.SUCCEEDS


def test_non_ground_negation_flounders():
    prog = parse_program("p :- \\+ r(X).\nr(a).\n")
    forest = run(prog, q("p"), 100)
    assert classify(forest) is Outcome.FLOUNDERS
    (edge, leaf), = forest.nodes[forest.main.nodes[1]].children
    assert edge.kind is EdgeKind.FLOUNDER
    assert forest.nodes[leaf].mark is Mark.FLOUNDER


def test_floundering_subsidiary_propagates():
    prog = parse_program("p :- \\+ q.\nq :- \\+ r(X).\n")
    forest = run(prog, q("p"), 100)
    n1 = forest.nodes[forest.main.nodes[1]]
    assert [e.kind for e, _ in n1.children] == [EdgeKind.NEG_FLOUNDER]
    assert classify(forest) is Outcome.FLOUNDERS


def test_finitely_failed_subsidiary_lets_negation_succeed():
    prog = parse_program("p :- \\+ q, r.\nq :- s.\nr.\n")
    forest = run(prog, q("p"), 100)
    n1 = forest.nodes[forest.main.nodes[1]]
    (edge, child), = n1.children
    assert edge.kind is EdgeKind.NEG_SUCCEED
    assert [str(l) for l in forest.nodes[child].goal] == ["r"]
    assert classify(forest) is Outcome.SUCCEEDS


def test_no_matching_clause_gives_failure_leaf():
    forest = run(parse_program("p(a)."), q("p(b)"), 10)
    (edge, leaf), = forest.nodes[forest.root].children
    assert edge.kind is EdgeKind.NO_MATCH
    assert forest.nodes[leaf].mark is Mark.FAILURE
    assert classify(forest) is Outcome.FAILS


def test_main_tree_stops_at_first_success_but_records_it():
    forest = run(parse_program("q.\nq :- q."), q("q"), 100)
    assert classify(forest) is Outcome.SUCCEEDS
    assert not forest.main.exhausted
    # the success leaf of the main tree is not a LAST node
    assert forest.nodes[forest.main.success_leaves[0]].mark is Mark.SUCCESS


def test_expand_follows_depth_first_order(p2):
    forest = DerivationForest(p2, q("p"), 100)
    root = forest.select()
    assert str(root.id) == "N0"
    expand(forest, root.id)
    nxt = forest.select()
    with pytest.raises(ValueError):
        expand(forest, root.id)
    expand(forest, nxt.id)
    assert str(forest.select().id) == "N2"


def test_expand_raises_when_budget_spent(abnormal):
    forest = DerivationForest(abnormal, q("a"), 2)
    forest.step()
    forest.step()
    with pytest.raises(BudgetExhausted):
        forest.step()
    assert forest.truncated


def test_budget_must_be_positive(p2):
    with pytest.raises(ValueError):
        DerivationForest(p2, q("p"), 0)


# -- run / classify -----------------------------------------------------------


def test_run_p2_completes_and_fails(p2):
    forest = run(p2, q("p"), 100)
    assert forest.complete
    assert len(forest.trees) == 2
    assert classify(forest) is Outcome.FAILS


def test_run_p1_is_truncated(p1):
    forest = run(p1, q("p(a)"), 50)
    assert forest.budget_spent == 50
    assert classify(forest) is Outcome.UNKNOWN


def test_abnormal_program_nests_forever(abnormal):
    forest = run(abnormal, q("a"), 50)
    assert forest.truncated
    assert len(forest.trees) == 26
    assert all(str(forest.nodes[t.root].goal[0]) == "a" for t in forest.trees)


def test_classify_single_fact():
    assert classify(run(parse_program("q."), q("q"), 10)) is Outcome.SUCCEEDS


@pytest.mark.parametrize("budget", [1, 2, 3])
def test_p1_small_budget_is_unknown(p1, budget):
    # the P1 forest is never decided, so every budget leaves it unknown
    assert classify(run(p1, q("p(a)"), budget)) is Outcome.UNKNOWN


def test_undetermined_when_subsidiary_closes_undecided(p2):
    # A finite run cannot produce case 2b.iv on its own, so drive the state by hand:
    # a subsidiary tree that completed through its own LAST negation node.
    forest = DerivationForest(p2, q("p"), 100)
    forest.step()  # N0
    forest.step()  # N1 spawns T1
    sub = forest.trees[1]
    sub.frontier.clear()
    sub.last_node = sub.root
    forest.nodes[sub.root].mark = Mark.LAST
    assert forest.select() is None
    assert forest.nodes[forest.main.nodes[1]].mark is Mark.LAST
    assert forest.complete
    assert classify(forest) is Outcome.UNDETERMINED


# -- derivations ----------------------------------------------------------------


def path_names(path):
    return [str(s.node) for s in path]


def test_derivations_of_single_fact():
    paths = list(derivations(run(parse_program("q."), q("q"), 10)))
    assert len(paths) == 1 and len(paths[0]) == 2
    assert not paths[0][-1].goal


def test_derivations_of_p2(p2):
    paths = [path_names(p) for p in derivations(run(p2, q("p"), 100))]
    assert paths == [
        ["N0", "N1", "N2", "N3"],
        ["N0", "N1", "N2", "N4"],
        ["N0", "N1", "N5"],
    ]


def test_derivations_of_p1_cross_dotted_edges(p1):
    (path,) = derivations(run(p1, q("p(a)"), 20))
    assert path_names(path)[:5] == ["N0", "N1", "N2", "N3", "N4"]
    assert [str(s.selected) for s in path[:5]] == ["p(a)", "¬p(f(a))", "p(f(a))", "¬p(f(f(a)))", "p(f(f(a)))"]


# -- invariants ---------------------------------------------------------------


@pytest.mark.parametrize("name, query, _", CORPUS_CASES)
def test_corpus_forests_are_structurally_sound(name, query, _):
    forest = run(load(name), q(query), 400)
    assert check_forest(forest) == []


@pytest.mark.parametrize("name, query, _", CORPUS_CASES)
def test_runs_are_deterministic(name, query, _):
    a = run(load(name), q(query), 300)
    b = run(load(name), q(query), 300)
    assert [str(e) for e in a.trace] == [str(e) for e in b.trace]
    assert labels(a) == labels(b)


def test_check_forest_reports_broken_ancestry(p1):
    from loomcheck.engine import AncestorList, AnnotatedLiteral, Goal

    forest = run(p1, q("p(a)"), 10)
    node = forest.nodes[forest.trees[1].root]
    node.goal = Goal.of([AnnotatedLiteral(node.goal[0].literal, AncestorList())])
    problems = check_forest(forest)
    assert any("empty ancestor list" in p for p in problems)


def test_goal_sequence_behaviour():
    from loomcheck.engine import AnnotatedLiteral, Goal
    from loomcheck.syntax import Literal

    lits = [AnnotatedLiteral(Literal(q(x))) for x in ("a", "b", "c")]
    g = Goal.of(lits)
    assert len(g) == 3 and list(g) == lits
    assert g[1:] is g.rest and list(g[1:]) == lits[1:]
    assert g[-1] == lits[2]
    assert list(g[::2]) == lits[::2]
    assert Goal.of(lits[1:], Goal()) == g[1:]
    with pytest.raises(IndexError):
        g[3]


def test_carried_literals_are_substituted_when_goal_variables_bind():
    prog = parse_program("p :- q(X), r(X).\nq(a).\nr(a).\n")
    forest = run(prog, q("p"), 100)
    n = {str(k): v for k, v in forest.nodes.items()}
    assert [str(l) for l in n["N2"].goal] == ["r(a)"]
    assert classify(forest) is Outcome.SUCCEEDS
