import pytest
from hypothesis import given, seed, strategies as st

from mucut.calculus import Sequent, instantiate
from mucut.corpus import example_circular, numeral
from mucut.errors import PositionsNotInOnePremise
from mucut.formula import Atom, SystemId
from mucut.multicut import Mcut, from_cut_tree, identity_mcut, init_reduction, mcut_wellformed, restrict
from mucut.proof import GraphBuilder, Suspension, TreeNode, check_proofgraph, proof_equal
from oracles import SEED

A, B, C, D = (Atom(x) for x in "ABCD".lower())


def three_premise_mcut() -> Mcut:
    prem = (Sequent((), (A, B)), Sequent((B,), (C,)), Sequent((C,), (D,)))
    iota = ((("R", 0), (0, "R", 0)), (("R", 1), (2, "R", 0)))
    ppr = {frozenset({(0, "R", 1), (1, "L", 0)}), frozenset({(1, "R", 0), (2, "L", 0)})}
    return Mcut(prem, Sequent((), (A, D)), iota, ppr)


def test_wellformed_examples():
    assert mcut_wellformed(three_premise_mcut()) == []
    assert mcut_wellformed(identity_mcut(Sequent((A,), (B,)))) == []
    prem = (Sequent((A,), (B,)), Sequent((B,), (C,)), Sequent((C,), (A,)))
    ppr = {frozenset({(0, "R", 0), (1, "L", 0)}), frozenset({(1, "R", 0), (2, "L", 0)}),
           frozenset({(2, "R", 0), (0, "L", 0)})}
    kinds = {d.kind for d in mcut_wellformed(Mcut(prem, Sequent((), ()), (), ppr))}
    assert "PprCyclic" in kinds


def test_wellformed_catches_bad_iota():
    m = three_premise_mcut()
    bad = Mcut(m.premises, Sequent((), (A, C)), m.iota, m.ppr)
    assert "IotaFormulaMismatch" in {d.kind for d in mcut_wellformed(bad)}


def _cut(left, right, formula, split):
    concl_l = left.conclusion if isinstance(left, Suspension) else left.app.conclusion
    concl_r = right.conclusion if isinstance(right, Suspension) else right.app.conclusion
    ante = list(concl_l.ante) + list(concl_r.ante[:-1])
    succ = list(concl_l.succ[1:]) + list(concl_r.succ)
    app = instantiate("cut", Sequent(tuple(ante), tuple(succ)), formula=formula, split=split)
    assert app.premises == (concl_l, concl_r)
    return TreeNode(app, (left, right))


def test_single_cut_flattening():
    t = _cut(Suspension(Sequent((), (B, A))), Suspension(Sequent((B,), (C,))), B, (0, 1))
    m = from_cut_tree(t)
    assert m.arity == 2 and m.conclusion == Sequent((), (A, C))
    assert mcut_wellformed(m) == []


def test_nested_cuts_give_three_premise_mcut():
    s0 = Suspension(Sequent((), (B, A)))
    s1 = Suspension(Sequent((B,), (C,)))
    s2 = Suspension(Sequent((C,), (D,)))
    inner = _cut(s0, s1, B, (0, 1))              # |- A, C
    inner = TreeNode(instantiate("ex", Sequent((), (C, A)), perm=((), (1, 0))), (inner,))
    t = _cut(inner, s2, C, (0, 1))               # |- A, D
    m = from_cut_tree(t)
    assert m.arity == 2   # the exchange hides the inner cut
    leaf = TreeNode(instantiate("cut", Sequent((), (A, C)), formula=B, split=(0, 1)), (s0, s1))
    assert from_cut_tree(leaf).arity == 2
    assert from_cut_tree(s0).arity == 1


def test_restrict_examples():
    m = three_premise_mcut()
    assert restrict(m, {(0, "R", 1)}) == {1, 2}
    assert restrict(m, {(0, "R", 0)}) == set()
    assert restrict(m, set()) == set()
    assert restrict(m, {(1, "L", 0)}, exclude_self=False) == {0, 1}
    with pytest.raises(PositionsNotInOnePremise):
        restrict(m, {(0, "R", 0), (1, "L", 0)})


def test_init_reduction_examples():
    n = numeral(2)
    assert proof_equal(init_reduction(n), n)
    q = init_reduction(example_circular())
    root = q.nodes[q.root]
    assert root.app.rule == "mcut" and root.app.params.mcut.arity == 2
    assert check_proofgraph(q) == []
    # two stacked cuts: the upper one stays a cut
    gb = GraphBuilder(SystemId.LK)
    a = Atom("a")
    l, r = gb.apply(gb.start(Sequent((a,), (a,))), "cut", formula=a, split=(0, 1))
    gb.apply(l, "ax")
    l2, r2 = gb.apply(r, "cut", formula=a, split=(0, 1))
    gb.apply(l2, "ax")
    gb.apply(r2, "ax")
    q = init_reduction(gb.build())
    rules = sorted(node.app.rule for node in q.nodes.values())
    assert rules.count("mcut") == 1 and rules.count("cut") == 1
    assert check_proofgraph(q) == []


@seed(SEED)
@given(st.integers(2, 6), st.data())
def test_bracketing_does_not_matter(n, data):
    atoms = [Atom(f"p{i}") for i in range(n + 1)]
    leaves = [Suspension(Sequent((atoms[i],), (atoms[i + 1],))) for i in range(n)]
    items = [(leaf, i, i + 1) for i, leaf in enumerate(leaves)]
    while len(items) > 1:
        k = data.draw(st.integers(0, len(items) - 2))
        (l, i, j), (r, _, h) = items[k], items[k + 1]
        items[k:k + 2] = [(_cut(l, r, atoms[j], (0, 1)), i, h)]
    m = from_cut_tree(items[0][0])
    assert mcut_wellformed(m) == []
    assert m.arity == n
    links = {tuple(sorted(l)) for l in m.ppr}
    assert links == {((i, "R", 0), (i + 1, "L", 0)) for i in range(n - 1)}
