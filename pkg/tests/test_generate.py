from mucut.calculus import rule_in_system
from mucut.formula import SystemId
from mucut.generate import iter_orders, mall_cut_trees, mall_linkings, normal_forms, random_proofs
from mucut.proof import check_proofgraph, proof_equal
from mucut.reduction import check_tree, enumerate_redexes, view
from oracles import SEED


def test_random_proofs_are_proofs():
    for system in (SystemId.MuLKBox, SystemId.MuLLBox, SystemId.MuLK):
        for p in random_proofs(system, 15, seed=SEED, max_depth=5):
            assert check_proofgraph(p) == []
            assert all(rule_in_system(n.app.rule, system) for n in p.nodes.values())


def test_random_proofs_are_seeded():
    a = random_proofs(SystemId.MuLKBox, 5, seed=SEED + 1)
    b = random_proofs(SystemId.MuLKBox, 5, seed=SEED + 1)
    assert all(proof_equal(x, y) for x, y in zip(a, b))


def test_mall_trees():
    trees = mall_cut_trees(10, seed=SEED)
    assert len(trees) == 10
    for t in trees:
        assert 1 <= len(enumerate_redexes(t)) <= 4
        assert check_tree(t) == []


def test_normal_forms_agree_with_orders():
    for t in mall_cut_trees(4, seed=SEED + 7, max_redexes=3):
        forms, steps = normal_forms(t)
        assert steps > 0
        seen = {mall_linkings(nf) for _, nf in iter_orders(t, limit=50)}
        assert seen <= forms
        for _, nf in iter_orders(t, limit=5):
            assert view(nf).conclusion == view(t).conclusion
