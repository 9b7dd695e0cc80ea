from hypothesis import given, seed, strategies as st

from mucut.calculus import Sequent
from mucut.corpus import apply_double, double, example_circular, numeral, example_corpus
from mucut.formula import Atom, Bang, Box, ClTrue, Diamond, Formula, Mu, Or, Quest, SystemId, Tensor, Top, Var
from mucut.proof import GraphBuilder, check_proofgraph, proof_equal
from mucut.reduction import FairReducer, MNode, enumerate_redexes, view, working_tree
from mucut.translate import (TreeTranslator, assemble, circ_formula, circ_proof, lin_formula, lin_proof,
                             pullback_redex, simulate_step, sk_formula, sk_proof, translate_graph,
                             trees_equivalent)
from oracles import SEED, sk_oracle

a, b = Atom("a"), Atom("b")
R0, L0 = ("R", 0), ("L", 0)

_leaf = st.sampled_from([a, b, Top, Formula("one"), Formula("bot"), Formula("zero")])


def _grower(unary):
    def grow(children):
        un = st.sampled_from(unary).flatmap(lambda f: children.map(f))
        bi = st.tuples(st.sampled_from(["tensor", "par", "with", "plus", "limpl"]), children, children)
        return st.one_of(un, bi.map(lambda t: Formula(t[0], (t[1], t[2]))))
    return grow


linear_formulas = st.recursive(_leaf, _grower([Bang, Quest]), max_leaves=8)
modal_formulas = st.recursive(_leaf, _grower([Bang, Quest, Box, Diamond]), max_leaves=8)


def _ops(f):
    yield f.op
    for x in f.args:
        yield from _ops(x)


@seed(SEED)
@given(linear_formulas)
def test_skeleton_formula_matches_oracle(f):
    assert sk_formula(f) == sk_oracle(f)


@seed(SEED)
@given(modal_formulas)
def test_circ_formula_removes_modalities(f):
    g = circ_formula(f)
    assert not {"box", "dia"} & set(_ops(g))
    assert len(list(_ops(g))) == len(list(_ops(f)))
    assert circ_formula(g) == g


def test_formula_examples():
    assert sk_formula(Bang(Tensor(a, Quest(b)))) == Formula("and", (a, b))
    assert circ_formula(Box(Diamond(a))) == Bang(Quest(a))
    assert lin_formula(a) == Bang(a)
    assert lin_formula(Or(a, ClTrue)) == Bang(Formula("plus", (Quest(Bang(a)), Quest(Bang(Top)))))
    assert lin_formula(Mu("X", Var("X"))) == Bang(Mu("X", Quest(Bang(Var("X")))))


def _rules(p):
    return sorted(n.app.rule for n in p.nodes.values())


def _single(system, seq, steps, last):
    gb = GraphBuilder(system)
    h = gb.chain(gb.start(seq), steps)
    gb.apply(h, *last)
    return gb.build()


def test_skeleton_blocks():
    # promotion and dereliction vanish
    p = _single(SystemId.MuLL, Sequent((), (Bang(Top),)), [("oc_p", R0)], ("top_r", R0))
    assert _rules(sk_proof(p)) == ["true_r"]
    # a tensor becomes a conjunction with weakenings for the other half of the context
    gb = GraphBuilder(SystemId.MALL)
    x, y = gb.apply(gb.start(Sequent((a, b), (Tensor(a, b),))), "tensor_r", R0, split=(0, 1))
    gb.apply(x, "ax")
    gb.apply(y, "ax")
    q = sk_proof(gb.build())
    assert _rules(q) == ["and_r", "ax", "ax", "w_l", "w_l"]
    assert check_proofgraph(q) == []


def test_circ_blocks():
    p = _single(SystemId.MuLLBox, Sequent((), (Box(Top),)), [("box_p", R0)], ("top_r", R0))
    q = circ_proof(p)
    assert _rules(q) == ["oc_p", "top_r"]
    assert q.system == SystemId.MuLL
    r = _single(SystemId.MuLLBox, Sequent((Diamond(a),), (Diamond(Top),)), [("dia_p", L0)], ("top_r", R0))
    assert _rules(circ_proof(r)) == ["top_r", "wn_d", "wn_p"]


def test_lin_axiom_block():
    p = _single(SystemId.LK, Sequent((a,), (a,)), [], ("ax",))
    q = lin_proof(p)
    assert _rules(q) == ["ax", "wn_d"]
    assert q.nodes[q.root].app.conclusion == Sequent((Bang(a),), (Quest(Bang(a)),))


def test_lin_corpus_sequents():
    for p in example_corpus().values():
        q, entry = translate_graph(p, "linear")
        assert check_proofgraph(q) == []
        for n in entry.values():
            s = q.nodes[n].app.conclusion
            assert all(f.op in ("bang", "quest") for f in s.ante + s.succ)
        assert proof_equal(sk_proof(q), p)


def test_numerals_roundtrip():
    for n in range(4):
        assert proof_equal(sk_proof(lin_proof(numeral(n))), numeral(n))
    assert proof_equal(sk_proof(lin_proof(double())), double())


def _modal_trace(steps: int):
    red = FairReducer(working_tree(lin_proof(example_circular())))
    out = []
    for _ in range(steps):
        out.append(red.step())
    return out


def test_simulation_counts():
    T = TreeTranslator()
    ns = {}
    for r, old, new in _modal_trace(40):
        res = simulate_step(old, r, new, T)
        ns.setdefault(r.rules[0] if r.kind == "Commutative" else r.kind, set()).add(res.n)
        assert trees_equivalent(res.thetas[-1], T.node(new))
        assert res.phi == (0, res.n)
    assert ns["dia_p"] == {3}
    assert ns.get("Principal", {1}) == {1}
    assert ns["KeyExp"] == {1}


def test_assemble_phi_increasing():
    T = TreeTranslator()
    results = [simulate_step(old, r, new, T) for r, old, new in _modal_trace(30)]
    thetas, phi = assemble(results)
    assert phi[0] == 0 and len(phi) == len(results) + 1
    assert all(x < y for x, y in zip(phi, phi[1:]))
    assert len(thetas) == phi[-1] + 1


def test_pullback():
    T = TreeTranslator()
    found = 0
    for r, old, new in _modal_trace(20):
        for rc in enumerate_redexes(T.node(old)):
            if (rc.kind, rc.node) != (r.kind, T.path(old, r.node)):
                continue
            back = pullback_redex(old, rc, T)
            assert back.node == r.node or simulate_step(old, back, translator=T)
            found += 1
    assert found > 0


def test_circ_of_modal_step_keeps_validity_shape():
    q = circ_proof(lin_proof(apply_double(1)))
    assert check_proofgraph(q) == []
    t = working_tree(q)
    assert isinstance(view(t), MNode)
