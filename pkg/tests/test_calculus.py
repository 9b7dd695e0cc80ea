import pytest
from hypothesis import given, seed, strategies as st

from mucut.calculus import (RULES, Sequent, adjacent_exchanges, ancestor_trace, derived_exchange, instantiate,
                            rule_in_system)
from mucut.errors import BadSplit, MucutError, ShapeMismatch, UnknownPosition
from mucut.formula import Atom, Bang, Box, Diamond, Nu, Quest, SystemId, Var
from mucut.generate import classical_pool, linear_modal_pool
from oracles import SEED

a, b, c, d, e = (Atom(x) for x in "abcde")
F = Nu("X", Diamond(Var("X")))


def test_dia_promotion_unwraps_everything():
    app = instantiate("dia_p", Sequent((Diamond(F),), (Diamond(F),)), ("L", 0))
    assert app.premises == (Sequent((F,), (F,)),)


def test_nu_right_unfolds():
    app = instantiate("nu_r", Sequent((), (F,)), ("R", 0))
    assert app.premises == (Sequent((), (Diamond(F),)),)


def test_modal_bang_promotion_keeps_context():
    concl = Sequent((Box(a), Bang(b)), (Bang(c), Quest(d), Diamond(e)))
    app = instantiate("oc_p_dia", concl, ("R", 0))
    assert app.premises == (Sequent((Box(a), Bang(b)), (c, Quest(d), Diamond(e))),)


def test_plain_promotion_rejects_bad_context():
    with pytest.raises(ShapeMismatch):
        instantiate("oc_p", Sequent((a,), (Bang(c),)), ("R", 0))
    with pytest.raises(ShapeMismatch):
        instantiate("oc_p", Sequent((Box(a),), (Bang(c),)), ("R", 0))


def test_identity_exchange_is_identity():
    s = Sequent((a, b), (c,))
    app = derived_exchange(s, ((0, 1), (0,)))
    assert {p: ancestor_trace(app, p) for p in s.positions()} == {p: {(0, p)} for p in s.positions()}


def test_adjacent_decompositions():
    swap = derived_exchange(Sequent((), (a, b)), ((), (1, 0)))
    steps = adjacent_exchanges(swap)
    assert [s.rule for s in steps] == ["ex_r"]
    rev = derived_exchange(Sequent((a, b, c), ()), ((2, 1, 0), ()))
    steps = adjacent_exchanges(rev)
    assert [s.rule for s in steps] == ["ex_l"] * 3
    assert steps[-1].premises[0] == rev.premises[0]


def test_contraction_ancestors():
    app = instantiate("c_l", Sequent((F,), ()), ("L", 0))
    assert ancestor_trace(app, ("L", 0)) == {(0, ("L", 0)), (0, ("L", 1))}


def test_weakening_has_no_ancestor():
    app = instantiate("w_r", Sequent((), (a, F)), ("R", 1))
    assert ancestor_trace(app, ("R", 1)) == frozenset()
    with pytest.raises(UnknownPosition):
        ancestor_trace(app, ("R", 5))


def test_cut_context_goes_to_its_premise():
    app = instantiate("cut", Sequent((a,), (c,)), formula=b, split=(0, 1))
    assert app.premises == (Sequent((a,), (b,)), Sequent((b,), (c,)))
    assert ancestor_trace(app, ("L", 0)) == {(0, ("L", 0))}
    assert ancestor_trace(app, ("R", 0)) == {(1, ("R", 0))}
    with pytest.raises(BadSplit):
        instantiate("cut", Sequent((a,), (c,)), formula=b, split=(0,))


def test_implication_left_premises():
    from mucut.formula import Impl
    app = instantiate("impl_l", Sequent((c, Impl(a, b)), (d,)), ("L", 1), split=(1, 0))
    assert app.premises == (Sequent((b,), (d,)), Sequent((c,), (a,)))


# -- properties over random instances --------------------------------------------------

def _sequents(pool):
    fs = st.sampled_from(pool)
    return st.builds(lambda x, y: Sequent(tuple(x), tuple(y)),
                     st.lists(fs, max_size=2), st.lists(fs, min_size=1, max_size=2))


@seed(SEED)
@given(_sequents(classical_pool() + linear_modal_pool()), st.sampled_from(sorted(RULES)), st.data())
def test_instances_are_well_formed(seq, rule, data):
    if rule in ("mcut", "ex", "cut"):
        return
    if not seq.positions():
        return
    p = data.draw(st.sampled_from(seq.positions()))
    split = data.draw(st.lists(st.integers(0, 1), min_size=len(seq) - 1, max_size=len(seq) - 1))
    try:
        app = instantiate(rule, seq, p, split=tuple(split))
    except MucutError:
        return
    assert len(app.premises) == RULES[rule].arity
    desc = app.descendants()
    # every premise position descends from exactly one conclusion position,
    # except the active formulas of a rule with no conclusion counterpart
    for k, prem in enumerate(app.premises):
        for q in prem.positions():
            assert (k, q) in desc or rule in ("cut",)
    # context formulas are copied unchanged
    for cpos, targets in app.ancestors.items():
        if cpos in app.principal or rule in ("c_l", "c_r", "wn_c", "oc_c", "dia_c", "box_c"):
            continue
        if rule in ("box_p", "dia_p"):
            continue
        for k, q in targets:
            assert app.premises[k].at(q) == seq.at(cpos)


@seed(SEED)
@given(st.permutations(range(4)), st.permutations(range(3)))
def test_exchange_decomposition_composes(pl, pr):
    seq = Sequent((Atom("a"), Atom("b"), Atom("c"), Atom("d")), (Atom("x"), Atom("y"), Atom("z")))
    ex = derived_exchange(seq, (tuple(pl), tuple(pr)))
    top = seq
    for step in adjacent_exchanges(ex):
        assert step.conclusion == top
        top = step.premises[0]
    assert top == ex.premises[0]


def test_system_membership():
    assert rule_in_system("box_p", SystemId.MuLKBox)
    assert not rule_in_system("wn_d", SystemId.MuLK)
    assert rule_in_system("oc_p_dia", SystemId.MuLLBox)
