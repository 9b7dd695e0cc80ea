from hypothesis import given, seed, strategies as st

from mucut.formula import (Atom, Bang, Box, ClTrue, Diamond, Mu, Neg, Nu, Or, Polarity, Quest, SystemId,
                           Var, closure, formula_le, is_formula, minimum, polarity, unfold_fixpoint)
from mucut.errors import NotAFixpoint
from mucut.syntax import parse_formula
from oracles import SEED, naive_closure

import pytest

NAT = Mu("X", Or(ClTrue, Var("X")))
F = Nu("X", Diamond(Var("X")))


def test_polarity_examples():
    x = Var("X")
    assert polarity(x, "X") is Polarity.PositiveOnly
    assert polarity(Neg(x), "X") is Polarity.NegativeOccurs
    assert polarity(Neg(Neg(x)), "X") is Polarity.PositiveOnly
    assert polarity(Mu("Y", Or(ClTrue, Var("Y"))), "X") is Polarity.Absent


def test_is_formula_examples():
    assert is_formula(NAT, SystemId.MuLK)
    assert not is_formula(Mu("X", Neg(Var("X"))), SystemId.MuLK)
    assert not is_formula(Bang(Mu("X", Quest(Var("X")))), SystemId.MuMALL)


def test_unfold_examples():
    assert unfold_fixpoint(NAT) == Or(ClTrue, NAT)
    assert unfold_fixpoint(F) == Diamond(F)
    assert unfold_fixpoint(Mu("X", Atom("a"))) == Atom("a")
    with pytest.raises(NotAFixpoint):
        unfold_fixpoint(Atom("a"))


def test_closure_examples():
    assert closure(NAT) == {NAT, Or(ClTrue, NAT), ClTrue}
    assert closure(Atom("a")) == {Atom("a")}
    assert closure(F) == {F, Diamond(F)}


def test_alpha_equivalence():
    assert Mu("X", Var("X")) == Mu("Y", Var("Y"))
    assert hash(Nu("X", Box(Var("X")))) == hash(Nu("Z", Box(Var("Z"))))
    assert Mu("X", Var("X")) != Nu("X", Var("X"))


def test_subterm_order():
    assert formula_le(F, Diamond(F))
    assert not formula_le(Diamond(F), F)
    assert minimum([Diamond(F), F]) == F
    assert minimum([Atom("a"), Atom("b")]) is None


# -- random closed formulas ------------------------------------------------------------

def _formulas(depth: int, bound: tuple[str, ...] = ()):
    leaves = [st.just(Atom("a")), st.just(Atom("b")), st.just(ClTrue)]
    if bound:
        leaves.append(st.sampled_from([Var(x) for x in bound]))
    base = st.one_of(*leaves)
    if depth == 0:
        return base
    sub = _formulas(depth - 1, bound)
    x = f"X{len(bound)}"
    inner = _formulas(depth - 1, bound + (x,))
    return st.one_of(
        base,
        st.builds(Or, sub, sub),
        st.builds(Box, sub),
        st.builds(Diamond, sub),
        inner.map(lambda b: Mu(x, b)),
        inner.map(lambda b: Nu(x, b)),
    )


formulas = _formulas(3)


@seed(SEED)
@given(formulas)
def test_closure_agrees_with_naive_fixpoint(f):
    assert closure(f) == naive_closure(f)


@seed(SEED)
@given(formulas)
def test_print_parse_roundtrip(f):
    assert parse_formula(str(f)) == f


@seed(SEED)
@given(formulas)
def test_unfolding_stays_in_closure(f):
    cl = closure(f)
    for g in cl:
        if g.is_fixpoint():
            assert unfold_fixpoint(g) in cl
