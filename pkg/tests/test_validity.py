import pytest
from hypothesis import given, seed, settings, strategies as st

from mucut.buchi import BudgetExceeded
from mucut.corpus import double, numeral, omega_numeral, example_corpus, inconsistent_loop
from mucut.errors import NotPeriodic
from mucut.formula import SystemId
from mucut.generate import random_proofs
from mucut.proof import enumerate_simple_cycles
from mucut.validity import Thread, quick_cycle_check, thread_ok, threads_of_cycle, validity_check
from oracles import SEED, branch_has_valid_thread, lasso_counterexample


def _loop_ok(p):
    (cyc,) = enumerate_simple_cycles(p)
    return any(thread_ok(t) for t in threads_of_cycle(p, cyc))


def test_thread_examples():
    assert _loop_ok(double())
    assert not _loop_ok(omega_numeral("mu"))
    assert _loop_ok(omega_numeral("nu"))
    with pytest.raises(NotPeriodic):
        thread_ok(Thread((), ()))


def test_double_thread_is_on_the_antecedent():
    (cyc,) = enumerate_simple_cycles(double())
    good = [t for t in threads_of_cycle(double(), cyc) if thread_ok(t)]
    assert good and all(thread_ok(t, "antecedent") for t in good)


@pytest.mark.parametrize("name,expected", [
    ("example_circular", True), ("inconsistent_loop", False), ("pi_inf", False),
    ("conat_inf", True), ("double", True), ("numeral_2", True)])
def test_corpus_verdicts(name, expected):
    p = example_corpus()[name]
    v = validity_check(p)
    assert v.valid is expected
    assert (lasso_counterexample(p) is None) is expected


def test_invalid_witness_is_a_bad_branch():
    for p in (inconsistent_loop(), omega_numeral("mu")):
        v = validity_check(p)
        assert not v.valid and v.loop
        assert not branch_has_valid_thread(p, list(v.loop_edges))


def test_pi_inf_witness_is_the_single_loop():
    p = omega_numeral("mu")
    v = validity_check(p)
    assert sorted(v.loop) == sorted(enumerate_simple_cycles(p)[0])


def test_quick_check():
    assert quick_cycle_check(double()) == "Valid"
    assert quick_cycle_check(omega_numeral("mu")) == "Unknown"
    assert quick_cycle_check(numeral(4)) == "Valid"


@pytest.mark.parametrize("method", ["rank", "ramsey"])
def test_methods_on_corpus(method):
    for name, p in example_corpus().items():
        assert validity_check(p, method=method, budget=50000).valid == validity_check(p).valid, name


def test_random_proofs_against_lasso_oracle():
    proofs = random_proofs(SystemId.MuLKBox, 60, seed=SEED, max_depth=5)
    proofs += random_proofs(SystemId.MuLLBox, 40, seed=SEED + 1, max_depth=5)
    for p in proofs:
        v = validity_check(p)
        if v.valid:
            assert lasso_counterexample(p, 6) is None, p.name
        else:
            assert not branch_has_valid_thread(p, list(v.loop_edges)), p.name


@seed(SEED)
@settings(max_examples=10)
@given(st.integers(0, 10 ** 6))
def test_rank_and_ramsey_agree(s):
    for p in random_proofs(SystemId.MuLKBox, 4, seed=s, max_depth=4):
        try:
            r = validity_check(p, method="rank", budget=5000)
        except BudgetExceeded:
            continue
        assert r.valid == validity_check(p, method="ramsey").valid
