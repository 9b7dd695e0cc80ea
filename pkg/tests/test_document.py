import pytest
from hypothesis import given, seed, settings, strategies as st

from mucut.corpus import apply_double, example_corpus
from mucut.document import parse_document, print_graph, print_prefix
from mucut.errors import ParseError, SemanticError
from mucut.formula import SystemId
from mucut.generate import random_proofs
from mucut.multicut import init_reduction
from mucut.proof import proof_equal, prefix_suspensions, unfold
from mucut.translate import circ_proof, lin_proof
from oracles import SEED


def _roundtrip(p):
    text = print_graph(p)
    q = parse_document(text).to_graph()
    assert proof_equal(p, q)
    assert print_graph(q) == text


def test_corpus_roundtrip():
    for p in example_corpus().values():
        _roundtrip(p)
        _roundtrip(lin_proof(p))
    _roundtrip(init_reduction(lin_proof(apply_double(2))))


def test_modal_roundtrip():
    _roundtrip(circ_proof(lin_proof(example_corpus()["example_circular"])))


@seed(SEED)
@settings(max_examples=20)
@given(st.integers(0, 10 ** 6))
def test_random_roundtrip(k):
    for p in random_proofs(SystemId.MuLKBox, 2, seed=k, max_depth=5):
        _roundtrip(p)


def test_prefix_document():
    p = example_corpus()["double"]
    t = unfold(p, 3)
    doc = parse_document(print_prefix(t, p.system, p.name, p.abbrevs))
    assert doc.graph is None and doc.prefix is not None
    assert len(prefix_suspensions(doc.prefix)) == len(prefix_suspensions(t))
    with pytest.raises(SemanticError):
        doc.to_graph()


def test_comments_and_whitespace():
    text = print_graph(example_corpus()["pi_inf"])
    noisy = "# leading comment\n\n" + text.replace("\n", "   # trailing\n", 1)
    assert proof_equal(parse_document(noisy).to_graph(), parse_document(text).to_graph())


def test_errors():
    with pytest.raises(ParseError):
        parse_document("")
    with pytest.raises(ParseError):
        parse_document("system MuLK\nroot n0\nn0: |- a /\\ by ax\n")
    with pytest.raises(SemanticError):
        parse_document("system MuLK\nroot n0\nn0: |- a by nosuchrule\n")
    good = print_graph(example_corpus()["pi_inf"])
    with pytest.raises(SemanticError):
        parse_document(good.replace("back n", "back zz", 1))
