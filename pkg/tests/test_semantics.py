import pytest

from hogram.errors import NotAWordGrammar
from hogram.semantics import (
    Tree,
    enumerate_trees,
    enumerate_trees_report,
    format_word,
    frontier_slice,
    le_epsilon_slice,
    leaves,
    reduce_step,
    remeps,
    tree_of_term,
    word_language_slice,
)
from hogram.syntax import parse_term
from hogram.terms import NT, show

from .helpers import G, words, ww_language

E_ONLY = "%terminal e 0\n%nonterminal S o\n%start S\nS = e.\n"


def T(node, *kids):
    return Tree(node, tuple(kids))


def test_reduce_start(g1):
    assert {show(t) for t in reduce_step(g1, NT("S"))} == {"F a", "F b"}


def test_reduce_three_rules(g1):
    out = {show(t) for t in reduce_step(g1, parse_term("F b", g1))}
    assert out == {"b (b e)", "F (A b)", "F (B b)"}


def test_values_are_normal(g2):
    assert reduce_step(g2, parse_term("br a e", g2)) == set()


def test_reduce_under_terminal(g2):
    out = {show(t) for t in reduce_step(g2, parse_term("br (F a) e", g2))}
    assert out == {"br (br a a) e", "br (F (br a a)) e", "br (F (br b a)) e"}


def test_enumerate_trivial():
    assert enumerate_trees(G(E_ONLY), 1) == {T("e")}


def test_enumerate_g1_reaches_abab(g1):
    target = T("a", T("b", T("a", T("b", T("e")))))
    # S -> F b -> F (A b) -> A b (A b e) -> a (b (A b e)) -> a (b (a (b e)))
    assert target not in enumerate_trees(g1, 4)
    assert target in enumerate_trees(g1, 5)
    assert target in enumerate_trees(g1, 6)


def test_enumerate_g2(g2):
    assert T("br", T("a"), T("a")) in enumerate_trees(g2, 4)


def test_enumerate_monotone_on_fixture(g1):
    prev = frozenset()
    for b in range(10):
        cur = enumerate_trees(g1, b)
        assert prev <= cur
        prev = cur


def test_leftmost_and_full_strategies_agree(g1, g2):
    for g in (g1, g2):
        for b in range(8):
            assert enumerate_trees(g, b) == enumerate_trees(g, b, strategy="full")


def test_size_cap_flags_truncation(g1):
    rep = enumerate_trees_report(g1, 10, size_cap=5)
    assert rep.truncated


def test_leaves():
    assert leaves(T("e")) == ("e",)
    p = T("br", T("br", T("a"), T("e")), T("br", T("b"), T("e")))
    assert leaves(p) == ("a", "e", "b", "e")
    assert leaves(T("a", T("b", T("e")))) == ("e",)


def test_tree_printing(g2):
    p = T("br", T("br", T("a"), T("e")), T("br", T("b"), T("e")))
    assert str(p) == "br (br a e) (br b e)"
    assert tree_of_term(parse_term(str(p), g2)) == p


def test_remeps():
    assert remeps(("a", "e", "b", "e")) == ("a", "b")
    assert remeps(("e", "e")) == ()
    assert remeps(("a", "b")) == ("a", "b")


def test_word_slice_g1(g1):
    expected = {("a", "a"), ("b", "b"), ("a", "a", "a", "a"), ("a", "b", "a", "b"),
                ("b", "a", "b", "a"), ("b", "b", "b", "b")}
    assert word_language_slice(g1, 30, 4) == expected == ww_language(2)


def test_word_slice_trivial():
    assert word_language_slice(G(E_ONLY), 3) == {()}


def test_word_slice_rejects_trees(g2):
    with pytest.raises(NotAWordGrammar):
        word_language_slice(g2, 4)


def test_frontier_g2(g2):
    assert ("a", "a") in frontier_slice(g2, 4)


def test_le_epsilon_trivial():
    g = G(E_ONLY)
    assert frontier_slice(g, 3) == {("e",)}
    assert le_epsilon_slice(g, 3) == {()}


def test_frontier_g3(g3):
    # S -> F a -> br a (br a e)
    assert ("a", "a", "e") in frontier_slice(g3, 6)


def test_format_word():
    assert format_word(()) == "ε"
    assert format_word(("a", "b")) == "a b"


def test_machine_matches_tree_enumeration(g1, g2, g3):
    """The frontier machine and plain tree enumeration agree on small budgets."""
    for g in (g2, g3):
        for b in range(9):
            by_trees = {leaves(p) for p in enumerate_trees(g, b)}
            assert frontier_slice(g, b) == by_trees
    for b in range(9):
        chains = set()
        for p in enumerate_trees(g1, b):
            w = []
            while p.children:
                w.append(p.node)
                p = p.children[0]
            chains.add(tuple(w))
        assert word_language_slice(g1, b) == chains


def test_g1_against_g2(g1, g2):
    assert word_language_slice(g1, 60, 6) == le_epsilon_slice(g2, 60, 6) == ww_language(3)


def test_words_helper():
    assert words("ε", "a b") == {(), ("a", "b")}
