import pytest

from hogram.errors import SortMismatch
from hogram.ext import desugar, ext_substitute
from hogram.grammar import ext_sort_check, validate
from hogram.semantics import frontier_slice, le_epsilon_slice
from hogram.sorts import O, arrow
from hogram.terms import NT, App, Tm, Var, choice, show

from .helpers import G

OO = arrow(O, O)


def test_substitute_terminal():
    assert ext_substitute({"x": [Tm("a")]}, Tm("a")) == {Tm("a")}


def test_substitute_into_argument():
    out = ext_substitute({"x": [Tm("a"), Tm("b")]}, App(Var("f"), Var("x")))
    assert {show(u) for u in out} == {"f { a | b }"}


def test_substitute_identity():
    assert ext_substitute({}, Var("x")) == {Var("x")}


def test_substitute_at_head_is_a_choice():
    out = ext_substitute({"f": [NT("A"), NT("B")]}, App(Var("f"), Tm("a")))
    assert {show(u) for u in out} == {"A a", "B a"}


def test_set_sort():
    assert ext_sort_check({}, choice([Tm("a"), Tm("b")]), {"a": 0, "b": 0}) == O


def test_set_mixed_sorts():
    with pytest.raises(SortMismatch):
        ext_sort_check({"f": OO, "g": OO}, App(Var("f"), choice([Tm("a"), Var("g")])), {"a": 0})


def test_output_rule_sort():
    body = App(App(Tm("br"), Tm("a")), App(App(Tm("br"), Var("f")), Tm("e")))
    assert ext_sort_check({"f": O}, body, {"br": 2, "a": 0, "e": 0}) == O


VARIANT = """%extended
%terminal br 2
%terminal a 0
%terminal e 0
%nonterminal S o
%nonterminal F o -> o -> o
%nonterminal G o -> o
%nonterminal A'{e->p} o -> o
%nonterminal A'{p->p} o -> o
%start S
S = F e a.
F fe fp = G { A'{e->p} fe | A'{p->p} fp }.
G x = x.
A'{e->p} x = br a x.
A'{p->p} x = br a x.
"""


def test_desugar_without_sets_is_identity():
    g = G("%extended\n%terminal e 0\n%nonterminal S o\n%start S\nS = e.\n")
    assert desugar(g).rules == g.rules
    assert not desugar(g).extended


def test_desugar_example_rule():
    g = desugar(G(VARIANT))
    assert validate(g).ok
    texts = {str(r) for r in g.rules}
    assert "F fe fp = G ($C0 fe fp)." in texts
    assert "$C0 fe fp = A'{e->p} fe." in texts
    assert "$C0 fe fp = A'{p->p} fp." in texts
    assert g.nonterminals["$C0"] == arrow(O, O, O)


def test_desugar_preserves_language():
    eg = G(VARIANT)
    g = desugar(eg)
    assert frontier_slice(eg, 10) == frontier_slice(g, 12)


NESTED = """%extended
%terminal br 2
%terminal a 0
%terminal b 0
%terminal e 0
%nonterminal S o
%nonterminal F o -> o
%start S
S = F { br { a | b } e | e }.
F x = br x x.
"""


def test_desugar_nested_sets():
    eg = G(NESTED)
    g = desugar(eg)
    assert validate(g).ok
    assert len([n for n in g.nonterminals if n.startswith("$C")]) == 2
    parts = [("a", "e"), ("b", "e"), ("e",)]
    expected = {x + y for x in parts for y in parts}
    assert frontier_slice(eg, 20) == expected
    assert frontier_slice(g, 30) == expected
