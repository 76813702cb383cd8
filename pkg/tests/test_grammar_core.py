import pytest

from hogram.errors import (
    DuplicateDeclaration,
    GrammarSyntaxError,
    InvalidGrammar,
    SortMismatch,
    UnboundSymbol,
    UnknownSymbol,
)
from hogram.grammar import is_word_grammar, sort_check, validate
from hogram.sorts import O, arrow, sort_arity, sort_order
from hogram.syntax import normalize_text, parse_grammar, parse_sort, print_grammar
from hogram.terms import App, Tm, Var, lam
from hogram.verify import FIXTURE_NAMES, fixture, fixture_text

from .helpers import G

OO = arrow(O, O)


@pytest.mark.parametrize(
    "text, order",
    [("o", 0), ("(o -> o) -> o", 2), ("o -> o -> o", 1), ("((o -> o) -> o) -> o", 3)],
)
def test_sort_order(text, order):
    assert sort_order(parse_sort(text)) == order


@pytest.mark.parametrize("text, n", [("o", 0), ("o -> o -> o", 2), ("(o -> o) -> o", 1)])
def test_sort_arity(text, n):
    assert sort_arity(parse_sort(text)) == n


def test_arrows_associate_right():
    assert parse_sort("o -> o -> o") == arrow(O, arrow(O, O))
    assert parse_sort("(o -> o) -> o") == arrow(OO, O)


def test_sort_check_application():
    assert sort_check({"f": OO, "x": O}, App(Var("f"), Var("x"))) == O


def test_sort_check_abstraction():
    body = App(Tm("a"), App(Var("f"), Var("x")))
    t = lam(["f", "x"], body, [OO, O])
    assert sort_check({}, t, {"a": 1}) == arrow(OO, O, O)


def test_sort_check_self_application_fails():
    with pytest.raises(SortMismatch):
        sort_check({"x": O}, App(Var("x"), Var("x")))


def test_sort_check_unbound():
    with pytest.raises(UnboundSymbol):
        sort_check({}, Var("y"))


def test_validate_examples(g1, g2):
    r1, r2 = validate(g1), validate(g2)
    assert r1.ok and r1.order == 2
    assert r2.ok and r2.order == 1


def test_start_not_base():
    g = G("%terminal e 0\n%nonterminal S o -> o\n%start S\nS x = x.\n", check=False)
    assert validate(g).codes == ["StartNotBase"]
    with pytest.raises(InvalidGrammar):
        G("%terminal e 0\n%nonterminal S o -> o\n%start S\nS x = x.\n")


def test_non_base_body():
    text = "%terminal a 1\n%terminal e 0\n%nonterminal S o\n%start S\nS = a.\n"
    assert "NonBaseRuleBody" in validate(G(text, check=False)).codes


@pytest.mark.parametrize(
    "text, code",
    [
        ("%terminal e 1\n%nonterminal S o\n%start S\n", "BadEndMarker"),
        ("%terminal br 1\n%terminal e 0\n%nonterminal S o\n%start S\n", "BadBranchArity"),
        ("%terminal e 0\n%nonterminal S o\n%nonterminal F o -> o\n%start S\nF = e.\n", "ArityMismatch"),
        ("%terminal e 0\n%nonterminal S o\n%nonterminal F o -> o -> o\n%start S\nF x x = x.\n", "DuplicateParameter"),
        ("%terminal a 1\n%terminal e 0\n%nonterminal S o\n%start S\nS = a a.\n", "SortMismatch"),
    ],
)
def test_validation_codes(text, code):
    assert code in validate(G(text, check=False)).codes


def test_is_word_grammar(g1, g2):
    assert is_word_grammar(g1)
    assert not is_word_grammar(g2)
    assert is_word_grammar(G("%terminal e 0\n%nonterminal S o\n%start S\nS = e.\n"))


def test_parse_g1(g1):
    assert dict(g1.terminals) == {"a": 1, "b": 1, "e": 0}
    assert g1.nonterminals["F"] == arrow(OO, O)
    assert g1.start == "S"
    assert len(g1.rules) == 7
    texts = {str(r) for r in g1.rules}
    assert "F f = F (B f)." in texts and "A f x = a (f x)." in texts


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_round_trip_fixtures(name):
    g = fixture(name)
    printed = print_grammar(g)
    assert parse_grammar(printed) == g
    assert normalize_text(fixture_text(name)) == printed


def test_printing_is_sorted_and_stable(g1):
    lines = [ln for ln in print_grammar(g1).splitlines() if "=" in ln]
    assert [ln.split()[0] for ln in lines] == sorted(ln.split()[0] for ln in lines)


def test_syntax_error_position():
    with pytest.raises(GrammarSyntaxError) as info:
        G("%terminal e 0\n%nonterminal S o\n%start S\nS = (e.\n")
    assert "4" in str(info.value)


def test_duplicate_declaration():
    with pytest.raises(DuplicateDeclaration):
        G("%terminal e 0\n%terminal e 0\n%nonterminal S o\n%start S\n")


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        G("%terminal e 0\n%nonterminal S o\n%start S\nS = Q.\n")


def test_generated_names_need_header():
    body = "%terminal e 0\n%nonterminal $S o\n%start $S\n$S = e.\n"
    with pytest.raises(GrammarSyntaxError):
        G(body)
    assert G("%generated\n" + body).start == "$S"
