import re

import pytest

from hogram.errors import RefinementSpaceTooLarge, ShapeViolation
from hogram.grammar import rule_env, sort_check, validate
from hogram.semantics import enumerate_trees, frontier_slice, le_epsilon_slice, leaves, remeps
from hogram.sorts import O, arrow
from hogram.step2 import (
    EPS,
    PLUS,
    compute_derivability,
    enumerate_tty,
    refines2,
    render2,
    transform_grammar2,
    transform_term2,
    tty_arrow,
    tty_to_sort,
)
from hogram.syntax import parse_sort, parse_term
from hogram.terms import NT, show
from hogram.verify import fixture

from .helpers import G

# Expected step-2 output for G3 in subscript notation.
STEP2_G3 = """
S′ → S_+
S′ → S_ε
S_+ → F_{+→+} a
S_+ → F_{+→+} b
A_{+→+} f_+ → br a f_+
B_{+→+} f_+ → br b f_+
F_{+→+} f_+ → br f_+ f_+
F_{+→+} f_+ → F_{+→+} (A_{+→+} f_+)
F_{+→+} f_+ → F_{+→+} (B_{+→+} f_+)
"""


def subscript_to_tool(line: str) -> str:
    def tyname(t):
        return t.replace("→", "->").replace("ε", "e").replace("+", "p").replace("∧", "^")

    line = re.sub(r"(\w)_\{([^{}]*)\}", lambda m: f"{m.group(1)}'{{{tyname(m.group(2))}}}", line)
    line = re.sub(r"(\w)_([+ε])", lambda m: f"{m.group(1)}'{{{tyname(m.group(2))}}}", line)
    line = line.replace("S′", "$S")
    lhs, rhs = line.split(" → ", 1)
    return f"{lhs} = {rhs}."


def arr(conj, res):
    return tty_arrow(conj, res)


def test_refines2():
    assert refines2(EPS, O)
    assert not refines2(arr([PLUS, arr([PLUS], PLUS)], PLUS), arrow(O, O))
    assert enumerate_tty(O) == [EPS, PLUS]


def test_enumerate_order1():
    tys = enumerate_tty(arrow(O, O))
    assert len(tys) == 8
    assert all(refines2(t, arrow(O, O)) for t in tys)


def test_cap():
    with pytest.raises(RefinementSpaceTooLarge):
        enumerate_tty(parse_sort("((o -> o) -> o) -> o"), cap=10)


def test_canonical_order():
    tys = enumerate_tty(arrow(O, O))
    assert tys[:2] == [arr([], EPS), arr([], PLUS)]
    assert EPS < PLUS < arr([], EPS)


def test_rendering():
    assert render2(arr([EPS, PLUS], PLUS)) == "e^p->p"
    assert render2(arr([], PLUS)) == "top->p"
    assert render2(arr([arr([PLUS], PLUS)], EPS)) == "(p->p)->e"


def test_tty_to_sort():
    assert tty_to_sort(EPS) == O
    assert tty_to_sort(arr([PLUS], PLUS)) == arrow(O, O)
    assert tty_to_sort(arr([EPS, PLUS], PLUS)) == arrow(O, O, O)


LOOP = "%terminal e 0\n%nonterminal S o\n%start S\nS = S.\n"
E_ONLY = "%terminal e 0\n%nonterminal S o\n%start S\nS = e.\n"


def test_derivability_loop():
    assert len(compute_derivability(G(LOOP))) == 0


def test_derivability_e():
    assert compute_derivability(G(E_ONLY)).pairs() == {("S", EPS)}


def test_derivability_g3(g3):
    table = compute_derivability(g3)
    pp = arr([PLUS], PLUS)
    assert ("A", pp) in table and ("F", pp) in table and ("S", PLUS) in table
    assert ("S", EPS) not in table


def test_term_example(g3):
    t = parse_term("br a (br f e)", g3, ["f"])
    assert {show(u) for u in transform_term2(g3, {}, {("f", PLUS)}, t, PLUS)} == {"br a f'{p}"}


def test_term_all_e(g3):
    t = parse_term("br e e", g3)
    assert {show(u) for u in transform_term2(g3, {}, set(), t, EPS)} == {"e"}
    assert transform_term2(g3, {}, set(), t, PLUS) == set()


def test_term_variant():
    g = fixture("g3_variant")
    t = parse_term("br f (br f e)", g, ["f"])
    out = {show(u) for u in transform_term2(g, {}, {("f", EPS), ("f", PLUS)}, t, PLUS)}
    assert "f'{p}" in out


def test_variant_rule():
    out = transform_grammar2(fixture("g3_variant"))
    assert "F'{e^p->p} f'{e} f'{p} = f'{p}." in {str(r) for r in out.rules}


def test_golden_step2_g3(g3):
    out = transform_grammar2(g3)
    assert {str(r) for r in out.rules} == {subscript_to_tool(ln) for ln in STEP2_G3.strip().splitlines()}
    assert out.start == "$S"


def test_e_only():
    out = transform_grammar2(G(E_ONLY))
    assert {str(r) for r in out.rules} == {"$S = S'{e}.", "$S = S'{p}.", "S'{e} = e."}


def test_loop():
    out = transform_grammar2(G(LOOP))
    assert {str(r) for r in out.rules} == {"$S = S'{e}.", "$S = S'{p}."}


def test_shape_violation(g1):
    with pytest.raises(ShapeViolation):
        transform_grammar2(g1)


def test_no_duplicate_rules():
    out = transform_grammar2(fixture("g3_variant"), prune=False)
    assert len(out.rules) == len(set(out.rules))


@pytest.mark.parametrize("name", ["g2", "g3", "g3_variant", "eps", "loop"])
def test_typing_and_order(name):
    g = fixture(name)
    out = transform_grammar2(g)
    assert validate(out).ok
    assert out.order <= max(g.order, 0)
    for r in out.rules:
        assert sort_check(rule_env(out, r), r.body, out.terminals) == O


@pytest.mark.parametrize("name", ["g2", "g3", "g3_variant", "eps"])
def test_language(name):
    g = fixture(name)
    out = transform_grammar2(g)
    want = {remeps(w) for w in frontier_slice(g, 40, 6)}
    assert le_epsilon_slice(out, 60, 6) >= want
    assert {w for w in le_epsilon_slice(out, 40, 6)} <= {remeps(w) for w in frontier_slice(g, 80, 12)}


def test_epsilon_entries_reach_e_trees():
    """Every derivable (A, e) for a base-sorted A yields some all-e tree."""
    g = fixture("g3_variant")
    table = compute_derivability(g)
    for A, tys in table.by_nt.items():
        if g.nonterminals[A] != O or EPS not in tys:
            continue
        sub = g.replace(start=A)
        assert any(set(leaves(p)) == {"e"} for p in enumerate_trees(sub, 10))


def test_output_words_have_no_inner_e():
    for name in ("g3", "g3_variant", "eps"):
        out = transform_grammar2(fixture(name))
        for w in le_epsilon_slice(out, 40, 6):
            assert "e" not in w
