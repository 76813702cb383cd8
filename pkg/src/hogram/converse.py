"""From a tree grammar back to a word grammar with the same ε-frontier language.

Every sort ``κ`` is mapped to ``⌊κ⌋``, where ``⌊o⌋ = o -> o``: a tree becomes
a function that prepends its frontier to a continuation word.  Nullary
letters become unary, ``e`` becomes the identity ``$E``, ``br`` becomes
composition ``$Br``, and the new start applies the old one to ``e``.

For an order-0 input the composition is unfolded at each ``br s t``
occurrence into its own nonterminal (``$A0``, ``$A1``, ... in order of first
occurrence), which keeps the result at order 1.
"""

from __future__ import annotations

import warnings

from .errors import ShapeViolation
from .grammar import BRANCH, END, GENERATED_PREFIX, Grammar, Rule, ensure_valid, fresh_name, is_tree_shape
from .sorts import O, Arrow, Sort, arrow
from .terms import NT, App, Term, Tm, Var, app, spine


class PreconditionWarning(UserWarning):
    """The ε-frontier slice of the input has a word containing ``e``."""


def lift_base(s: Sort) -> Sort:
    if s == O:
        return Arrow(O, O)
    return Arrow(lift_base(s.dom), lift_base(s.cod))


def tree_to_word(g: Grammar, *, g0: bool | None = None, check_precondition: bool = False) -> Grammar:
    """The converse construction.

    ``g0`` forces (True) or suppresses (False) the order-0 variant; by
    default it is used exactly when ``g`` has order 0.  With
    ``check_precondition`` a small ε-frontier slice is inspected and a
    :class:`PreconditionWarning` is issued if some word contains ``e``.
    """
    if g.extended:
        raise ShapeViolation("desugar extended grammars before the converse construction")
    if not is_tree_shape(g):
        raise ShapeViolation("the converse construction needs br binary and every other terminal nullary")
    ensure_valid(g)
    if check_precondition:
        _warn_if_e_inside(g)
    use_g0 = g.order == 0 if g0 is None else g0
    if use_g0 and g.order > 0:
        raise ValueError("the unfolded variant applies to order-0 grammars only")

    taken = set(g.names())
    start = fresh_name(GENERATED_PREFIX + "S", taken)
    e_name = fresh_name(GENERATED_PREFIX + "E", taken | {start})
    br_name = fresh_name(GENERATED_PREFIX + "Br", taken | {start, e_name})
    taken |= {start, e_name, br_name}

    terminals = {a: 1 for a, k in g.terminals.items() if k == 0 and a != END}
    terminals[END] = 0
    nts = {A: lift_base(s) for A, s in g.nonterminals.items()}
    nts[start] = O
    nts[e_name] = arrow(O, O)

    folded: dict[tuple, str] = {}
    fold_rules: list[Rule] = []

    def conv(t: Term) -> Term:
        if use_g0:
            head, args = spine(t)
            if isinstance(head, Tm) and head.name == BRANCH and len(args) == 2:
                key = (args[0], args[1])
                name = folded.get(key)
                if name is None:
                    name = fresh_name(f"{GENERATED_PREFIX}A{len(folded)}", taken)
                    taken.add(name)
                    folded[key] = name
                    nts[name] = arrow(O, O)
                    fold_rules.append(Rule(name, ("x",), app(conv(args[0]), app(conv(args[1]), Var("x")))))
                return NT(name)
        if isinstance(t, Var):
            return t
        if isinstance(t, NT):
            return t
        if isinstance(t, Tm):
            if t.name == END:
                return NT(e_name)
            if t.name == BRANCH:
                return NT(br_name)
            return t
        if isinstance(t, App):
            return App(conv(t.fun), conv(t.arg))
        raise ShapeViolation(f"unexpected term {t!r}")

    rules = []
    for r in g.rules:
        x = fresh_name("x", set(r.params))
        rules.append(Rule(r.lhs, r.params + (x,), app(conv(r.body), Var(x))))
    rules.extend(fold_rules)
    rules.append(Rule(e_name, ("x",), Var("x")))
    if not use_g0:
        nts[br_name] = arrow(arrow(O, O), arrow(O, O), O, O)
        rules.append(Rule(br_name, ("f", "g", "x"), app(Var("f"), app(Var("g"), Var("x")))))
    rules.append(Rule(start, (), app(NT(g.start), Tm(END))))
    out = Grammar(terminals, nts, tuple(rules), start)
    return ensure_valid(out)


def order_bound_check(g_in: Grammar, g_out: Grammar) -> bool:
    """``order(g_out) <= order(g_in) + 1``, and ``<= 1`` for order-0 inputs."""
    if g_in.order == 0:
        return g_out.order <= 1
    return g_out.order <= g_in.order + 1


def _warn_if_e_inside(g: Grammar, budget: int = 24, max_len: int = 18) -> None:
    from .semantics import e_inside

    witness, _ = e_inside(g, budget, max_len, max_states=50_000)
    if witness is not None:
        warnings.warn(
            f"the e-frontier language contains words with e (e.g. {' '.join(witness)}); "
            "the converse construction does not preserve such words",
            PreconditionWarning,
            stacklevel=3,
        )


__all__ = ["tree_to_word", "order_bound_check", "lift_base", "PreconditionWarning"]
