"""Grammar normalizations applied before the type-directed steps.

``normalize_order0_args`` rewrites a word grammar so that no sort has the
shape ``o -> s`` with ``order(s) > 1``: such an ``o`` argument is passed as a
constant function ``K t`` of sort ``o -> o`` and used as ``x e``.

``saturate_br`` makes every occurrence of ``br`` fully applied.
"""

from __future__ import annotations

from .errors import NotAWordGrammar
from .grammar import BRANCH, END, GENERATED_PREFIX, Grammar, Rule, assumption_holds, ensure_valid, is_word_grammar
from .sorts import O, Arrow, Sort, arrow, base_fn, sort_order, split
from .terms import NT, Choice, Term, Tm, Var, app, choice, spine, subterms

K_NAME = GENERATED_PREFIX + "K"
BR_NAME = GENERATED_PREFIX + "Br"


def lift_sort(s: Sort) -> Sort:
    """``o -> s`` with order(s) > 1 becomes ``(o -> o) -> s``, recursively."""
    if not isinstance(s, Arrow):
        return s
    if s.dom == O and sort_order(s.cod) > 1:
        return Arrow(Arrow(O, O), lift_sort(s.cod))
    return Arrow(lift_sort(s.dom), lift_sort(s.cod))


def _fresh(base: str, g: Grammar, params: bool = True) -> str:
    taken = g.names() if params else set(g.terminals) | set(g.nonterminals)
    name, i = base, 1
    while name in taken:
        name = f"{base}{i}"
        i += 1
    return name


def normalize_order0_args(g: Grammar) -> Grammar:
    if not is_word_grammar(g):
        raise NotAWordGrammar("order normalization applies to word grammars")
    ensure_valid(g)
    k_name = _fresh(K_NAME, g)
    used = [False]
    nts = {A: lift_sort(s) for A, s in g.nonterminals.items()}

    def lift_term(t: Term, env: dict[str, Sort], lifted: set[str]) -> tuple[Term, Sort]:
        """Return (image, original sort) of an applicative term."""
        if isinstance(t, Var):
            s = env[t.name]
            if t.name in lifted:
                return app(t, Tm(END)), s
            return t, s
        if isinstance(t, NT):
            return t, g.nonterminals[t.name]
        if isinstance(t, Tm):
            return t, base_fn(g.terminals[t.name])
        head, args = spine(t)
        f, fs = lift_term(head, env, lifted)
        for a in args:
            u, us = lift_term(a, env, lifted)
            assert isinstance(fs, Arrow)
            rs = fs.cod
            if us == O and sort_order(rs) > 1:
                used[0] = True
                u = app(NT(k_name), u)
            f, fs = app(f, u), rs
        return f, fs

    rules = []
    for r in g.rules:
        args, _ = split(g.nonterminals[r.lhs])
        env = dict(zip(r.params, args))
        lifted = set()
        for i, (x, s) in enumerate(zip(r.params, args)):
            if s == O and sort_order(arrow(*args[i + 1 :], O)) > 1:
                lifted.add(x)
        body, _ = lift_term(r.body, env, lifted)
        rules.append(Rule(r.lhs, r.params, body))
    terminals = dict(g.terminals)
    if used[0] or any(_mentions_end(r.body) for r in rules):
        terminals.setdefault(END, 0)
    if used[0]:
        nts[k_name] = arrow(O, O, O)
        x, y = _fresh("x", g, False), _fresh("y", g, False)
        rules.append(Rule(k_name, (x, y), Var(x)))
    out = Grammar(terminals, nts, tuple(rules), g.start)
    assert assumption_holds(out)
    return out


def _mentions_end(t: Term) -> bool:
    return any(isinstance(s, Tm) and s.name == END for s in subterms(t))


def saturate_br(g: Grammar) -> Grammar:
    """Replace partial applications of ``br`` by a nonterminal ``$Br``."""
    if BRANCH not in g.terminals:
        return g
    name = _fresh(BR_NAME, g)
    used = [False]

    def walk(t: Term) -> Term:
        if isinstance(t, Choice):
            return choice(walk(i) for i in t.items)
        head, args = spine(t)
        args = [walk(a) for a in args]
        if isinstance(head, Tm) and head.name == BRANCH and len(args) < 2:
            used[0] = True
            head = NT(name)
        return app(head, *args)

    rules = [Rule(r.lhs, r.params, walk(r.body)) for r in g.rules]
    if not used[0]:
        return g
    nts = dict(g.nonterminals)
    nts[name] = arrow(O, O, O)
    x, y = _fresh("x", g, False), _fresh("y", g, False)
    rules.append(Rule(name, (x, y), app(Tm(BRANCH), Var(x), Var(y))))
    return g.replace(nonterminals=nts, rules=tuple(rules))


__all__ = ["lift_sort", "normalize_order0_args", "saturate_br", "assumption_holds"]
