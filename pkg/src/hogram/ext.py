"""Set-valued substitution and desugaring of extended grammars."""

from __future__ import annotations

from collections import ChainMap

from typing import Iterable, Mapping

from .errors import CaptureDetected
from .grammar import Grammar, Rule, sort_check
from .grammar import ext_sort_check  # noqa: F401  (re-export)
from .sorts import arrow
from .terms import NT, Abs, App, Choice, Term, Var, alternatives, app, choice, free_vars, vars_in_order

TermSet = frozenset


def ext_substitute(subst: Mapping[str, Iterable[Term]], u: Term) -> frozenset[Term]:
    """Apply a set-valued substitution; the result is a set of terms.

    Variables map to sets of alternatives.  At the head of an application a
    set turns into a choice between applications; in argument position it
    stays a (flattened) set.
    """
    subst = {x: frozenset(v) for x, v in subst.items()}
    return _subst(subst, u, _LazyFV(subst))


class _LazyFV:
    """Free variables of the substitution range, computed only under a binder."""

    def __init__(self, subst):
        self.subst = subst
        self.fv = None

    def __contains__(self, x: str) -> bool:
        if self.fv is None:
            self.fv = _fv_of_range(self.subst)
        return x in self.fv


def _fv_of_range(subst) -> set[str]:
    out: set[str] = set()
    for alts in subst.values():
        for t in alts:
            out |= free_vars(t)
    return out


def _subst(subst, u: Term, range_fv, memo=None) -> frozenset[Term]:
    if not u.has_var:
        return frozenset((u,))
    if isinstance(u, Var):
        return subst.get(u.name, frozenset((u,)))
    if memo is None:
        memo = {}
    hit = memo.get(id(u))  # terms are hash-consed, so shared subterms hit
    if hit is not None:
        return hit
    if isinstance(u, App):
        heads = _subst(subst, u.fun, range_fv, memo)
        arg = choice(_subst_set(subst, u.arg, range_fv, memo))
        out = frozenset(App(v, arg) for v in heads)
    elif isinstance(u, Choice):
        out = _subst_set(subst, u, range_fv, memo)
    elif isinstance(u, Abs):
        if u.param in subst or u.param in range_fv:
            raise CaptureDetected(f"binder {u.param} would capture or shadow a substituted variable")
        out = frozenset(Abs(u.param, u.sort, b) for b in _subst(subst, u.body, range_fv, memo))
    else:
        out = frozenset((u,))
    memo[id(u)] = out
    return out


def _subst_set(subst, u: Term, range_fv, memo=None) -> frozenset[Term]:
    out: set[Term] = set()
    for alt in alternatives(u):
        out |= _subst(subst, alt, range_fv, memo)
    return frozenset(out)


def subst_plain(mapping: Mapping[str, Term], t: Term) -> Term:
    """Ordinary substitution on applicative terms (may contain sets)."""
    if not t.has_var:
        return t
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        return App(subst_plain(mapping, t.fun), subst_plain(mapping, t.arg))
    if isinstance(t, Choice):
        return choice(subst_plain(mapping, i) for i in t.items)
    if isinstance(t, Abs):
        inner = {k: v for k, v in mapping.items() if k != t.param}
        return Abs(t.param, t.sort, subst_plain(inner, t.body))
    return t


_BUILDERS: dict = {}


def instantiator(params: tuple, body: Term):
    """A function from argument tuples to ``body`` with ``params`` replaced.

    Subterms without parameters are shared with ``body`` rather than rebuilt.
    For plain (set-free, lambda-free) bodies only; others fall back to
    :func:`subst_plain`.
    """
    key = (params, body)
    fn = _BUILDERS.get(key)
    if fn is not None:
        return fn
    index = {x: i for i, x in enumerate(params)}

    def build(t: Term):
        if isinstance(t, Var) and t.name in index:
            i = index[t.name]
            return lambda a: a[i]
        if isinstance(t, App):
            f, x = build(t.fun), build(t.arg)
            if f is None and x is None:
                return None
            f = f or (lambda a, c=t.fun: c)
            x = x or (lambda a, c=t.arg: c)
            return lambda a: App(f(a), x(a))
        if isinstance(t, (Choice, Abs)):
            raise _NotPlain
        return None

    try:
        inner = build(body)
        fn = inner or (lambda a: body)
    except _NotPlain:
        fn = lambda a: subst_plain(dict(zip(params, a)), body)  # noqa: E731
    if len(_BUILDERS) > 100_000:
        _BUILDERS.clear()
    _BUILDERS[key] = fn
    return fn


class _NotPlain(Exception):
    pass


def desugar(eg: Grammar, prefix: str = "$C") -> Grammar:
    """Replace every term set by a fresh nonterminal, innermost first.

    ``{u1 | ... | uk}`` with free variables ``x1..xl`` (first occurrence order)
    becomes ``$Ci x1 .. xl`` with rules ``$Ci x1 .. xl = uj``.  Fresh names are
    numbered left to right, bottom up, over rules in printed order.
    """
    if not eg.extended:
        return eg
    taken = eg.names()
    nonterminals = dict(eg.nonterminals)
    new_rules: list[Rule] = []
    counter = [0]

    def fresh() -> str:
        while True:
            name = f"{prefix}{counter[0]}"
            counter[0] += 1
            if name not in taken:
                taken.add(name)
                return name

    def walk(t: Term, env) -> Term:
        if isinstance(t, App):
            return App(walk(t.fun, env), walk(t.arg, env))
        if isinstance(t, Choice):
            items = [walk(i, env) for i in t.items]
            params = []
            for i in items:
                vars_in_order(i, params)
            sort = sort_check(env, items[0], eg.terminals)
            name = fresh()
            nonterminals[name] = arrow(*[env[p] for p in params], sort)
            for i in items:
                new_rules.append(Rule(name, tuple(params), i))
            return app(NT(name), *[Var(p) for p in params])
        return t

    rules = []
    for r in eg.rules:
        env = ChainMap(eg.param_sorts(r), nonterminals)
        rules.append(Rule(r.lhs, r.params, walk(r.body, env)))
    return Grammar(eg.terminals, nonterminals, tuple(rules + new_rules), eg.start, extended=False)

