"""Step 2: remove redundant ``e`` leaves from a tree grammar.

Types ``τ ::= ε | + | ι -> τ``: ``ε`` marks terms whose trees have only
``br`` and ``e`` nodes, ``+`` those with some other leaf.  Environments are
shared freely (no linearity), so for a fixed rule and type the parameter
bindings are fixed and the search is a plain bottom-up pass.

Derivability of ``(A, τ)`` is the least fixpoint: a pair enters the table
only once some body of ``A`` has a finite derivation at ``τ``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import RefinementSpaceTooLarge, ShapeViolation
from .ext import desugar
from .grammar import BRANCH, END, GENERATED_PREFIX, Grammar, Rule, is_tree_shape
from .preprocess import saturate_br
from .sorts import O, Arrow, Sort, arrow
from .terms import NT, App, Term, Tm, Var, app, choice, show, spine, subterms, term_key

DEFAULT_REFINEMENT_CAP = 20_000


class ITy2:
    __slots__ = ("args", "result", "tag", "key", "_hash", "_text")
    _pool: dict = {}

    def __new__(cls, tag: str, args=None, result=None):
        k = (tag, args, result)
        hit = cls._pool.get(k)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.tag = tag
        self.args = args
        self.result = result
        if tag == "e":
            self.key = (0,)
        elif tag == "p":
            self.key = (1,)
        else:
            self.key = (2, len(args), tuple(a.key for a in args), result.key)
        self._hash = hash(self.key)
        self._text = None
        cls._pool[k] = self
        return self

    @property
    def is_base(self) -> bool:
        return self.tag != "->"

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __lt__(self, other: "ITy2") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        return f"ITy2({render2(self)})"

    def __str__(self) -> str:
        return render2(self)

    def __reduce__(self):
        return (ITy2, (self.tag, self.args, self.result))


EPS = ITy2("e")
PLUS = ITy2("p")


def tty_arrow(conj, result: ITy2) -> ITy2:
    return ITy2("->", tuple(sorted(set(conj), key=lambda c: c.key)), result)


def render2(t: ITy2) -> str:
    if t._text is None:
        if t.is_base:
            t._text = t.tag
        else:
            dom = "^".join(f"({render2(a)})" if not a.is_base else render2(a) for a in t.args) or "top"
            t._text = f"{dom}->{render2(t.result)}"
    return t._text


def refines2(t: ITy2, s: Sort) -> bool:
    if t.is_base:
        return s == O
    if not isinstance(s, Arrow):
        return False
    return all(refines2(a, s.dom) for a in t.args) and refines2(t.result, s.cod)


@lru_cache(maxsize=None)
def _ttys(s: Sort, cap: int) -> tuple:
    if s == O:
        return (EPS, PLUS)
    dom = _ttys(s.dom, cap)
    cod = _ttys(s.cod, cap)
    if (2 ** len(dom)) * len(cod) > cap:
        raise RefinementSpaceTooLarge(f"sort {s} has more than {cap} refinements")
    out = []
    for r in range(len(dom) + 1):
        for conj in itertools.combinations(dom, r):
            for c in cod:
                out.append(tty_arrow(conj, c))
    out.sort(key=lambda t: t.key)
    return tuple(out)


def enumerate_tty(s: Sort, cap: int = DEFAULT_REFINEMENT_CAP) -> list[ITy2]:
    return list(_ttys(s, cap))


def tty_to_sort(t: ITy2) -> Sort:
    if t.is_base:
        return O
    return arrow(*[tty_to_sort(a) for a in t.args], tty_to_sort(t.result))


def subscript2(name: str, t: ITy2) -> str:
    return f"{name}'{{{render2(t)}}}"


# --- the term transformation ------------------------------------------------------


def _check_shape(g: Grammar) -> None:
    if not is_tree_shape(g):
        raise ShapeViolation("step 2 needs br binary and every other terminal nullary")


def _judge(g: Grammar, table, env: dict, t: Term, memo: dict) -> dict:
    """Map type -> set of outputs, for a term under a fixed environment."""
    hit = memo.get(t)
    if hit is not None:
        return hit
    res: dict = {}
    head, args = spine(t)
    if isinstance(head, Tm) and head.name == BRANCH and len(args) == 2:
        r0 = _judge(g, table, env, args[0], memo)
        r1 = _judge(g, table, env, args[1], memo)
        p0, p1 = r0.get(PLUS), r1.get(PLUS)
        e0, e1 = r0.get(EPS), r1.get(EPS)
        if p0 and p1:
            u = app(Tm(BRANCH), _choice(memo, args[0], PLUS, p0), _choice(memo, args[1], PLUS, p1))
            res.setdefault(PLUS, set()).add(u)
        if p0 and e1:
            res.setdefault(PLUS, set()).update(p0)
        if e0 and p1:
            res.setdefault(PLUS, set()).update(p1)
        if e0 and e1:
            res.setdefault(EPS, set()).add(Tm(END))
    elif isinstance(t, Var):
        for ty in env.get(t.name, ()):
            res.setdefault(ty, set()).add(Var(subscript2(t.name, ty)))
    elif isinstance(t, NT):
        for ty in table.get(t.name, ()):
            res.setdefault(ty, set()).add(NT(subscript2(t.name, ty)))
    elif isinstance(t, Tm):
        if g.terminals[t.name] == 0:
            ty = EPS if t.name == END else PLUS
            res.setdefault(ty, set()).add(Tm(t.name))
    elif isinstance(t, App):
        fs = _judge(g, table, env, t.fun, memo)
        ts = None
        usable = []
        for fty in fs:
            if fty.is_base:
                continue
            if fty.args and ts is None:
                ts = _judge(g, table, env, t.arg, memo)
            if all(ts.get(c) for c in fty.args):
                usable.append(fty)
        # With weakening, a head type whose argument conjunction strictly
        # contains another's (same result) generates a superset; keep the maximal.
        for fty in usable:
            mine = set(fty.args)
            if any(o is not fty and o.result is fty.result and mine < set(o.args) for o in usable):
                continue
            Us = [_choice(memo, t.arg, c, ts[c]) for c in fty.args]
            bucket = res.setdefault(fty.result, set())
            for v in fs[fty]:
                bucket.add(app(v, *Us))
    memo[t] = res
    return res


def _choice(memo: dict, t: Term, ty: ITy2, outs) -> Term:
    key = (None, t, ty)  # never a term, so it cannot clash with _judge entries
    hit = memo.get(key)
    if hit is None:
        hit = memo[key] = choice(outs)
    return hit


def _split(t: ITy2, n: int):
    conjs = []
    for _ in range(n):
        if t.is_base:
            return None
        conjs.append(t.args)
        t = t.result
    return conjs, t


def transform_term2(g: Grammar, table, env, t: Term, ty: ITy2) -> set[Term]:
    """Outputs of ``t`` at ``ty`` under ``env`` (a set of (var, type) pairs)."""
    table = _as_table(table)
    e: dict = {}
    for x, tt in env:
        e.setdefault(x, set()).add(tt)
    return set(_judge(g, table, e, t, {}).get(ty, ()))


def _as_table(table) -> dict:
    if isinstance(table, DerivabilityTable):
        return table.by_nt
    if isinstance(table, dict):
        return table
    out: dict = {}
    for A, ty in table:
        out.setdefault(A, set()).add(ty)
    return out


def _rule_outputs(g: Grammar, table: dict, r: Rule, ty: ITy2):
    parts = _split(ty, len(r.params))
    if parts is None:
        return None, []
    conjs, res_ty = parts
    env = {x: set(c) for x, c in zip(r.params, conjs)}
    params = [subscript2(x, c) for x, conj in zip(r.params, conjs) for c in conj]
    outs = _judge(g, table, env, r.body, {}).get(res_ty, set())
    return tuple(params), sorted(outs, key=term_key)


@dataclass
class DerivabilityTable:
    by_nt: dict  # name -> set of ITy2

    def __contains__(self, item) -> bool:
        A, ty = item
        return ty in self.by_nt.get(A, ())

    def pairs(self) -> set:
        return {(A, ty) for A, tys in self.by_nt.items() for ty in tys}

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_nt.values())


def _types(g: Grammar, table, env: dict, t: Term, memo: dict) -> frozenset:
    """The types of ``t`` under ``env``; ``_judge`` without building outputs."""
    hit = memo.get(t)
    if hit is not None:
        return hit
    head, args = spine(t)
    if isinstance(head, Tm) and head.name == BRANCH and len(args) == 2:
        a = _types(g, table, env, args[0], memo)
        b = _types(g, table, env, args[1], memo)
        res = set()
        if PLUS in a and (PLUS in b or EPS in b) or EPS in a and PLUS in b:
            res.add(PLUS)
        if EPS in a and EPS in b:
            res.add(EPS)
    elif isinstance(t, Var):
        res = env.get(t.name, ())
    elif isinstance(t, NT):
        res = table.get(t.name, ())
    elif isinstance(t, Tm):
        res = () if g.terminals[t.name] else (EPS if t.name == END else PLUS,)
    elif isinstance(t, App):
        res = set()
        ts = None
        for fty in _types(g, table, env, t.fun, memo):
            if fty.is_base or fty.result in res:
                continue
            if fty.args and ts is None:
                ts = _types(g, table, env, t.arg, memo)
            if all(c in ts for c in fty.args):
                res.add(fty.result)
    else:
        res = ()
    res = frozenset(res)
    memo[t] = res
    return res


def _derivable(g: Grammar, table: dict, r: Rule, ty: ITy2) -> bool:
    parts = _split(ty, len(r.params))
    if parts is None:
        return False
    conjs, res_ty = parts
    env = {x: frozenset(c) for x, c in zip(r.params, conjs)}
    return res_ty in _types(g, table, env, r.body, {})


def compute_derivability(g: Grammar, cap: int = DEFAULT_REFINEMENT_CAP) -> DerivabilityTable:
    """Least fixpoint of the nonterminal derivability premise.

    Each round revisits only the nonterminals whose rules mention something
    that gained a type in the previous round.
    """
    _check_shape(g)
    table: dict = {}
    users: dict[str, set[str]] = {}
    for r in g.rules:
        for s in subterms(r.body):
            if isinstance(s, NT):
                users.setdefault(s.name, set()).add(r.lhs)
    pending: dict[str, list] = {
        A: list(_ttys(s, cap)) for A, s in g.nonterminals.items() if g.rules_for(A)
    }
    dirty = set(pending)
    while dirty:
        found = {}
        for A in dirty:
            got = [ty for ty in pending[A] if any(_derivable(g, table, r, ty) for r in g.rules_for(A))]
            if got:
                found[A] = got
        dirty = set()
        for A, got in found.items():
            table.setdefault(A, set()).update(got)
            pending[A] = [ty for ty in pending[A] if ty not in table[A]]
            dirty.update(B for B in users.get(A, ()) if pending.get(B))
    return DerivabilityTable(table)


def transform_grammar2(g: Grammar, *, prune: bool = True, cap: int = DEFAULT_REFINEMENT_CAP) -> Grammar:
    if g.extended:
        g = desugar(g)
    g = saturate_br(g)
    _check_shape(g)
    table = compute_derivability(g, cap).by_nt
    rules: dict[Rule, None] = {}  # ordered, without duplicates
    nts: dict[str, Sort] = {}
    for A, tys in table.items():
        for ty in tys:
            name = subscript2(A, ty)
            nts[name] = tty_to_sort(ty)
            for r in g.rules_for(A):
                params, outs = _rule_outputs(g, table, r, ty)
                for u in outs:
                    rules[Rule(name, params, u)] = None
    taken = set(g.terminals) | set(nts) | set(g.nonterminals)
    start = GENERATED_PREFIX + "S"
    i = 1
    while start in taken:
        start = f"{GENERATED_PREFIX}S{i}"
        i += 1
    nts[start] = O
    for ty in (EPS, PLUS):
        nts.setdefault(subscript2(g.start, ty), O)
        rules[Rule(start, (), NT(subscript2(g.start, ty)))] = None
    out = Grammar(dict(g.terminals), nts, tuple(rules), start, extended=True)
    return reachable(out) if prune else out


def reachable(g: Grammar) -> Grammar:
    reach = {g.start}
    todo = [g.start]
    while todo:
        A = todo.pop()
        for r in g.rules_for(A):
            for s in subterms(r.body):
                if isinstance(s, NT) and s.name not in reach:
                    reach.add(s.name)
                    todo.append(s.name)
    return g.replace(
        nonterminals={A: s for A, s in g.nonterminals.items() if A in reach},
        rules=tuple(r for r in g.rules if r.lhs in reach),
    )


__all__ = [
    "ITy2",
    "EPS",
    "PLUS",
    "tty_arrow",
    "render2",
    "refines2",
    "enumerate_tty",
    "tty_to_sort",
    "compute_derivability",
    "transform_term2",
    "transform_grammar2",
    "DerivabilityTable",
    "subscript2",
]
