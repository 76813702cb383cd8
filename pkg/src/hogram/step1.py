"""Step 1: word grammar of order n+1 to extended tree grammar of order n.

Types ``θ ::= T | ι -> θ`` refine sorts; an intersection ``ι`` is a sorted
tuple of conjuncts (empty for ``top``).  A type is *unbalanced* when the
value it describes contains the word end ``e``; such values are linear.

Derivation search runs bottom-up over a rule body.  For every subterm it
computes all triples (type, minimal environment, output) and combines them
with the application rules.  Environments are frozensets of
``(variable, type)`` pairs; the union of two environments fails if they
share an unbalanced binding.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

from .bounds import MinWeight, is_bottom, supported
from .errors import AssumptionViolated, LinearityViolation, NotAWordGrammar, RefinementSpaceTooLarge
from .ext import subst_plain
from .grammar import BRANCH, END, Grammar, Rule, assumption_holds, is_word_grammar
from .sorts import O, Arrow, Sort, arrow, base_fn, sort_order
from .terms import NT, App, Choice, Term, Tm, Var, app, choice, lam, show, spine, subterms

log = logging.getLogger(__name__)

DEFAULT_REFINEMENT_CAP = 20_000
ENV_CLOSURE_CAP = 256

BAL, UNB = "balanced", "unbalanced"


# --- types ---------------------------------------------------------------


class ITy1:
    """Step-1 intersection type.  Instances are interned by structure."""

    __slots__ = ("args", "result", "key", "polarity", "_hash", "_text")
    _pool: dict = {}

    def __new__(cls, args=None, result=None):
        k = (args, result)
        hit = cls._pool.get(k)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.args = args
        self.result = result
        if args is None:
            self.key = (0,)
            self.polarity = UNB
        else:
            self.key = (1, len(args), tuple(a.key for a in args), result.key)
            self.polarity = _arrow_polarity(_inter_polarity(args), result.polarity)
        self._hash = hash(self.key)
        self._text = None
        cls._pool[k] = self
        return self

    @property
    def is_base(self) -> bool:
        return self.args is None

    @property
    def balanced(self) -> bool:
        return self.polarity == BAL

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __lt__(self, other: "ITy1") -> bool:
        return self.key < other.key

    def __le__(self, other: "ITy1") -> bool:
        return self.key <= other.key

    def __repr__(self) -> str:
        return f"ITy1({render(self)})"

    def __str__(self) -> str:
        return render(self)

    def __reduce__(self):
        return (ITy1, (self.args, self.result))


def _inter_polarity(conj) -> str | None:
    pols = [c.polarity for c in conj]
    if None in pols:
        return None
    n_unb = pols.count(UNB)
    if n_unb == 0:
        return BAL
    if n_unb == 1:
        return UNB
    return None


def _arrow_polarity(pi, pr) -> str | None:
    if pi == BAL and pr == UNB:
        return UNB
    if pi == UNB and pr == UNB:
        return BAL
    if pi == BAL and pr == BAL:
        return BAL
    return None


T = ITy1()


def ity_arrow(conj, result: ITy1) -> ITy1:
    """``conj1 ^ ... ^ conjk -> result``; conjuncts are sorted and deduplicated."""
    return ITy1(tuple(sorted(set(conj), key=lambda c: c.key)), result)


def ity_order(t: ITy1):
    """Canonical total-order key: base first, then by conjunct count, then structure."""
    return t.key


def render(t: ITy1) -> str:
    if t._text is None:
        if t.is_base:
            t._text = "T"
        else:
            if not t.args:
                dom = "top"
            else:
                dom = "^".join(f"({render(a)})" if not a.is_base else render(a) for a in t.args)
            t._text = f"{dom}->{render(t.result)}"
    return t._text


def parse_ity(text: str) -> ITy1:
    """Inverse of :func:`render`."""
    toks = _ity_tokens(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else None

    def eat(x=None):
        tok = peek()
        if tok is None or (x is not None and tok != x):
            raise ValueError(f"bad type {text!r}")
        pos[0] += 1
        return tok

    def atom():
        tok = peek()
        if tok == "(":
            eat("(")
            t = ty()
            eat(")")
            return t
        if tok == "T":
            eat()
            return T
        raise ValueError(f"bad type {text!r}")

    def ty():
        if peek() == "top":
            eat()
            eat("->")
            return ITy1((), ty())
        first = atom()
        conj = [first]
        while peek() == "^":
            eat()
            conj.append(atom())
        if peek() == "->":
            eat()
            return ity_arrow(conj, ty())
        if len(conj) > 1:
            raise ValueError(f"bad type {text!r}")
        return first

    out = ty()
    if peek() is not None:
        raise ValueError(f"bad type {text!r}")
    return out


def _ity_tokens(text: str):
    out, i = [], 0
    while i < len(text):
        if text[i].isspace():
            i += 1
        elif text.startswith("->", i):
            out.append("->")
            i += 2
        elif text.startswith("top", i):
            out.append("top")
            i += 3
        elif text[i] in "()^T":
            out.append(text[i])
            i += 1
        else:
            raise ValueError(f"bad type {text!r}")
    return out


def refines(t: ITy1, s: Sort) -> str | None:
    """Polarity of ``t`` as a refinement of ``s``, or None if ill-formed."""
    if t.is_base:
        return UNB if s == O else None
    if not isinstance(s, Arrow):
        return None
    if any(refines(a, s.dom) is None for a in t.args):
        return None
    if refines(t.result, s.cod) is None:
        return None
    return t.polarity


@lru_cache(maxsize=None)
def _refinements(s: Sort, cap: int) -> tuple:
    if s == O:
        return (T,)
    dom = _refinements(s.dom, cap)
    cod = _refinements(s.cod, cap)
    bal = [d for d in dom if d.polarity == BAL]
    unb = [d for d in dom if d.polarity == UNB]
    n = (2 ** len(bal)) * (1 + len(unb)) * len(cod)
    if n > cap:
        raise RefinementSpaceTooLarge(f"sort {s} has more than {cap} refinements")
    out = []
    for r in range(len(bal) + 1):
        for bs in itertools.combinations(bal, r):
            for extra in [()] + [(u,) for u in unb]:
                conj = bs + extra
                for c in cod:
                    t = ity_arrow(conj, c)
                    if t.polarity is not None:
                        out.append(t)
    out.sort(key=lambda t: t.key)
    return tuple(out)


def enumerate_refinements(s: Sort, cap: int = DEFAULT_REFINEMENT_CAP) -> list[tuple[ITy1, str]]:
    return [(t, t.polarity) for t in _refinements(s, cap)]


def target_sort(t: ITy1, s: Sort) -> Sort:
    """The sort of the image of a ``t``-typed value of sort ``s``."""
    if sort_order(s) <= 1:
        return O
    doms = [target_sort(a, s.dom) for a in t.args]
    return arrow(*doms, target_sort(t.result, s.cod))


# --- environments -------------------------------------------------------------

Env = frozenset  # of (name, ITy1)


def env_union(*envs: Env) -> Env:
    out: set = set()
    for e in envs:
        for b in e:
            if b in out and not b[1].balanced:
                raise LinearityViolation(b[0], render(b[1]))
            out.add(b)
    return frozenset(out)


def _try_union(*envs):
    try:
        return env_union(*envs)
    except LinearityViolation:
        return None


def show_env(env: Env) -> str:
    return ", ".join(f"{x}:{render(t)}" for x, t in sorted(env, key=lambda b: (b[0], b[1].key)))


def balanced_env(env) -> bool:
    return all(t.balanced for _, t in env)


# --- naming -------------------------------------------------------------------


def subscript(name: str, t: ITy1) -> str:
    return f"{name}'{{{render(t)}}}"


# --- derivations ---------------------------------------------------------------


@dataclass
class Deriv:
    rule: str
    env: Env
    term: str
    ty: ITy1
    out: str
    children: list = field(default_factory=list)

    def lines(self, depth: int = 0) -> list[str]:
        head = f"{'  ' * depth}{self.rule}: {show_env(self.env) or '.'} |- {self.term} : {render(self.ty)} ~> {self.out}"
        out = [head]
        for c in self.children:
            out.extend(c.lines(depth + 1))
        return out


# --- the term transformation ---------------------------------------------------


class _Search:
    """Bottom-up derivation search for the terms of one rule."""

    def __init__(self, g: Grammar, var_sorts: dict[str, Sort], trace: bool, cap: int):
        self.g = g
        self.vs = var_sorts
        self.trace = trace
        self.cap = cap
        self.memo: dict = {}

    def sort_of(self, t: Term) -> Sort:
        if isinstance(t, Var):
            return self.vs[t.name]
        if isinstance(t, NT):
            return self.g.nonterminals[t.name]
        if isinstance(t, Tm):
            return base_fn(self.g.terminals[t.name])
        return self.sort_of(t.fun).cod

    def refs(self, s: Sort):
        return _refinements(s, self.cap)

    def judge(self, t: Term) -> dict:
        """Map type -> env -> {output: derivation or None}."""
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        res: dict = {}

        def put(ty, env, out, d):
            res.setdefault(ty, {}).setdefault(env, {}).setdefault(out, d)

        tr = self.trace
        if isinstance(t, Var):
            for ty in self.refs(self.vs[t.name]):
                out = Var(subscript(t.name, ty))
                env = frozenset({(t.name, ty)})
                put(ty, env, out, Deriv("Tr1-Var", env, show(t), ty, show(out)) if tr else None)
        elif isinstance(t, NT):
            for ty in self.refs(self.g.nonterminals[t.name]):
                out = NT(subscript(t.name, ty))
                put(ty, frozenset(), out, Deriv("Tr1-NT", frozenset(), show(t), ty, show(out)) if tr else None)
        elif isinstance(t, Tm):
            k = self.g.terminals[t.name]
            if t.name == END and k == 0:
                put(T, frozenset(), Tm(END), Deriv("Tr1-Const0", frozenset(), END, T, END) if tr else None)
            elif k == 1:
                ty = ITy1((T,), T)
                put(ty, frozenset(), Tm(t.name), Deriv("Tr1-Const1", frozenset(), t.name, ty, t.name) if tr else None)
        elif isinstance(t, App):
            self._app(t, put)
        else:
            raise TypeError(f"unexpected term {show(t)}")
        self.memo[t] = res
        return res

    def _app(self, t: App, put) -> None:
        s_res = self.judge(t.fun)
        if not s_res:
            return
        a_res = None
        tr = self.trace
        for sty, by_env in s_res.items():
            if sty.is_base:
                continue
            conj, rty = sty.args, sty.result
            if conj == (T,):
                if a_res is None:
                    a_res = self.judge(t.arg)
                targ = a_res.get(T)
                if not targ:
                    continue
                for env0, vs in by_env.items():
                    V = choice(vs)
                    for env1, us in targ.items():
                        env = _try_union(env0, env1)
                        if env is None:
                            continue
                        U = choice(us)
                        out = app(Tm(BRANCH), V, U)
                        d = None
                        if tr:
                            d = Deriv("Tr1-App2", env, show(t), rty, show(out),
                                      [_set_deriv(vs, sty, env0, show(t.fun)), _set_deriv(us, T, env1, show(t.arg))])
                        put(rty, env, out, d)
                continue
            if T in conj:
                continue
            options = []
            ok = True
            for ci in conj:
                if a_res is None:
                    a_res = self.judge(t.arg)
                got = a_res.get(ci)
                if not got:
                    ok = False
                    break
                options.append(self._arg_options(got, ci))
            if not ok:
                continue
            for env0, vs in by_env.items():
                for combo in itertools.product(*options):
                    env = _try_union(env0, *[c[0] for c in combo])
                    if env is None:
                        continue
                    Us = [c[1] for c in combo]
                    for v, dv in vs.items():
                        out = app(v, *Us)
                        d = None
                        if tr:
                            kids = [dv] + [
                                _set_deriv(c[2], ci, c[0], show(t.arg)) for c, ci in zip(combo, conj)
                            ]
                            d = Deriv("Tr1-App1", env, show(t), rty, show(out), kids)
                        put(rty, env, out, d)

    def _arg_options(self, by_env: dict, ty: ITy1) -> list:
        """Candidate (env, set, members) for an argument at type ``ty``.

        Unbalanced arguments are used once, so outputs are grouped per
        minimal environment.  Balanced arguments may be copied; each copy
        must be able to pick any compatible output, so candidate
        environments are the unions of minimal ones, and each carries every
        output whose environment it contains up to balanced bindings.
        """
        if not ty.balanced:
            return [(env, choice(outs), outs) for env, outs in by_env.items()]
        base = list(by_env)
        closure = set(base)
        frontier = list(base)
        capped = False
        while frontier and not capped:
            nxt = []
            for a in frontier:
                for b in base:
                    u = _try_union(a, b)
                    if u is not None and u not in closure:
                        if len(closure) >= ENV_CLOSURE_CAP:
                            capped = True
                            break
                        closure.add(u)
                        nxt.append(u)
                if capped:
                    break
            frontier = nxt
        if capped:
            log.warning("argument environment closure capped at %d", ENV_CLOSURE_CAP)
        out = []
        for gam in sorted(closure, key=_env_key):
            members: dict = {}
            used: set = set()
            for env, outs in by_env.items():
                if env <= gam and balanced_env(gam - env):
                    used |= env
                    for o, d in outs.items():
                        members.setdefault(o, d)
            if used != gam:
                continue
            out.append((gam, choice(members), members))
        return out


def _env_key(env):
    return sorted((x, t.key) for x, t in env)


def _set_deriv(outs: dict, ty, env, term_text):
    items = list(outs.items())
    if len(items) == 1:
        d = items[0][1]
        return d
    return Deriv("Tr1-Set", env, term_text, ty, show(choice(o for o, _ in items)), [d for _, d in items if d])


def transform_term1(g: Grammar, t: Term, ty: ITy1, var_sorts: dict[str, Sort] | None = None,
                    params: tuple = (), *, trace: bool = False, cap: int = DEFAULT_REFINEMENT_CAP):
    """All (minimal env, output) pairs for ``t`` at ``ty``.

    ``params`` are λ-bound around ``t`` (their sorts in ``var_sorts``); the
    abstraction rules are then applied, so the result for a whole rule body
    has an empty environment and an output of the form ``(params', u)``.
    Returns a list of :class:`TransResult`.
    """
    var_sorts = dict(var_sorts or {})
    search = _Search(g, var_sorts, trace, cap)
    if not params:
        by_env = search.judge(t).get(ty, {})
        return [TransResult(env, out, d) for env, outs in by_env.items() for out, d in outs.items()]
    return [TransResult(frozenset(), _lam(ps, out), d) for ps, out, d in _abstract(search, t, params, ty)]


@dataclass(frozen=True)
class TransResult:
    env: Env
    out: object
    deriv: Deriv | None = field(default=None, compare=False)


def _lam(ps, body):
    return lam([p for p, _ in ps], body)


def _split_ity(ty: ITy1, n: int):
    conjs = []
    for _ in range(n):
        if ty.is_base:
            return None
        conjs.append(ty.args)
        ty = ty.result
    return conjs, ty


def _abstract(search: _Search, body: Term, params: tuple, ty: ITy1):
    """Apply the abstraction rules for ``params`` at ``ty`` to body derivations."""
    parts = _split_ity(ty, len(params))
    if parts is None:
        return []
    conjs, res_ty = parts
    by_env = search.judge(body).get(res_ty, {})
    results = []
    for env, outs in by_env.items():
        new_params = []
        eps = {}
        ok = True
        for x, conj in zip(params, conjs):
            used = {t for (y, t) in env if y == x}
            if conj == (T,):
                if used != {T}:
                    ok = False
                    break
                eps[subscript(x, T)] = Tm(END)
                continue
            if not used <= set(conj) or any(not c.balanced and c not in used for c in conj):
                ok = False
                break
            for c in conj:
                new_params.append((subscript(x, c), c))
        if not ok:
            continue
        if any(y not in params for y, _ in env):
            continue
        for out, d in outs.items():
            u = subst_plain(eps, out) if eps else out
            dd = None
            if search.trace:
                dd = _abs_deriv(env, params, conjs, body, res_ty, u, new_params, d)
            results.append((tuple(new_params), u, dd))
    return results


def _abs_deriv(env, params, conjs, body, res_ty, u, new_params, d):
    # Wrap the body derivation innermost-first.
    cur = d
    cur_out = u
    cur_ty = res_ty
    term = show(body)
    remaining = env
    for i in range(len(params) - 1, -1, -1):
        x, conj = params[i], conjs[i]
        remaining = frozenset(b for b in remaining if b[0] != x)
        cur_ty = ITy1(conj, cur_ty)
        term = f"\\{x}. {term}"
        if conj == (T,):
            rule = "Tr1-Abs2"
        else:
            rule = "Tr1-Abs1"
            binders = " ".join(f"\\{subscript(x, c)}." for c in conj)
            cur_out = f"{binders} {cur_out}" if binders else cur_out
        cur = Deriv(rule, remaining, term, cur_ty, str(cur_out), [cur] if cur else [])
    return cur


# --- the grammar transformation -------------------------------------------------


@dataclass
class Step1Result:
    grammar: Grammar
    full: Grammar
    traces: dict  # rule text -> Deriv


def transform_grammar1(g: Grammar, *, prune: bool = True, trace: bool = False,
                       cap: int = DEFAULT_REFINEMENT_CAP) -> Grammar:
    return transform_grammar1_report(g, prune=prune, trace=trace, cap=cap).grammar


def transform_grammar1_report(g: Grammar, *, prune: bool = True, trace: bool = False,
                              cap: int = DEFAULT_REFINEMENT_CAP) -> Step1Result:
    if not is_word_grammar(g):
        raise NotAWordGrammar("step 1 needs a word grammar")
    if not assumption_holds(g):
        raise AssumptionViolated("some sort has the shape o -> s with order(s) > 1; normalize first")
    terminals = {BRANCH: 2, END: 0}
    for a, k in g.terminals.items():
        if k == 1:
            terminals[a] = 0
    nts: dict[str, Sort] = {}
    for A, s in g.nonterminals.items():
        for ty in _refinements(s, cap):
            nts[subscript(A, ty)] = target_sort(ty, s)
    rules: list[Rule] = []
    traces: dict = {}
    for r in g.rules:
        s = g.nonterminals[r.lhs]
        var_sorts = g.param_sorts(r)
        search = _Search(g, var_sorts, trace, cap)
        for ty in _refinements(s, cap):
            for ps, u, d in _abstract(search, r.body, r.params, ty):
                rule = Rule(subscript(r.lhs, ty), tuple(p for p, _ in ps), u)
                rules.append(rule)
                if trace and d is not None:
                    traces.setdefault(str(rule), d)
    start = subscript(g.start, T)
    full = Grammar(terminals, nts, tuple(_dedup(rules)), start, extended=True)
    if not prune:
        return Step1Result(full, full, traces)
    origin: dict = {}
    out = prune_grammar(full, origin)
    for new, old in origin.items():
        if new != old and str(old) in traces:
            traces.setdefault(str(new), traces[str(old)])
    return Step1Result(out, full, traces)


def _dedup(rules):
    seen = set()
    out = []
    for r in rules:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def prune_grammar(g: Grammar, origin: dict | None = None) -> Grammar:
    """Remove what can never yield a finite tree, then keep what the start reaches.

    A rule is dropped when its body is unproductive even with the most
    productive parameters; a set alternative is dropped when it is
    unproductive in every context.  Neither change alters the language.
    If given, ``origin`` maps each kept rule to the rule it was cut from.
    """
    rules = _drop_unproductive(g, origin) if supported(g) else _drop_dead(g)
    by_lhs: dict = {}
    for r in rules:
        by_lhs.setdefault(r.lhs, []).append(r)
    reach = {g.start}
    todo = [g.start]
    while todo:
        A = todo.pop()
        for r in by_lhs.get(A, ()):
            for s in subterms(r.body):
                if isinstance(s, NT) and s.name not in reach:
                    reach.add(s.name)
                    todo.append(s.name)
    kept = [r for r in rules if r.lhs in reach]
    nts = {A: s for A, s in g.nonterminals.items() if A in reach}
    return g.replace(nonterminals=nts, rules=tuple(kept))


def _drop_unproductive(g: Grammar, origin: dict | None = None) -> list[Rule]:
    mw = MinWeight(g, {}, 1)
    out = []
    for r in g.rules:
        env = {x: mw.top(s) for x, s in g.param_sorts(r).items()}
        if is_bottom(mw.value(r.body, env), 1):
            continue

        def clean(t: Term) -> Term:
            if isinstance(t, Choice):
                keep = [clean(i) for i in t.items if not is_bottom(mw.value(i, env), 1)]
                return choice(keep) if keep else t
            if isinstance(t, App):
                return App(clean(t.fun), clean(t.arg))
            return t

        new = Rule(r.lhs, r.params, clean(r.body))
        if origin is not None:
            origin.setdefault(new, r)
        out.append(new)
    return out


def _drop_dead(g: Grammar) -> list[Rule]:
    """Cruder fallback for higher orders: least fixpoint of live heads."""
    alive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in alive and _alive(r.body, alive):
                alive.add(r.lhs)
                changed = True
    return [r for r in g.rules if _alive(r.body, alive)]


def _alive(t: Term, alive: set) -> bool:
    if isinstance(t, Choice):
        return any(_alive(i, alive) for i in t.items)
    head, args = spine(t)
    if isinstance(head, NT):
        return head.name in alive
    if isinstance(head, Tm):
        return all(_alive(a, alive) for a in args)
    return True


__all__ = [
    "ITy1",
    "T",
    "ity_arrow",
    "ity_order",
    "render",
    "parse_ity",
    "refines",
    "enumerate_refinements",
    "target_sort",
    "env_union",
    "transform_term1",
    "transform_grammar1",
    "transform_grammar1_report",
    "prune_grammar",
    "subscript",
    "TransResult",
    "Deriv",
]
