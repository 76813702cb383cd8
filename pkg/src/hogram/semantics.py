"""Reduction and bounded enumeration of tree, word and frontier languages.

Reductions happen only at a nonterminal head or below a terminal, so the
redexes of a term are disjoint and independent.  Any reduction sequence can
therefore be reordered to leftmost-outermost order without changing its
length, and enumeration explores only that order.  :func:`reduce_step` keeps
the full one-step relation for testing.

Word and frontier slices run a small machine whose state is the emitted
prefix plus a stack of pending closed terms of sort ``o``.  Terminal nodes
are consumed for free; rewriting a nonterminal or narrowing a set costs one
step, exactly as in the tree semantics.  When a length bound is given, a
state is dropped as soon as the prefix plus a lower bound on what the
pending terms must still emit exceeds it (see :mod:`hogram.bounds`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .bounds import MinWeight
from .errors import NotAWordGrammar
from .ext import ext_substitute, instantiator, subst_plain
from .grammar import END, Grammar, is_word_grammar
from .terms import NT, Choice, Term, Tm, alternatives, app, shared_size, size, spine

Word = tuple  # tuple[str, ...]

DEFAULT_SIZE_CAP = 10_000
DEFAULT_MAX_STATES = 2_000_000
STEP_BOUND_CAP = 12
BOUND_WORK = 300_000  # evaluated term nodes before a bound gives up (and stops pruning)


@dataclass(frozen=True)
class Tree:
    node: str
    children: tuple = ()

    def __str__(self) -> str:
        if not self.children:
            return self.node
        parts = [self.node]
        for c in self.children:
            s = str(c)
            parts.append(f"({s})" if c.children else s)
        return " ".join(parts)

    def __lt__(self, other: "Tree") -> bool:
        return str(self) < str(other)


def tree_of_term(t: Term) -> Tree | None:
    """The tree denoted by ``t``, or None if ``t`` is not a value."""
    head, args = spine(t)
    if not isinstance(head, Tm):
        return None
    kids = []
    for a in args:
        k = tree_of_term(a)
        if k is None:
            return None
        kids.append(k)
    return Tree(head.name, tuple(kids))


def term_of_tree(p: Tree) -> Term:
    return app(Tm(p.node), *[term_of_tree(c) for c in p.children])


def leaves(p: Tree) -> Word:
    if not p.children:
        return (p.node,)
    out: list[str] = []
    stack = [p]
    while stack:
        q = stack.pop()
        if q.children:
            stack.extend(reversed(q.children))
        else:
            out.append(q.node)
    return tuple(out)


def remeps(w: Iterable[str]) -> Word:
    return tuple(a for a in w if a != END)


def le_epsilon(words: Iterable[Word]) -> frozenset:
    """Drop the single-letter word ``e``; add the empty word if it was there."""
    out = set()
    for w in words:
        out.add(() if tuple(w) == (END,) else tuple(w))
    return frozenset(out)


def format_word(w: Word) -> str:
    return " ".join(w) if w else "ε"


def parse_word(s: str) -> Word:
    s = s.strip()
    return () if s in ("", "ε") else tuple(s.split())


# --- one-step reduction ------------------------------------------------------


def rewrite_head(g: Grammar, t: Term) -> set[Term]:
    """Successors of ``t`` obtained by rewriting its head nonterminal."""
    head, args = spine(t)
    out: set[Term] = set()
    for r in g.rules_for(head.name):
        if g.extended or any(isinstance(a, Choice) for a in args):
            out |= ext_substitute({x: alternatives(a) for x, a in zip(r.params, args)}, r.body)
        else:
            out.add(instantiator(r.params, r.body)(args))
    return out


def reduce_step(g: Grammar, t: Term) -> set[Term]:
    """All one-step successors of a term of sort o."""
    head, args = spine(t)
    if isinstance(head, NT):
        return rewrite_head(g, t)
    if not isinstance(head, Tm):
        return set()
    out: set[Term] = set()
    for i, a in enumerate(args):
        if isinstance(a, Choice):
            news = a.items
        else:
            news = reduce_step(g, a)
        for n in news:
            out.add(app(head, *args[:i], n, *args[i + 1 :]))
    return out


def _leftmost_step(g: Grammar, t: Term) -> set[Term] | None:
    """Successors via the leftmost redex, or None if ``t`` is a value."""
    head, args = spine(t)
    if isinstance(head, NT):
        return rewrite_head(g, t)
    for i, a in enumerate(args):
        if isinstance(a, Choice):
            news = set(a.items)
        else:
            news = _leftmost_step(g, a)
            if news is None:
                continue
        return {app(head, *args[:i], n, *args[i + 1 :]) for n in news}
    return None


@dataclass
class TreeSlice:
    trees: frozenset
    truncated: bool
    states: int


def enumerate_trees_report(
    g: Grammar,
    budget: int,
    *,
    strategy: str = "leftmost",
    size_cap: int = DEFAULT_SIZE_CAP,
    max_states: int = DEFAULT_MAX_STATES,
) -> TreeSlice:
    start = NT(g.start)
    seen = {start}
    layer = [start]
    trees: set[Tree] = set()
    truncated = False
    for depth in range(budget + 1):
        nxt = []
        for t in layer:
            p = tree_of_term(t)
            if p is not None:
                trees.add(p)
                continue
            if depth == budget:
                continue
            succ = reduce_step(g, t) if strategy == "full" else _leftmost_step(g, t)
            for s in succ or ():
                if s in seen:
                    continue
                if size(s) > size_cap:
                    truncated = True
                    continue
                if len(seen) >= max_states:
                    truncated = True
                    break
                seen.add(s)
                nxt.append(s)
        layer = nxt
    return TreeSlice(frozenset(trees), truncated, len(seen))


def enumerate_trees(g: Grammar, budget: int, **kw) -> frozenset:
    """Trees reachable from the start symbol in at most ``budget`` steps."""
    return enumerate_trees_report(g, budget, **kw).trees


# --- the frontier machine ---------------------------------------------------


@dataclass
class WordSlice:
    words: frozenset
    truncated: bool = False
    states: int = 0
    budget: int = 0
    max_len: int | None = None
    complete: bool = False  # no live state was cut by the budget

    def __iter__(self):
        return iter(self.words)


MODES = ("word", "frontier", "remeps")


def _weights(g: Grammar, mode: str) -> dict[str, int]:
    w = {}
    for a, k in g.terminals.items():
        if mode == "word":
            w[a] = 1 if k == 1 else 0
        elif mode == "frontier":
            w[a] = 1 if k == 0 else 0
        else:
            w[a] = 1 if (k == 0 and a != END) else 0
    return w


_BOUNDS: list = []  # (grammar, key, MinWeight); the last few, newest first


def _bound(g: Grammar, weights: dict, cap: int, step_cost: int) -> MinWeight:
    """A shared bound object, so repeated runs on one grammar reuse solved calls."""
    key = (tuple(sorted(weights.items())), cap, step_cost)
    for i, (h, k, mw) in enumerate(_BOUNDS):
        if h is g and k == key:
            _BOUNDS.insert(0, _BOUNDS.pop(i))
            return mw
    mw = MinWeight(g, weights, cap, step_cost=step_cost, max_work=BOUND_WORK)
    _BOUNDS.insert(0, (g, key, mw))
    del _BOUNDS[8:]
    return mw


def explore(
    g: Grammar,
    budget: int,
    mode: str = "frontier",
    max_len: int | None = None,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
    max_states: int = DEFAULT_MAX_STATES,
    prune: bool = True,
    targets: Iterable[Word] | None = None,
) -> WordSlice:
    """Breadth-first run of the frontier machine.

    ``mode`` selects what is emitted: ``word`` reads unary letters down a
    chain ending in ``e``; ``frontier`` reads every leaf; ``remeps`` reads
    every leaf other than ``e``.

    With ``targets`` the run only looks for those words: states whose
    prefix extends none of them are dropped, and the run stops once all
    of them are found.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "word" and not is_word_grammar(g):
        raise NotAWordGrammar("word slices need unary terminals and e")
    weights = _weights(g, mode)
    lb = _bound(g, weights, max_len + 1, 0) if (prune and max_len is not None) else None
    steps = _bound(g, {}, min(budget, STEP_BOUND_CAP) + 1, 1) if prune else None

    def too_slow(depth: int, pending) -> bool:
        """True when the pending terms cannot all finish within the budget."""
        if steps is None or not steps.enabled:
            return False
        n = depth
        for t in pending:
            n += steps.lower_bound(t)
            if n > budget:
                return True
        return False

    def settle(prefix: tuple, pending: tuple):
        """Consume terminal structure for free; return the settled state or a word."""
        pending = list(pending)
        prefix = list(prefix)
        while pending:
            t = pending[-1]
            if isinstance(t, Choice):
                break
            head, args = spine(t)
            if not isinstance(head, Tm):
                break
            pending.pop()
            if weights[head.name]:
                prefix.append(head.name)
            pending.extend(reversed(args))
        return tuple(prefix), tuple(pending)

    def too_long(prefix, pending) -> bool:
        if max_len is None:
            return False
        n = len(prefix)
        if n > max_len:
            return True
        if lb is None:
            return False
        for t in pending:
            n += lb.lower_bound(t)
            if n > max_len:
                return True
        return False

    want = None
    prefixes = None
    if targets is not None:
        want = set(map(tuple, targets))
        prefixes = {w[:i] for w in want for i in range(len(w) + 1)}

    words: set[Word] = set()
    truncated = False
    cut = False
    first = settle((), (NT(g.start),))
    seen = {first}
    layer = [first] if not too_long(*first) else []
    for depth in range(budget + 1):
        nxt = []
        for prefix, pending in layer:
            if not pending:
                words.add(prefix)
                if want is not None:
                    want.discard(prefix)
                continue
            if depth == budget:
                cut = True
                continue
            t = pending[-1]
            rest = pending[:-1]
            succ = t.items if isinstance(t, Choice) else rewrite_head(g, t)
            for s in succ:
                if shared_size(s, size_cap) > size_cap:
                    truncated = True
                    continue
                state = settle(prefix, rest + (s,))
                if state in seen:
                    continue
                if too_long(*state):
                    continue
                if prefixes is not None and state[0] not in prefixes:
                    continue
                if too_slow(depth + 1, state[1]):
                    cut = True
                    continue
                if len(seen) >= max_states:
                    truncated = True
                    break
                seen.add(state)
                nxt.append(state)
        layer = nxt
        if not layer:
            break
        if want is not None and not want:
            break
    return WordSlice(frozenset(words), truncated, len(seen), budget, max_len, complete=not cut and not truncated)


def word_language_slice(g: Grammar, budget: int, max_len: int | None = None, **kw) -> frozenset:
    """Words a1..an with a1(..(an e)..) reachable within ``budget`` steps."""
    return explore(g, budget, "word", max_len, **kw).words


def frontier_slice(g: Grammar, budget: int, max_len: int | None = None, **kw) -> frozenset:
    return explore(g, budget, "frontier", max_len, **kw).words


def remeps_slice(g: Grammar, budget: int, max_len: int | None = None, **kw) -> frozenset:
    """``remeps`` of the frontier slice, restricted to length ``max_len``."""
    return explore(g, budget, "remeps", max_len, **kw).words


def le_epsilon_report(g: Grammar, budget: int, max_len: int | None = None, **kw) -> WordSlice:
    inner = None if max_len is None else max(max_len, 1)
    if kw.get("targets") is not None:
        kw["targets"] = [w if w else (END,) for w in kw["targets"]]
    rep = explore(g, budget, "frontier", inner, **kw)
    words = le_epsilon(rep.words)
    if max_len is not None:
        words = frozenset(w for w in words if len(w) <= max_len)
    rep.words = words
    rep.max_len = max_len
    return rep


def le_epsilon_slice(g: Grammar, budget: int, max_len: int | None = None, **kw) -> frozenset:
    return le_epsilon_report(g, budget, max_len, **kw).words


def e_inside(g: Grammar, budget: int, max_len: int, **kw) -> tuple[Word | None, bool]:
    """A shortest ε-frontier word that contains ``e``, or None; plus the truncation flag.

    Erasing the ``e`` leaves shortens words, so a violation that matters at
    length ``n`` may only show up in longer frontier words; callers pick
    ``max_len`` with that in mind.
    """
    rep = le_epsilon_report(g, budget, max_len, **kw)
    bad = sorted((w for w in rep.words if END in w), key=lambda w: (len(w), w))
    return (bad[0] if bad else None), rep.truncated


def slice_report(g: Grammar, kind: str, budget: int, max_len: int | None = None, **kw) -> WordSlice:
    """Dispatch on ``kind``: ``word``, ``frontier``, ``remeps`` or ``le``."""
    if kind == "le":
        return le_epsilon_report(g, budget, max_len, **kw)
    return explore(g, budget, kind, max_len, **kw)


__all__ = [
    "Tree",
    "Word",
    "reduce_step",
    "enumerate_trees",
    "enumerate_trees_report",
    "leaves",
    "remeps",
    "le_epsilon",
    "word_language_slice",
    "frontier_slice",
    "remeps_slice",
    "le_epsilon_slice",
    "le_epsilon_slice",
    "e_inside",
    "slice_report",
    "format_word",
    "parse_word",
    "tree_of_term",
    "term_of_tree",
]
