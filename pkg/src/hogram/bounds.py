"""Lower bounds on yield weight, used to prune bounded enumeration.

Each terminal ``a`` of arity k is given a weight ``w(a)``; the weight of a
tree is the sum of its node weights.  For a closed term of sort ``o`` we
compute the least weight of any tree it can reach, saturated at ``cap``.

Values are min-plus abstractions: an ``o`` value is an int in ``[0, cap]``
and an order-1 value is a nested tuple indexed by its base arguments.  Full
nonterminal applications are solved as a system of equations, iterating
downward from ``cap`` with a worklist.  This is exact for grammars of order
at most 2; for higher orders :class:`MinWeight` reports 0 (no pruning).

Table arguments of a call are first weakened to the pointwise smaller
shape ``max(t(0..0), n1 + .. + nk + c)``.  Values are monotone, so the result
is still a lower bound, and the number of distinct calls stays small.

With ``step_cost=1`` and zero weights the same machinery bounds how many
rewriting steps a term needs before it becomes a tree.
"""

from __future__ import annotations

from typing import Mapping

from .grammar import Grammar
from .sorts import sort_arity, sort_order, split
from .terms import NT, Choice, Term, Tm, Var, spine


class _OutOfWork(Exception):
    pass


class MinWeight:
    def __init__(self, g: Grammar, weights: Mapping[str, int], cap: int, step_cost: int = 0,
                 max_work: int | None = None):
        self.g = g
        self.step_cost = step_cost
        self.budget_left = max_work
        self.w = dict(weights)
        self.cap = cap
        self.enabled = supported(g)
        self.values: dict = {}
        self.readers: dict = {}
        self.work: list = []
        self._reading = None
        self._cache: dict = {}
        self._weak: dict = {}
        self._closed: dict = {}
        self._pass = None

    # -- public ---------------------------------------------------------
    def lower_bound(self, t: Term) -> int:
        """Least weight of a tree reachable from closed ``t`` (sort o), capped."""
        if not self.enabled:
            return 0
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        try:
            v = self.value(t)
        except _OutOfWork:
            self.enabled = False  # 0 is always a valid bound
            return 0
        if len(self._cache) > 100_000:
            self._cache.clear()
        self._cache[t] = v
        return v

    def value(self, t: Term, env=None):
        """Abstract value of ``t`` (int or table) under ``env``."""
        env = env or {}
        while True:
            self._reading = None
            n = len(self.values)
            # closed subterms are memoised; the memo is kept only when the
            # pass created no new calls, i.e. when its values are final
            self._pass = None if env else {}
            v = self._eval(t, env)
            memo, self._pass = self._pass, None
            if len(self.values) == n:
                if memo:
                    if len(self._closed) > 200_000:
                        self._closed.clear()
                    self._closed.update(memo)
                return v
            self._solve()

    def top(self, s) -> object:
        """The least-weight value of sort ``s`` (order at most 1)."""
        return self._table(lambda rest: 0, sort_arity(s))

    # -- evaluation -----------------------------------------------------
    def _sat(self, n: int) -> int:
        return n if n < self.cap else self.cap

    def _table(self, fn, k: int):
        rng = range(self.cap + 1)
        if k == 0:
            return fn(())
        return tuple(self._table(lambda rest, n=n: fn((n,) + rest), k - 1) for n in rng)

    def _min(self, a, b):
        if isinstance(a, int):
            return a if a <= b else b
        return tuple(self._min(x, y) for x, y in zip(a, b))

    def _eval(self, t: Term, env):
        memo = self._pass
        if memo is not None:
            hit = self._closed.get(t)
            if hit is None:
                hit = memo.get(t)
            if hit is not None:
                return hit
            v = self._eval_raw(t, env)
            memo[t] = v
            return v
        return self._eval_raw(t, env)

    def _eval_raw(self, t: Term, env):
        if self.budget_left is not None:
            self.budget_left -= 1
            if self.budget_left < 0:
                raise _OutOfWork
        if isinstance(t, Choice):
            vals = [self._eval(i, env) for i in t.items]
            out = vals[0]
            for v in vals[1:]:
                out = self._min(out, v)
            return out
        head, args = spine(t)
        vals = [self._eval(a, env) for a in args]
        if isinstance(head, Var):
            v = env[head.name]
            for a in vals:
                v = v[a]
            return v
        if isinstance(head, Choice):
            v = self._eval(head, env)
            for a in vals:
                v = v[a]
            return v
        if isinstance(head, Tm):
            k = self.g.terminals[head.name]
            base = self.w.get(head.name, 0) + sum(vals)
            missing = k - len(vals)
            return self._table(lambda rest: self._sat(base + sum(rest)), missing)
        if isinstance(head, NT):
            k = sort_arity(self.g.nonterminals[head.name])
            missing = k - len(vals)
            pre = tuple(vals)
            return self._table(lambda rest: self._call(head.name, pre + rest), missing)
        raise TypeError(t)

    def _weaken(self, t):
        hit = self._weak.get(t)
        if hit is not None:
            return hit
        entries = []

        def walk(v, total):
            if isinstance(v, int):
                entries.append((v, total))
            else:
                for n, x in enumerate(v):
                    walk(x, total + n)

        walk(t, 0)
        floor = entries[0][0]
        # saturated entries satisfy any bound below the cap
        c = min((v - n for v, n in entries if v < self.cap), default=self.cap)
        depth = 0
        v = t
        while not isinstance(v, int):
            depth += 1
            v = v[0]
        out = self._table(lambda rest: max(floor, min(self.cap, sum(rest) + c)), depth)
        self._weak[t] = out
        return out

    def _call(self, name: str, args: tuple) -> int:
        if any(not isinstance(a, int) for a in args):
            args = tuple(a if isinstance(a, int) else self._weaken(a) for a in args)
        key = (name, args)
        v = self.values.get(key)
        if v is None:
            v = self.values[key] = self.cap
            self.readers[key] = set()
            self.work.append(key)
        if self._reading is not None:
            self.readers[key].add(self._reading)
        return v

    def _solve(self) -> None:
        work = self.work
        queued = set(work)
        while work:
            key = work.pop()
            queued.discard(key)
            name, args = key
            best = self.cap
            for r in self.g.rules_for(name):
                self._reading = key
                v = self._eval(r.body, dict(zip(r.params, args)))
                if self.step_cost:
                    v = self._sat(v + self.step_cost)
                self._reading = None
                if v < best:
                    best = v
                    if best == 0:
                        break
            if best < self.values[key]:
                self.values[key] = best
                for rd in self.readers[key]:
                    if rd not in queued:
                        queued.add(rd)
                        work.append(rd)
        self._reading = None


def supported(g: Grammar) -> bool:
    """Order at most 2, so every parameter value is an int or a table."""
    return all(sort_order(a) <= 1 for s in g.nonterminals.values() for a in split(s)[0])


def is_bottom(v, cap: int) -> bool:
    if isinstance(v, int):
        return v >= cap
    return all(is_bottom(x, cap) for x in v)
