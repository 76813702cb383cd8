"""Applicative terms, extended with argument-position choice sets.

A plain application ``t1 t2`` and the extended application ``t1 {t2}`` are
the same value: :func:`choice` collapses singleton sets, so ``Choice`` nodes
always carry at least two distinct alternatives.
"""

from __future__ import annotations

import zlib
from typing import Iterable, Iterator
from weakref import WeakValueDictionary

from .sorts import Sort


_MASK = (1 << 64) - 1


def _mix(a: int, b: int) -> int:
    """Deterministic (unsalted) combination for structural digests."""
    return ((a * 0x100000001B3) ^ (b + 0x9E3779B97F4A7C15 + ((a << 6) & _MASK) + (a >> 2))) & _MASK


_APPS: WeakValueDictionary = WeakValueDictionary()
_CHOICES: WeakValueDictionary = WeakValueDictionary()


class Term:
    """Base class.  Subclasses cache their hash; terms are immutable."""

    __slots__ = ("_hash", "_dig", "has_var")

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {show(self)}>"

    def __str__(self) -> str:
        return show(self)

    def __lt__(self, other: "Term") -> bool:
        return term_key(self) < term_key(other)


class _Atom(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash((type(self).__name__, name)))
        object.__setattr__(self, "_dig", zlib.crc32(f"{type(self).__name__}:{name}".encode()))
        object.__setattr__(self, "has_var", type(self) is Var)

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other) -> bool:
        return self is other or (type(other) is type(self) and other.name == self.name)

    __hash__ = Term.__hash__

    def __reduce__(self):
        return (type(self), (self.name,))


class Var(_Atom):
    __slots__ = ()


class NT(_Atom):
    __slots__ = ()


class Tm(_Atom):
    __slots__ = ()


class App(Term):
    """Application.  Nodes are hash-consed, so equal applications built from
    interned parts are one object and equality is usually an identity test."""

    __slots__ = ("fun", "arg", "__weakref__")

    def __new__(cls, fun: Term, arg: Term):
        key = (fun, arg)
        hit = _APPS.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        object.__setattr__(self, "fun", fun)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_hash", hash(("@", fun._hash, arg._hash)))
        object.__setattr__(self, "_dig", _mix(_mix(1, fun._dig), arg._dig))
        object.__setattr__(self, "has_var", fun.has_var or arg.has_var)
        _APPS[key] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            type(other) is App
            and other._hash == self._hash
            and other.fun == self.fun
            and other.arg == self.arg
        )

    __hash__ = Term.__hash__

    def __reduce__(self):
        return (App, (self.fun, self.arg))


class Abs(Term):
    __slots__ = ("param", "sort", "body")

    def __init__(self, param: str, sort: Sort | None, body: Term):
        object.__setattr__(self, "param", param)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "_hash", hash(("\\", param, sort, body._hash)))
        object.__setattr__(self, "_dig", _mix(_mix(2, zlib.crc32(f"{param}:{sort}".encode())), body._dig))
        object.__setattr__(self, "has_var", body.has_var)

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            type(other) is Abs
            and other._hash == self._hash
            and other.param == self.param
            and other.sort == self.sort
            and other.body == self.body
        )

    __hash__ = Term.__hash__

    def __reduce__(self):
        return (Abs, (self.param, self.sort, self.body))


class Choice(Term):
    """A nondeterministic set ``{u1 | ... | uk}`` with k >= 2, kept sorted."""

    __slots__ = ("items", "__weakref__")

    def __new__(cls, items: tuple):
        hit = _CHOICES.get(items)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_hash", hash(("{", tuple(i._hash for i in items))))
        d = 3
        for i in items:
            d = _mix(d, i._dig)
        object.__setattr__(self, "_dig", d)
        object.__setattr__(self, "has_var", any(i.has_var for i in items))
        _CHOICES[items] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return type(other) is Choice and other._hash == self._hash and other.items == self.items

    __hash__ = Term.__hash__

    def __reduce__(self):
        return (Choice, (self.items,))


def choice(items: Iterable[Term]) -> Term:
    """Build a choice set; flattens nested sets and collapses singletons."""
    flat: set[Term] = set()
    for t in items:
        if isinstance(t, Choice):
            flat.update(t.items)
        else:
            flat.add(t)
    if not flat:
        raise ValueError("a choice set must be nonempty")
    if len(flat) == 1:
        return next(iter(flat))
    # a stable digest orders the items; printing sorts by text separately,
    # since printing a heavily shared term can be exponential
    return Choice(tuple(sorted(flat, key=lambda u: u._dig)))


def alternatives(t: Term) -> tuple[Term, ...]:
    return t.items if isinstance(t, Choice) else (t,)


def app(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def lam(params: Iterable[str], body: Term, sorts: Iterable[Sort | None] | None = None) -> Term:
    params = list(params)
    sorts = list(sorts) if sorts is not None else [None] * len(params)
    for p, s in zip(reversed(params), reversed(sorts)):
        body = Abs(p, s, body)
    return body


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        yield from subterms(t.fun)
        yield from subterms(t.arg)
    elif isinstance(t, Abs):
        yield from subterms(t.body)
    elif isinstance(t, Choice):
        for i in t.items:
            yield from subterms(i)


def free_vars(t: Term, _memo: dict | None = None) -> set[str]:
    """Free variables; shared subterms are visited once."""
    memo = {} if _memo is None else _memo
    hit = memo.get(id(t))
    if hit is not None:
        return hit
    if isinstance(t, Var):
        out = {t.name}
    elif isinstance(t, App):
        out = free_vars(t.fun, memo) | free_vars(t.arg, memo)
    elif isinstance(t, Abs):
        out = free_vars(t.body, memo) - {t.param}
    elif isinstance(t, Choice):
        out = set()
        for i in t.items:
            out |= free_vars(i, memo)
    else:
        out = set()
    memo[id(t)] = out
    return out


def vars_in_order(t: Term, acc: list[str] | None = None) -> list[str]:
    """Free variables of an applicative term by first textual occurrence."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, App):
        vars_in_order(t.fun, acc)
        vars_in_order(t.arg, acc)
    elif isinstance(t, Choice):
        for i in t.items:
            vars_in_order(i, acc)
    elif isinstance(t, Abs):
        inner = vars_in_order(t.body, [])
        for v in inner:
            if v != t.param and v not in acc:
                acc.append(v)
    return acc


def symbols(t: Term) -> set[Term]:
    """Atoms (variables, nonterminals, terminals) occurring in ``t``."""
    return {s for s in subterms(t) if isinstance(s, _Atom)}


def size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + size(t.fun) + size(t.arg)
    if isinstance(t, Abs):
        return 1 + size(t.body)
    if isinstance(t, Choice):
        return 1 + sum(size(i) for i in t.items)
    return 1


def shared_size(t: Term, cap: int) -> int:
    """Number of distinct nodes of ``t`` as stored (shared subterms count once).

    Stops counting once ``cap`` is exceeded, so the cost is at most ``cap``.
    """
    seen: set[int] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if id(u) in seen:
            continue
        seen.add(id(u))
        if len(seen) > cap:
            break
        if isinstance(u, App):
            stack.append(u.fun)
            stack.append(u.arg)
        elif isinstance(u, Abs):
            stack.append(u.body)
        elif isinstance(u, Choice):
            stack.extend(u.items)
    return len(seen)


def has_choice(t: Term) -> bool:
    return any(isinstance(s, Choice) for s in subterms(t))


def rename(t: Term, mapping) -> Term:
    """Rename atoms.  ``mapping`` maps an atom to its replacement term."""
    if isinstance(t, _Atom):
        return mapping.get(t, t)
    if isinstance(t, App):
        return App(rename(t.fun, mapping), rename(t.arg, mapping))
    if isinstance(t, Choice):
        return choice(rename(i, mapping) for i in t.items)
    if isinstance(t, Abs):
        return Abs(t.param, t.sort, rename(t.body, mapping))
    raise TypeError(t)


def show(t: Term) -> str:
    if isinstance(t, _Atom):
        return t.name
    if isinstance(t, App):
        head, args = spine(t)
        parts = [_show_head(head)]
        for a in args:
            parts.append(_show_arg(a))
        return " ".join(parts)
    if isinstance(t, Choice):
        return "{ " + " | ".join(sorted(show(i) for i in t.items)) + " }"
    if isinstance(t, Abs):
        return f"\\{t.param}. {show(t.body)}"
    raise TypeError(t)


def _show_head(t: Term) -> str:
    if isinstance(t, (Abs, Choice)):
        return f"({show(t)})"
    return show(t)


def _show_arg(t: Term) -> str:
    if isinstance(t, (App, Abs)):
        return f"({show(t)})"
    return show(t)


_KEYS: dict = {}


def term_key(t: Term) -> str:
    """Deterministic sort key (the printed form)."""
    k = _KEYS.get(t)
    if k is None:
        k = show(t)
        if len(_KEYS) > 200_000:
            _KEYS.clear()
        _KEYS[t] = k
    return k
