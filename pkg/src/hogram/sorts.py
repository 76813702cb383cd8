"""Simple types (sorts) over the single base type ``o``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


class Sort:
    __slots__ = ()

    @property
    def order(self) -> int:
        return sort_order(self)

    @property
    def arity(self) -> int:
        return sort_arity(self)


@dataclass(frozen=True)
class Base(Sort):
    def __str__(self) -> str:
        return "o"

    def __repr__(self) -> str:
        return "O"


@dataclass(frozen=True)
class Arrow(Sort):
    dom: Sort
    cod: Sort

    def __str__(self) -> str:
        d = str(self.dom)
        if isinstance(self.dom, Arrow):
            d = f"({d})"
        return f"{d} -> {self.cod}"

    def __repr__(self) -> str:
        return f"Arrow({self.dom!r}, {self.cod!r})"


O = Base()


def arrow(*sorts: Sort) -> Sort:
    """Right-associated arrow: ``arrow(a, b, c) == a -> (b -> c)``."""
    if not sorts:
        raise ValueError("arrow() needs at least one sort")
    result = sorts[-1]
    for s in reversed(sorts[:-1]):
        result = Arrow(s, result)
    return result


def base_fn(k: int) -> Sort:
    """The sort ``o -> ... -> o`` with ``k`` arguments (a k-ary terminal)."""
    return arrow(*([O] * (k + 1)))


@lru_cache(maxsize=None)
def sort_order(s: Sort) -> int:
    if isinstance(s, Arrow):
        return max(sort_order(s.dom) + 1, sort_order(s.cod))
    return 0


@lru_cache(maxsize=None)
def sort_arity(s: Sort) -> int:
    if isinstance(s, Arrow):
        return 1 + sort_arity(s.cod)
    return 0


def split(s: Sort) -> tuple[list[Sort], Sort]:
    """Argument sorts and final result of ``s``."""
    args = []
    while isinstance(s, Arrow):
        args.append(s.dom)
        s = s.cod
    return args, s


def drop_args(s: Sort, n: int) -> Sort:
    for _ in range(n):
        if not isinstance(s, Arrow):
            raise ValueError(f"sort {s} has fewer than {n} arguments")
        s = s.cod
    return s


def subsorts(s: Sort):
    """Every sort occurring in ``s``, including ``s`` itself."""
    yield s
    if isinstance(s, Arrow):
        yield from subsorts(s.dom)
        yield from subsorts(s.cod)
