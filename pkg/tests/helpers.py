"""Small shared helpers for the test modules."""

from hogram.syntax import parse_grammar
from hogram.semantics import parse_word


def G(text: str, **kw):
    return parse_grammar(text, **kw)


def words(*items: str) -> frozenset:
    return frozenset(parse_word(s) for s in items)


def ww_language(max_half: int) -> frozenset:
    """{ww : w in {a,b}+, |w| <= max_half}, built by brute force."""
    out = set()
    layer = [()]
    for _ in range(max_half):
        layer = [w + (c,) for w in layer for c in "ab"]
        out.update(w + w for w in layer)
    return frozenset(out)
