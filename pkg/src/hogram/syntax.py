"""Text format for grammars.

::

    # the copy language { ww }
    %terminal a 1
    %terminal b 1
    %terminal e 0
    %nonterminal S o
    %nonterminal F (o -> o) -> o
    %start S
    S = F a.
    F f = f (f e).

Headers ``%extended`` (term sets ``{ t1 | t2 }`` allowed in argument
positions) and ``%generated`` (names starting with ``$`` allowed) are written
by the printer when needed.  Identifiers may carry subscripts ``'{...}``
with balanced braces, e.g. ``F'{(T->T)->T}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateDeclaration, GrammarSyntaxError, UnknownSymbol
from .grammar import GENERATED_PREFIX, Grammar, Rule, ensure_valid
from .sorts import O, Arrow, Sort
from .terms import NT, App, Term, Tm, Var, choice, show

_IDENT_START = re.compile(r"\$?[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"\d+")


@dataclass
class _Tok:
    kind: str  # ident | int | directive | sym | nl | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col0 = 0, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        col = i - col0 + 1
        if c == "\n":
            toks.append(_Tok("nl", "\n", line, col))
            i += 1
            line += 1
            col0 = i
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "%":
            m = re.compile(r"%[A-Za-z]+").match(text, i)
            if not m:
                raise GrammarSyntaxError("bad directive", line, col)
            toks.append(_Tok("directive", m.group(), line, col))
            i = m.end()
            continue
        if text.startswith("->", i):
            toks.append(_Tok("sym", "->", line, col))
            i += 2
            continue
        if c in "(){}|=.":
            toks.append(_Tok("sym", c, line, col))
            i += 1
            continue
        m = _INT.match(text, i)
        if m:
            toks.append(_Tok("int", m.group(), line, col))
            i = m.end()
            continue
        m = _IDENT_START.match(text, i)
        if m:
            j = m.end()
            while j < n and text[j] == "'":
                j += 1
                if j < n and text[j] == "{":
                    depth = 0
                    while j < n:
                        if text[j] == "{":
                            depth += 1
                        elif text[j] == "}":
                            depth -= 1
                            if depth == 0:
                                j += 1
                                break
                        elif text[j] == "\n":
                            raise GrammarSyntaxError("unterminated subscript", line, col)
                        j += 1
                    else:
                        raise GrammarSyntaxError("unterminated subscript", line, col)
            toks.append(_Tok("ident", text[i:j], line, col))
            i = j
            continue
        raise GrammarSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, i - col0 + 1))
    return toks


# raw terms before name resolution
@dataclass
class _RName:
    name: str
    line: int
    col: int


@dataclass
class _RApp:
    fun: object
    arg: object


@dataclass
class _RSet:
    items: list


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise GrammarSyntaxError(msg, tok.line, tok.col)

    def skip_nl(self):
        while self.tok.kind == "nl":
            self.pos += 1

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text if t.kind not in ("nl", "eof") else t.kind
            self.error(f"expected {want!r}, got {got!r}")
        self.pos += 1
        return t

    def end_of_line(self):
        if self.tok.kind not in ("nl", "eof"):
            self.error(f"unexpected {self.tok.text!r} at end of declaration")

    # sorts: atom ('->' sort)?
    def sort(self) -> Sort:
        left = self.sort_atom()
        if self.tok.kind == "sym" and self.tok.text == "->":
            self.pos += 1
            return Arrow(left, self.sort())
        return left

    def sort_atom(self) -> Sort:
        t = self.tok
        if t.kind == "ident" and t.text == "o":
            self.pos += 1
            return O
        if t.kind == "sym" and t.text == "(":
            self.pos += 1
            s = self.sort()
            self.expect("sym", ")")
            return s
        self.error(f"expected a sort, got {t.text!r}")

    # terms
    def term(self, allow_sets: bool):
        self.skip_nl()
        head = self.atom(allow_sets, head=True)
        while True:
            self.skip_nl()
            t = self.tok
            if t.kind == "ident" or (t.kind == "sym" and t.text in "({"):
                head = _RApp(head, self.atom(allow_sets, head=False))
            else:
                return head

    def atom(self, allow_sets: bool, head: bool):
        self.skip_nl()
        t = self.tok
        if t.kind == "ident":
            self.pos += 1
            return _RName(t.text, t.line, t.col)
        if t.kind == "sym" and t.text == "(":
            self.pos += 1
            inner = self.term(allow_sets)
            self.skip_nl()
            self.expect("sym", ")")
            return inner
        if t.kind == "sym" and t.text == "{":
            if not allow_sets:
                self.error("term sets need the %extended header")
            if head:
                self.error("a term set cannot be applied")
            self.pos += 1
            items = [self.term(allow_sets)]
            self.skip_nl()
            while self.tok.kind == "sym" and self.tok.text == "|":
                self.pos += 1
                items.append(self.term(allow_sets))
                self.skip_nl()
            self.expect("sym", "}")
            return _RSet(items)
        self.error(f"expected a term, got {t.text or t.kind!r}")


def parse_grammar(text: str, *, check: bool = True) -> Grammar:
    """Parse the text format.  With ``check`` the result must validate."""
    p = _Parser(text)
    terminals: dict[str, int] = {}
    nonterminals: dict[str, Sort] = {}
    start: str | None = None
    extended = False
    generated = False
    raw_rules = []
    decl_pos: dict[str, _Tok] = {}

    def declare(tok: _Tok):
        if tok.text in decl_pos:
            raise DuplicateDeclaration(f"{tok.line}:{tok.col}: {tok.text} declared twice")
        decl_pos[tok.text] = tok

    while True:
        p.skip_nl()
        t = p.tok
        if t.kind == "eof":
            break
        if t.kind == "directive":
            p.pos += 1
            d = t.text
            if d == "%extended":
                extended = True
            elif d == "%generated":
                generated = True
            elif d == "%terminal":
                name = p.expect("ident")
                declare(name)
                terminals[name.text] = int(p.expect("int").text)
            elif d == "%nonterminal":
                name = p.expect("ident")
                declare(name)
                nonterminals[name.text] = p.sort()
            elif d == "%start":
                if start is not None:
                    p.error("duplicate %start", t)
                start = p.expect("ident").text
            else:
                p.error(f"unknown directive {d}", t)
            p.end_of_line()
            continue
        lhs = p.expect("ident")
        params = []
        while p.tok.kind == "ident":
            params.append(p.tok)
            p.pos += 1
        p.skip_nl()
        p.expect("sym", "=")
        body = p.term(allow_sets=True)
        p.skip_nl()
        p.expect("sym", ".")
        raw_rules.append((lhs, params, body))

    if start is None:
        raise GrammarSyntaxError("missing %start", 1, 1)

    if not generated:
        for name, tok in decl_pos.items():
            if name.startswith(GENERATED_PREFIX):
                raise GrammarSyntaxError(f"{name}: names starting with $ are reserved", tok.line, tok.col)

    rules = []
    for lhs, params, body in raw_rules:
        if lhs.text not in nonterminals:
            raise UnknownSymbol(f"{lhs.line}:{lhs.col}: rule for undeclared nonterminal {lhs.text}")
        names = [q.text for q in params]
        for q in params:
            if q.text in terminals or q.text in nonterminals:
                raise DuplicateDeclaration(f"{q.line}:{q.col}: parameter {q.text} shadows a declared symbol")
            if q.text.startswith(GENERATED_PREFIX) and not generated:
                raise GrammarSyntaxError(f"{q.text}: names starting with $ are reserved", q.line, q.col)
        term = _resolve(body, set(names), terminals, nonterminals, extended)
        rules.append(Rule(lhs.text, tuple(names), term))

    g = Grammar(terminals, nonterminals, tuple(rules), start, extended)
    if check:
        ensure_valid(g)
    return g


def _resolve(raw, params, terminals, nonterminals, extended) -> Term:
    if isinstance(raw, _RName):
        if raw.name in params:
            return Var(raw.name)
        if raw.name in terminals:
            return Tm(raw.name)
        if raw.name in nonterminals:
            return NT(raw.name)
        raise UnknownSymbol(f"{raw.line}:{raw.col}: unknown symbol {raw.name}")
    if isinstance(raw, _RApp):
        return App(
            _resolve(raw.fun, params, terminals, nonterminals, extended),
            _resolve(raw.arg, params, terminals, nonterminals, extended),
        )
    if isinstance(raw, _RSet):
        return choice(_resolve(i, params, terminals, nonterminals, extended) for i in raw.items)
    raise TypeError(raw)


def print_grammar(g: Grammar) -> str:
    lines = []
    if g.extended:
        lines.append("%extended")
    if any(n.startswith(GENERATED_PREFIX) for n in g.names()):
        lines.append("%generated")
    for a in sorted(g.terminals):
        lines.append(f"%terminal {a} {g.terminals[a]}")
    for A in sorted(g.nonterminals):
        lines.append(f"%nonterminal {A} {g.nonterminals[A]}")
    lines.append(f"%start {g.start}")
    if g.rules:
        lines.append("")
    for r in g.rules:
        lines.append(str(r))
    return "\n".join(lines) + "\n"


def print_rules(g: Grammar) -> list[str]:
    return [str(r) for r in g.rules]


def parse_term(text: str, grammar: Grammar, params=()) -> Term:
    """Parse a single term against a grammar's declarations."""
    p = _Parser(text)
    raw = p.term(allow_sets=True)
    p.skip_nl()
    p.expect("eof")
    return _resolve(raw, set(params), grammar.terminals, grammar.nonterminals, True)


def parse_sort(text: str) -> Sort:
    p = _Parser(text)
    s = p.sort()
    p.skip_nl()
    p.expect("eof")
    return s


def normalize_text(text: str) -> str:
    return print_grammar(parse_grammar(text, check=False))


__all__ = ["parse_grammar", "print_grammar", "parse_term", "parse_sort", "show", "normalize_text"]
