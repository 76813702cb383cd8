"""Grammars, sort checking and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

from .errors import (
    InvalidGrammar,
    NonBaseRuleBody,
    SortMismatch,
    UnboundSymbol,
)
from .sorts import O, Arrow, Sort, base_fn, sort_arity, sort_order, split, subsorts
from .terms import NT, Abs, App, Choice, Term, Tm, Var, has_choice, show, subterms

END = "e"
BRANCH = "br"
GENERATED_PREFIX = "$"


@dataclass(frozen=True)
class Rule:
    lhs: str
    params: tuple[str, ...]
    body: Term

    def __str__(self) -> str:
        head = " ".join((self.lhs,) + self.params)
        return f"{head} = {show(self.body)}."


@dataclass(frozen=True, eq=False)
class Grammar:
    """A (possibly extended) higher-order grammar.

    Rules are kept grouped by left-hand side (stable within a group), which is
    the order the printer uses; the order carries no meaning.
    """

    terminals: Mapping[str, int]
    nonterminals: Mapping[str, Sort]
    rules: tuple[Rule, ...]
    start: str
    extended: bool = False
    _by_lhs: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "terminals", MappingProxyType(dict(self.terminals)))
        object.__setattr__(self, "nonterminals", MappingProxyType(dict(self.nonterminals)))
        rules = tuple(sorted(self.rules, key=lambda r: r.lhs))
        object.__setattr__(self, "rules", rules)
        by_lhs: dict[str, list[Rule]] = {}
        for r in rules:
            by_lhs.setdefault(r.lhs, []).append(r)
        object.__setattr__(self, "_by_lhs", {k: tuple(v) for k, v in by_lhs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            dict(self.terminals) == dict(other.terminals)
            and dict(self.nonterminals) == dict(other.nonterminals)
            and self.rules == other.rules
            and self.start == other.start
            and self.extended == other.extended
        )

    def __hash__(self) -> int:
        return hash((self.start, self.rules))

    def rules_for(self, lhs: str) -> tuple[Rule, ...]:
        return self._by_lhs.get(lhs, ())

    @cached_property
    def order(self) -> int:
        return max((sort_order(s) for s in self.nonterminals.values()), default=0)

    def param_sorts(self, rule: Rule) -> dict[str, Sort]:
        args, _ = split(self.nonterminals[rule.lhs])
        return dict(zip(rule.params, args))

    def symbol_env(self) -> dict[str, Sort]:
        return dict(self.nonterminals)

    def replace(self, **changes) -> "Grammar":
        data = dict(
            terminals=self.terminals,
            nonterminals=self.nonterminals,
            rules=self.rules,
            start=self.start,
            extended=self.extended,
        )
        data.update(changes)
        return Grammar(**data)

    def names(self) -> set[str]:
        out = set(self.terminals) | set(self.nonterminals)
        for r in self.rules:
            out.update(r.params)
        return out

    def __str__(self) -> str:
        from .syntax import print_grammar

        return print_grammar(self)


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


# --- sort checking ----------------------------------------------------------


def sort_check(
    env: Mapping[str, Sort],
    t: Term,
    terminals: Mapping[str, int] | None = None,
    *,
    extended: bool = True,
) -> Sort:
    """Return the sort of ``t``.

    ``env`` binds variables and nonterminals; ``terminals`` gives arities.
    Abstractions must carry a sort annotation.
    """
    terminals = terminals or {}
    if isinstance(t, (Var, NT)):
        if t.name not in env:
            raise UnboundSymbol(f"unbound symbol {t.name!r}")
        return env[t.name]
    if isinstance(t, Tm):
        if t.name not in terminals:
            raise UnboundSymbol(f"undeclared terminal {t.name!r}")
        return base_fn(terminals[t.name])
    if isinstance(t, App):
        fs = sort_check(env, t.fun, terminals, extended=extended)
        if not isinstance(fs, Arrow):
            raise SortMismatch("a function", fs, show(t))
        a = sort_check(env, t.arg, terminals, extended=extended)
        if a != fs.dom:
            raise SortMismatch(fs.dom, a, show(t.arg))
        return fs.cod
    if isinstance(t, Choice):
        if not extended:
            raise SortMismatch("an ordinary term", "a term set", show(t))
        sorts = {sort_check(env, i, terminals, extended=extended) for i in t.items}
        if len(sorts) != 1:
            found = ", ".join(sorted(str(s) for s in sorts))
            raise SortMismatch("one common sort", found, show(t))
        return sorts.pop()
    if isinstance(t, Abs):
        if t.sort is None:
            raise SortMismatch("an annotated binder", "none", show(t))
        inner = dict(env)
        inner[t.param] = t.sort
        return Arrow(t.sort, sort_check(inner, t.body, terminals, extended=extended))
    raise TypeError(t)


def ext_sort_check(env: Mapping[str, Sort], u: Term, terminals: Mapping[str, int] | None = None) -> Sort:
    return sort_check(env, u, terminals, extended=True)


def rule_env(g: Grammar, rule: Rule) -> dict[str, Sort]:
    env = dict(g.nonterminals)
    env.update(g.param_sorts(rule))
    return env


def check_rule(g: Grammar, rule: Rule) -> None:
    s = sort_check(rule_env(g, rule), rule.body, g.terminals, extended=g.extended)
    if s != O:
        raise NonBaseRuleBody(f"body of {rule.lhs} has sort {s}")


# --- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    code: str
    message: str


@dataclass
class ValidationReport:
    issues: list[Issue]
    order: int

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    def __str__(self) -> str:
        if self.ok:
            return f"valid, order {self.order}"
        return "\n".join(f"{i.code}: {i.message}" for i in self.issues)


def validate(g: Grammar) -> ValidationReport:
    issues: list[Issue] = []

    def add(code, msg):
        issues.append(Issue(code, msg))

    for name, k in g.terminals.items():
        if k < 0:
            add("NegativeArity", f"terminal {name} has arity {k}")
    if END in g.terminals and g.terminals[END] != 0:
        add("BadEndMarker", f"terminal {END} must have arity 0")
    if BRANCH in g.terminals and g.terminals[BRANCH] != 2:
        add("BadBranchArity", f"terminal {BRANCH} must have arity 2")
    clash = set(g.terminals) & set(g.nonterminals)
    for name in sorted(clash):
        add("DuplicateDeclaration", f"{name} declared as terminal and nonterminal")

    if g.start not in g.nonterminals:
        add("StartUndeclared", f"start symbol {g.start} is not a declared nonterminal")
    elif g.nonterminals[g.start] != O:
        add("StartNotBase", f"start symbol {g.start} has sort {g.nonterminals[g.start]}")

    for rule in g.rules:
        if rule.lhs not in g.nonterminals:
            add("UndeclaredNonterminal", f"rule for undeclared {rule.lhs}")
            continue
        if len(set(rule.params)) != len(rule.params):
            add("DuplicateParameter", f"repeated parameter in rule for {rule.lhs}")
        shadow = set(rule.params) & (set(g.terminals) | set(g.nonterminals))
        if shadow:
            add("ParameterShadowsSymbol", f"rule for {rule.lhs} reuses {sorted(shadow)}")
        n = sort_arity(g.nonterminals[rule.lhs])
        if len(rule.params) != n:
            add("ArityMismatch", f"rule for {rule.lhs} has {len(rule.params)} parameters, sort needs {n}")
            continue
        if not g.extended and has_choice(rule.body):
            add("SetInOrdinaryGrammar", f"term set in rule for {rule.lhs}")
            continue
        if any(isinstance(s, Abs) for s in subterms(rule.body)):
            add("AbstractionInBody", f"rule body for {rule.lhs} is not applicative")
            continue
        try:
            check_rule(g, rule)
        except NonBaseRuleBody as exc:
            add("NonBaseRuleBody", str(exc))
        except UnboundSymbol as exc:
            add("UnboundSymbol", f"{rule.lhs}: {exc}")
        except SortMismatch as exc:
            add("SortMismatch", f"{rule.lhs}: {exc}")
    return ValidationReport(issues, g.order)


def ensure_valid(g: Grammar) -> Grammar:
    report = validate(g)
    if not report.ok:
        raise InvalidGrammar(report)
    return g


def is_word_grammar(g: Grammar) -> bool:
    return all((k == 0) if a == END else (k == 1) for a, k in g.terminals.items())


def is_tree_shape(g: Grammar) -> bool:
    """A frontier-style alphabet: ``br`` binary (if present), all else nullary."""
    return all((k == 2) if a == BRANCH else (k == 0) for a, k in g.terminals.items())


def assumption_holds(g: Grammar) -> bool:
    """Every ``o -> s`` occurring in a nonterminal sort has ``order(s) <= 1``."""
    for s in g.nonterminals.values():
        for sub in subsorts(s):
            if isinstance(sub, Arrow) and sub.dom == O and sort_order(sub.cod) > 1:
                return False
    return True
