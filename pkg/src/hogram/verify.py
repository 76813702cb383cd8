"""Bounded-language oracles, the end-to-end pipeline and random grammars.

Word slices of two grammars are compared with a two-budget inclusion check:
every short word that one side produces within ``budget`` steps must show up
on the other side within ``budget_hi`` steps, and vice versa.  Step counts
are not preserved by the transformations, so equality at a single budget
would be the wrong test.  A slice cut short by a size or state cap makes the
verdict ``inconclusive``; it never turns into a pass.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib.resources import files
from typing import Callable

from .converse import tree_to_word
from .ext import desugar
from .grammar import (
    BRANCH,
    END,
    Grammar,
    Rule,
    ensure_valid,
    sort_check,
    validate,
)
from .errors import GrammarError
from .preprocess import normalize_order0_args, saturate_br
from .semantics import WordSlice, e_inside, format_word, slice_report
from .sorts import O, Arrow, Sort, arrow, sort_arity, sort_order, split
from .step1 import transform_grammar1
from .step2 import transform_grammar2
from .syntax import parse_grammar
from .terms import NT, Term, Tm, Var, app, subterms

DEFAULT_BUDGET = 16
DEFAULT_MAX_LEN = 6
DEFAULT_MAX_STATES = 50_000
DEFAULT_SIZE_CAP = 2_000
ESCALATIONS = 2


def budget_hi_for(budget: int) -> int:
    return 4 * budget + 64


# --- slice comparison ---------------------------------------------------------------


LANGS = {"word": "word", "w": "word", "le": "le", "frontier": "frontier", "remeps": "remeps"}


@dataclass
class SliceReport:
    verdict: str  # pass | fail | inconclusive
    lang_a: str
    lang_b: str
    max_len: int
    budget: int
    budget_hi: int
    missing_in_b: list = field(default_factory=list)  # in A, not found in B
    missing_in_a: list = field(default_factory=list)
    size_a: int = 0
    size_b: int = 0
    truncated_a: bool = False
    truncated_b: bool = False
    complete_a: bool = False
    complete_b: bool = False

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"languages: A={self.lang_a} B={self.lang_b} max_len={self.max_len}",
            f"budgets: {self.budget} / {self.budget_hi}",
            f"slice sizes at budget: A={self.size_a} B={self.size_b}",
            f"truncated: A={self.truncated_a} B={self.truncated_b}",
        ]
        for w in self.missing_in_b:
            lines.append(f"missing in B: {format_word(w)}")
        for w in self.missing_in_a:
            lines.append(f"missing in A: {format_word(w)}")
        return "\n".join(lines)

    def records(self) -> list[dict]:
        head = {
            "record": "summary",
            "verdict": self.verdict,
            "lang_a": self.lang_a,
            "lang_b": self.lang_b,
            "max_len": self.max_len,
            "budget": self.budget,
            "budget_hi": self.budget_hi,
            "size_a": self.size_a,
            "size_b": self.size_b,
            "truncated_a": self.truncated_a,
            "truncated_b": self.truncated_b,
        }
        out = [head]
        out += [{"record": "missing", "side": "B", "word": list(w)} for w in self.missing_in_b]
        out += [{"record": "missing", "side": "A", "word": list(w)} for w in self.missing_in_a]
        return out

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r, ensure_ascii=False) for r in self.records())


def _slice(g: Grammar, lang: str, budget: int, max_len: int, max_states: int, targets=None) -> WordSlice:
    return slice_report(
        g, LANGS[lang], budget, max_len, max_states=max_states, size_cap=DEFAULT_SIZE_CAP, targets=targets
    )


def _covered(words, g: Grammar, lang: str, budget: int, max_len: int, max_states: int):
    """Words of ``words`` missing from the slice of ``g`` at ``budget``, and the last search.

    Slices grow with the budget, so the search deepens in stages (an eighth
    of the budget, doubling) and drops every target it has found; a large
    budget from the start spends the state cap on shallow states.  Past
    ``budget`` the budget is doubled at most ``ESCALATIONS`` times while the
    slice is still growing.
    """
    todo = set(words)
    b = max(1, budget // 8)
    limit = budget * 2**ESCALATIONS
    hi = None
    while True:
        hi = _slice(g, lang, b, max_len, max_states, targets=todo)
        todo -= hi.words
        if not todo:
            break
        if b >= budget and (hi.complete or hi.truncated):
            break
        if b >= limit:
            break
        b = budget if b < budget <= 2 * b else 2 * b
    return sorted(todo), hi


def compare_word_slices(
    ga: Grammar,
    lang_a: str,
    gb: Grammar,
    lang_b: str,
    max_len: int = DEFAULT_MAX_LEN,
    budget: int = DEFAULT_BUDGET,
    budget_hi: int | None = None,
    *,
    max_states: int = DEFAULT_MAX_STATES,
) -> SliceReport:
    """Two-budget inclusion check between a slice of ``ga`` and one of ``gb``.

    ``lang_a`` and ``lang_b`` are ``word`` (read unary chains) or ``le``
    (frontier with the lone ``e`` read as the empty word).  When a word is
    missing on the other side and that side's slice was still growing, the
    high budget is doubled (at most twice) before the word is declared
    missing.
    """
    if budget_hi is None:
        budget_hi = budget_hi_for(budget)
    a_lo = _slice(ga, lang_a, budget, max_len, max_states)
    b_lo = _slice(gb, lang_b, budget, max_len, max_states)
    miss_b, b_hi = _covered(a_lo.words, gb, lang_b, budget_hi, max_len, max_states)
    miss_a, a_hi = _covered(b_lo.words, ga, lang_a, budget_hi, max_len, max_states)
    # a truncated search that still found every target is not a problem
    trunc_a = a_lo.truncated or (a_hi.truncated and bool(miss_a))
    trunc_b = b_lo.truncated or (b_hi.truncated and bool(miss_b))
    if trunc_a or trunc_b:
        verdict = "inconclusive"
    elif miss_a or miss_b:
        verdict = "fail"
    else:
        verdict = "pass"
    return SliceReport(
        verdict,
        LANGS[lang_a],
        LANGS[lang_b],
        max_len,
        budget,
        budget_hi,
        miss_b,
        miss_a,
        len(a_lo.words),
        len(b_lo.words),
        trunc_a,
        trunc_b,
        a_hi.complete,
        b_hi.complete,
    )


# --- pipeline -----------------------------------------------------------------------


STAGES = ("pre", "step1", "desugar1", "step2", "desugar2", "final")


def pipeline_stages(g: Grammar, *, prune: bool = True) -> list[tuple[str, Grammar]]:
    """Every intermediate grammar of the word-to-tree pipeline, in order."""
    ensure_valid(g)
    out = []
    cur = normalize_order0_args(g)
    out.append(("pre", cur))
    cur = transform_grammar1(cur, prune=prune)
    out.append(("step1", cur))
    cur = desugar(cur, prefix="$C")
    out.append(("desugar1", cur))
    cur = transform_grammar2(cur, prune=prune)
    out.append(("step2", cur))
    cur = desugar(cur, prefix="$D")
    out.append(("desugar2", cur))
    cur = saturate_br(cur)
    out.append(("final", cur))
    return out


def pipeline(g: Grammar, *, prune: bool = True) -> Grammar:
    """Word grammar of order n+1 to a tree grammar of order n with Lε equal to W."""
    return pipeline_stages(g, prune=prune)[-1][1]


def check_word_to_tree(g: Grammar, max_len: int = DEFAULT_MAX_LEN, budget: int = DEFAULT_BUDGET, **kw) -> SliceReport:
    return compare_word_slices(g, "word", pipeline(g), "le", max_len, budget, **kw)


def converse_precondition(
    g: Grammar, max_len: int = DEFAULT_MAX_LEN, budget: int = DEFAULT_BUDGET, *, max_states: int = DEFAULT_MAX_STATES
) -> bool | None:
    """Whether no ε-frontier word contains ``e``, as far as a slice can tell.

    Looks at frontier words up to ``3 * max_len`` at the high budget, since a
    word with inner ``e`` leaves turns into a shorter word on the other side.
    None when the slice was truncated.
    """
    witness, truncated = e_inside(g, budget_hi_for(budget), 3 * max_len, max_states=max_states)
    if witness is not None:
        return False
    return None if truncated else True


def check_tree_to_word(g: Grammar, max_len: int = DEFAULT_MAX_LEN, budget: int = DEFAULT_BUDGET, **kw) -> SliceReport:
    return compare_word_slices(tree_to_word(g), "word", g, "le", max_len, budget, **kw)


# --- fixtures -----------------------------------------------------------------------


FIXTURE_NAMES = ("g1", "g2", "g3", "g3_variant", "g2_converse", "eps", "loop")


def fixture_text(name: str) -> str:
    return (files("hogram") / "fixtures" / f"{name}.hog").read_text(encoding="utf-8")


def fixture(name: str) -> Grammar:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"no fixture named {name!r}")
    return parse_grammar(fixture_text(name))


def fixtures() -> dict[str, Grammar]:
    return {n: fixture(n) for n in FIXTURE_NAMES}


# --- random grammars ----------------------------------------------------------------


_OO = arrow(O, O)

WORD_SORTS_LOW = (O, O, _OO, _OO, arrow(O, O, O))
WORD_SORTS_HIGH = (
    arrow(_OO, O),
    arrow(_OO, O, O),
    arrow(_OO, _OO, O),
    arrow(O, _OO, O),
    arrow(_OO, _OO, O, O),
)
TREE_SORTS = (O, O, _OO, _OO, arrow(O, O, O))


@dataclass(frozen=True)
class Profile:
    kind: str = "word"  # word | tree
    max_order: int = 2
    min_rules: int = 2
    max_rules: int = 6
    max_arity: int = 3
    max_depth: int = 3
    letters: tuple = ("a", "b")


PROFILES = {
    "word": Profile("word", 2),
    "word1": Profile("word", 1),
    "tree": Profile("tree", 1),
    "tree0": Profile("tree", 0),
}


class _Retry(Exception):
    pass


def _heads_for(target: Sort, pool: dict[str, tuple[Term, Sort]]):
    """Heads ``h`` and argument sorts such that ``h a1 .. ak`` has sort ``target``."""
    out = []
    for head, s in pool.values():
        args: list[Sort] = []
        while True:
            if s == target:
                out.append((head, tuple(args)))
            if not isinstance(s, Arrow):
                break
            args.append(s.dom)
            s = s.cod
    return out


def _gen_term(rng: random.Random, target: Sort, pool, depth: int) -> Term:
    if depth < -6:
        raise _Retry
    options = _heads_for(target, pool)
    if not options:
        raise _Retry
    if depth <= 0:
        fewest = min(len(a) for _, a in options)
        options = [o for o in options if len(o[1]) == fewest]
    # favour parameters and applications, which make for less trivial bodies
    weights = [(3 if isinstance(h, Var) else 2 if isinstance(h, NT) else 1) * (2 if a and depth > 0 else 1)
               for h, a in options]
    head, args = rng.choices(options, weights)[0]
    return app(head, *[_gen_term(rng, s, pool, depth - 1) for s in args])


def _mentions(t: Term, name: str) -> bool:
    return any(isinstance(s, NT) and s.name == name for s in subterms(t))


def _sort_ok(s: Sort, prof: Profile) -> bool:
    return sort_order(s) <= prof.max_order and sort_arity(s) <= prof.max_arity


def random_grammar(seed: int, profile: str | Profile = "word") -> Grammar:
    """A small valid grammar, deterministic in ``seed``.

    The word profile follows the shape of the running examples: unary
    letters plus ``e``, a start of sort ``o``, at most one nonterminal of
    order 2 and a handful of rules.  The tree profile uses ``br``, nullary
    letters and ``e`` with nonterminals of order at most 1 (0 for
    ``tree0``).
    """
    prof = PROFILES[profile] if isinstance(profile, str) else profile
    rng = random.Random(seed)
    for _ in range(1000):
        try:
            g = _attempt(rng, prof)
        except _Retry:
            continue
        if validate(g).ok:
            return g
    raise RuntimeError(f"no grammar found for seed {seed}")


def _attempt(rng: random.Random, prof: Profile) -> Grammar:
    if prof.kind == "word":
        terminals = {a: 1 for a in prof.letters[: rng.randint(1, len(prof.letters))]}
        terminals[END] = 0
        low = [s for s in WORD_SORTS_LOW if _sort_ok(s, prof)]
        high = [s for s in WORD_SORTS_HIGH if _sort_ok(s, prof)]
    else:
        terminals = {BRANCH: 2, END: 0}
        for a in prof.letters[: rng.randint(1, len(prof.letters))]:
            terminals[a] = 0
        low = [s for s in TREE_SORTS if _sort_ok(s, prof)]
        high = []
    nts: dict[str, Sort] = {"S": O}
    main = None
    for i, name in enumerate(("F", "G", "H")[: rng.randint(1, 3)]):
        if i == 0 and high and rng.random() < 0.85:
            nts[name] = rng.choice(high)
            main = name
        else:
            nts[name] = rng.choice(low)

    def pool_for(params, args, with_nts: bool):
        pool: dict[str, tuple[Term, Sort]] = {}
        for a, k in terminals.items():
            pool[a] = (Tm(a), arrow(*([O] * k), O))
        if with_nts:
            for A, s in nts.items():
                pool[A] = (NT(A), s)
        for p, s in zip(params, args):
            pool[p] = (Var(p), s)
        return pool

    # every helper gets one rule without nonterminals, so that it is
    # productive; the start symbol calls the order-2 nonterminal if any
    n_rules = rng.randint(max(prof.min_rules, len(nts)), max(prof.max_rules, len(nts)))
    plan = [(A, A != "S") for A in nts]
    if main is not None:
        plan.append((main, False))
    extra = [main or "S", "S"] + list(nts)
    plan += [(rng.choice(extra), False) for _ in range(n_rules - len(plan))]
    rules: list[Rule] = []
    for lhs, base in plan:
        args, _ = split(nts[lhs])
        params = tuple(f"x{i}" if s == O else f"f{i}" for i, s in enumerate(args))
        pool = pool_for(params, args, not base)
        for _ in range(5):
            depth = rng.randint(1, prof.max_depth)
            if lhs == "S" and not rules:
                sub = {k: v for k, v in pool.items() if k != "S"}
                if main is not None:
                    margs, _ = split(nts[main])
                    body = app(NT(main), *[_gen_term(rng, a, sub, depth - 1) for a in margs])
                else:
                    body = _gen_term(rng, O, sub, depth)
            elif lhs == main and not base and not any(x.lhs == main and _mentions(x.body, main) for x in rules):
                margs, _ = split(nts[main])
                body = app(NT(main), *[_gen_term(rng, a, pool, depth - 1) for a in margs])
            else:
                body = _gen_term(rng, O, pool, depth)
            r = Rule(lhs, params, body)
            if r not in rules:
                rules.append(r)
                break
    return Grammar(terminals, nts, tuple(rules), "S")


# --- shrinking ----------------------------------------------------------------------


def _smaller_bodies(g: Grammar, r: Rule):
    """Candidate replacements for a rule body, smallest first."""
    env = g.param_sorts(r)
    seen = set()
    cands = []
    for s in subterms(r.body):
        if s is r.body or s in seen:
            continue
        seen.add(s)
        try:
            if sort_check({**g.nonterminals, **env}, s, g.terminals) == O:
                cands.append(s)
        except GrammarError:
            continue
    if END in g.terminals and r.body != Tm(END):
        cands.insert(0, Tm(END))
    return cands


def shrink(g: Grammar, still_fails: Callable[[Grammar], bool], max_rounds: int = 50) -> Grammar:
    """Greedily shrink ``g`` while ``still_fails`` keeps returning True."""

    def ok(h: Grammar) -> bool:
        if not validate(h).ok:
            return False
        try:
            return still_fails(h)
        except Exception:
            return False

    cur = g
    for _ in range(max_rounds):
        progress = False
        for r in cur.rules:
            cand = cur.replace(rules=tuple(x for x in cur.rules if x is not r))
            if ok(cand):
                cur, progress = cand, True
                break
        else:
            for r in cur.rules:
                for body in _smaller_bodies(cur, r):
                    new = Rule(r.lhs, r.params, body)
                    cand = cur.replace(rules=tuple(new if x is r else x for x in cur.rules))
                    if ok(cand):
                        cur, progress = cand, True
                        break
                if progress:
                    break
        if not progress:
            break
    used = {cur.start}
    for r in cur.rules:
        used.add(r.lhs)
        used.update(s.name for s in subterms(r.body) if isinstance(s, NT))
    trimmed = cur.replace(nonterminals={A: s for A, s in cur.nonterminals.items() if A in used})
    return trimmed if ok(trimmed) else cur


__all__ = [
    "SliceReport",
    "compare_word_slices",
    "budget_hi_for",
    "pipeline",
    "pipeline_stages",
    "check_word_to_tree",
    "check_tree_to_word",
    "converse_precondition",
    "fixture",
    "fixtures",
    "fixture_text",
    "FIXTURE_NAMES",
    "random_grammar",
    "Profile",
    "PROFILES",
    "shrink",
    "DEFAULT_BUDGET",
    "DEFAULT_MAX_LEN",
]
