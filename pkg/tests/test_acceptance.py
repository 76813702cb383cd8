"""Acceptance criteria 1-8, one test each.

Every test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts, so a failing criterion also fails the run.
"""

import signal
import time
from contextlib import contextmanager
from importlib import resources

import pytest

from hogram.cli import main
from hogram.converse import order_bound_check, tree_to_word
from hogram.ext import desugar
from hogram.grammar import is_tree_shape, is_word_grammar, rule_env, sort_check
from hogram.preprocess import normalize_order0_args
from hogram.semantics import word_language_slice
from hogram.sorts import O
from hogram.step1 import enumerate_refinements, render, target_sort, transform_grammar1
from hogram.step2 import enumerate_tty, render2, transform_grammar2, tty_to_sort
from hogram.verify import (
    DEFAULT_BUDGET,
    DEFAULT_MAX_LEN,
    check_word_to_tree,
    check_tree_to_word,
    converse_precondition,
    fixture,
    fixtures,
    pipeline_stages,
    random_grammar,
)

from . import test_properties as props
from .conftest import ACCEPTANCE
from .helpers import ww_language
from .test_step1 import STEP1_G1, UNREACHABLE
from .test_step1 import subscript_to_tool as subscript_to_tool1
from .test_step2 import STEP2_G3
from .test_step2 import subscript_to_tool as subscript_to_tool2


def record(n: int, title: str, ok: bool, detail: str, elapsed: float, limit: float | None = None) -> None:
    within = limit is None or elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    lim = f", limit {limit:g} s" if limit is not None else ""
    ACCEPTANCE[n] = f"criterion {n} ({title}): {verdict} - {detail} [{elapsed:.1f} s{lim}]"
    assert ok and within, ACCEPTANCE[n]


def fx(name: str) -> str:
    return str(resources.files("hogram") / "fixtures" / f"{name}.hog")


def cli_rules(capsys, *argv) -> set[str]:
    assert main(list(argv)) == 0
    out = capsys.readouterr().out
    return {ln for ln in out.splitlines() if ln and not ln.startswith("%")}


class _Timeout(Exception):
    pass


@contextmanager
def time_limit(seconds: int):
    def fire(*_):
        raise _Timeout()

    old = signal.signal(signal.SIGALRM, fire)
    # keeps firing each second: a signal landing in a weakref callback is swallowed
    signal.setitimer(signal.ITIMER_REAL, seconds, 1.0)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def test_criterion_1_golden_step1(capsys):
    t0 = time.perf_counter()
    want = {subscript_to_tool1(ln) for ln in STEP1_G1.strip().splitlines()}
    got = cli_rules(capsys, "transform", fx("g1"), "--stage", "step1")
    full = cli_rules(capsys, "transform", fx("g1"), "--stage", "step1", "--no-prune")
    extra = subscript_to_tool1(UNREACHABLE)
    ok = got == want and extra in full
    detail = f"{len(got)} rules, exact match {got == want}; unpruned output has the unreachable rule {extra in full}"
    record(1, "golden step-1 output", ok, detail, time.perf_counter() - t0, 5)


def test_criterion_2_golden_step2(capsys):
    t0 = time.perf_counter()
    want = {subscript_to_tool2(ln) for ln in STEP2_G3.strip().splitlines()}
    got = cli_rules(capsys, "transform", fx("g3"), "--stage", "step2")
    detail = f"{len(got)} rules, exact match {got == want}"
    record(2, "golden step-2 output", got == want, detail, time.perf_counter() - t0, 5)


WORD_SEEDS = 500
SEED_TIMEOUT = 20


def test_criterion_3_word_to_tree():
    t0 = time.perf_counter()
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    timeouts, failures, odd = 0, [], []
    g1_rep = check_word_to_tree(fixture("g1"))
    for seed in range(WORD_SEEDS):
        try:
            with time_limit(SEED_TIMEOUT):
                rep = check_word_to_tree(random_grammar(seed, "word"))
            verdict = rep.verdict
        except _Timeout:
            verdict, timeouts = "inconclusive", timeouts + 1
        counts[verdict] += 1
        if verdict == "fail":
            failures.append(seed)
        elif verdict == "inconclusive":
            odd.append(seed)
    rate = counts["inconclusive"] / WORD_SEEDS
    ok = g1_rep.ok and counts["fail"] == 0 and rate < 0.05
    detail = (
        f"G1 {g1_rep.verdict}; {WORD_SEEDS} random grammars: {counts['pass']} pass, "
        f"{counts['fail']} fail {failures[:10]}, {counts['inconclusive']} inconclusive "
        f"({rate:.1%}, {timeouts} of them timeouts at {SEED_TIMEOUT} s) {odd[:20]}; "
        f"max_len {DEFAULT_MAX_LEN}, budget {DEFAULT_BUDGET}"
    )
    record(3, "word grammars to tree grammars", ok, detail, time.perf_counter() - t0, 600)


TREE_GRAMMARS = 100


def test_criterion_4_tree_to_word():
    t0 = time.perf_counter()
    g2 = fixture("g2")
    listing = {str(r) for r in fixture("g2_converse").rules}
    rename = {"$S": "S'", "$E": "E", "$Br": "Br"}

    def renamed(text):
        for a, b in rename.items():
            text = text.replace(a, b)
        return text

    exact = {renamed(str(r)) for r in tree_to_word(g2).rules} == listing
    g2_ok = check_tree_to_word(g2).ok
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    failures, skipped, seed = [], 0, 0
    while counts["pass"] + counts["fail"] + counts["inconclusive"] < TREE_GRAMMARS:
        g = random_grammar(seed, "tree")
        seed += 1
        if not converse_precondition(g):
            skipped += 1
            continue
        rep = check_tree_to_word(g)
        counts[rep.verdict] += 1
        if rep.verdict == "fail":
            failures.append(seed - 1)
    ok = exact and g2_ok and counts["fail"] == 0 and counts["pass"] >= TREE_GRAMMARS
    detail = (
        f"G2 converse listing exact {exact}, G2 oracle {'pass' if g2_ok else 'not pass'}; "
        f"{TREE_GRAMMARS} random order<=1 tree grammars: {counts['pass']} pass, {counts['fail']} fail {failures}, "
        f"{counts['inconclusive']} inconclusive; {skipped} seeds skipped (e inside a frontier word, or slice truncated)"
    )
    record(4, "tree grammars back to word grammars", ok, detail, time.perf_counter() - t0, 300)


def test_criterion_5_order_bounds():
    t0 = time.perf_counter()
    problems = []
    order2 = [fixture("g1")] + [g for g in (random_grammar(s, "word") for s in range(300)) if g.order == 2]
    for g in order2:
        out = transform_grammar1(normalize_order0_args(g))
        if out.order > g.order - 1:
            problems.append(f"step1 order {out.order} from {g.order}")
    trees = [g for g in fixtures().values() if is_tree_shape(g) and not g.extended]
    trees += [random_grammar(s, p) for p in ("tree", "tree0") for s in range(150)]
    n0 = 0
    for g in trees:
        out = tree_to_word(g)
        if not order_bound_check(g, out) or out.order > g.order + 1:
            problems.append(f"converse order {out.order} from {g.order}")
        if g.order == 0:
            n0 += 1
            if out.order != 1:
                problems.append(f"converse of order-0 input has order {out.order}")
    detail = f"{len(order2)} order-2 word grammars through step 1, {len(trees)} tree grammars ({n0} of order 0) through the converse; {len(problems)} violations {problems[:3]}"
    record(5, "order bounds", not problems, detail, time.perf_counter() - t0)


def test_criterion_6_closed_form():
    t0 = time.perf_counter()
    want = ww_language(6)
    got = word_language_slice(fixture("g1"), 64, 12)
    detail = f"{len(got)} words in the slice, {len(want)} from the closed form, equal {got == want}"
    record(6, "closed form for G1", got == want and len(want) == 126, detail, time.perf_counter() - t0, 30)


def _subscripted(name: str):
    base, _, ty = name.partition("'{")
    return base, ty[:-1]


def _mapped_sort_problems(src, out, step: int) -> list[str]:
    """Declared sorts of generated nonterminals agree with the type-to-sort maps."""
    bad = []
    for name, s in out.nonterminals.items():
        if "'{" not in name:
            continue
        base, ty = _subscripted(name)
        if base not in src.nonterminals:
            continue
        src_sort = src.nonterminals[base]
        if step == 1:
            match = [t for t, _ in enumerate_refinements(src_sort) if render(t) == ty]
            want = target_sort(match[0], src_sort) if match else None
        else:
            match = [t for t in enumerate_tty(src_sort) if render2(t) == ty]
            want = tty_to_sort(match[0]) if match else None
        if want != s:
            bad.append(f"{name}: declared {s}, expected {want}")
    return bad


def _rule_problems(g) -> list[str]:
    bad = []
    for r in g.rules:
        try:
            if sort_check(rule_env(g, r), r.body, g.terminals) != O:
                bad.append(str(r))
        except Exception as exc:  # any checker error counts against the criterion
            bad.append(f"{r}: {exc}")
    return bad


def test_criterion_7_typing_preservation():
    t0 = time.perf_counter()
    checked, problems = 0, []
    words = [g for g in fixtures().values() if is_word_grammar(g)]
    words += [random_grammar(s, "word") for s in range(150)]
    for g in words:
        stages = dict(pipeline_stages(g))
        problems += _mapped_sort_problems(stages["pre"], stages["step1"], 1)
        problems += _mapped_sort_problems(stages["desugar1"], stages["step2"], 2)
        for name, h in stages.items():
            checked += len(h.rules)
            problems += _rule_problems(h)
    trees = [g for g in fixtures().values() if is_tree_shape(g)]
    trees += [random_grammar(s, p) for p in ("tree", "tree0") for s in range(100)]
    for g in trees:
        out2 = transform_grammar2(g)
        problems += _mapped_sort_problems(desugar(g), out2, 2)
        back = tree_to_word(desugar(g))
        for h in (out2, desugar(out2), back):
            checked += len(h.rules)
            problems += _rule_problems(h)
    detail = f"{checked} emitted rules sort-checked ({len(words)} word and {len(trees)} tree grammars), {len(problems)} problems {problems[:3]}"
    record(7, "typing preservation", not problems, detail, time.perf_counter() - t0)


PROPERTIES = [
    ("enumeration monotonicity", props.test_enumeration_monotone),
    ("leaves homomorphism", props.test_leaves_homomorphism),
    ("remeps idempotence", props.test_remeps_idempotent),
    ("parse/print round trip", props.test_parse_print_round_trip),
    ("env_union linearity", props.test_env_union_linearity),
]


def test_criterion_8_properties():
    t0 = time.perf_counter()
    results = []
    for name, prop in PROPERTIES:
        assert prop.hypothesis.inner_test is not None
        try:
            prop()
            results.append((name, True))
        except Exception as exc:  # a counterexample or an error
            results.append((name, False))
            print(f"{name}: {exc}")
    cases = props.CASES.max_examples
    ok = all(r for _, r in results)
    detail = f"{cases} cases each: " + ", ".join(f"{n} {'ok' if r else 'FAILED'}" for n, r in results)
    record(8, "property suite", ok and cases >= 200, detail, time.perf_counter() - t0)
