"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .converse import PreconditionWarning, tree_to_word
from .errors import GrammarError
from .ext import desugar
from .grammar import Grammar, is_tree_shape, is_word_grammar, validate
from .preprocess import normalize_order0_args, saturate_br
from .semantics import enumerate_trees_report, format_word, slice_report
from .step1 import transform_grammar1_report
from .step2 import transform_grammar2
from .syntax import parse_grammar, print_grammar
from .verify import DEFAULT_BUDGET, DEFAULT_MAX_LEN, compare_word_slices, converse_precondition, pipeline_stages

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the input-error code
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _read(path: str, check: bool = True) -> Grammar:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GrammarError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_grammar(text, check=check)


def _emit(g: Grammar, out: str | None) -> None:
    text = print_grammar(g)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _kind(g: Grammar) -> str:
    if is_word_grammar(g):
        return "word grammar"
    if is_tree_shape(g):
        return "tree grammar"
    return "grammar"


# --- subcommands ------------------------------------------------------------------


def cmd_check(args) -> int:
    g = _read(args.file, check=False)
    report = validate(g)
    if not report.ok:
        for issue in report.issues:
            print(f"{issue.code}: {issue.message}", file=sys.stderr)
        return EXIT_INPUT
    ext = ", extended" if g.extended else ""
    print(f"ok: {_kind(g)}{ext}, order {g.order}, {len(g.nonterminals)} nonterminals, {len(g.rules)} rules")
    return EXIT_OK


def cmd_enum(args) -> int:
    g = _read(args.file)
    if args.kind == "trees":
        rep = enumerate_trees_report(g, args.budget)
        for p in sorted(rep.trees, key=str):
            print(p)
        truncated = rep.truncated
    else:
        kind = {"words": "word", "frontier": "frontier", "le": "le"}[args.kind]
        rep = slice_report(g, kind, args.budget, args.max_len)
        for w in sorted(rep.words, key=lambda w: (len(w), w)):
            print(format_word(w))
        truncated = rep.truncated
    if truncated:
        print("note: enumeration was truncated by a size or state cap", file=sys.stderr)
    return EXIT_OK


def _stage(g: Grammar, stage: str, args) -> Grammar:
    if stage == "pre":
        return normalize_order0_args(g)
    if stage == "step1":
        res = transform_grammar1_report(g, prune=not args.no_prune, trace=args.trace)
        if args.trace:
            kept = {str(r) for r in res.grammar.rules}
            for rule_text in sorted(res.traces):
                if rule_text in kept:
                    print(f"# {rule_text}", file=sys.stderr)
                    for line in res.traces[rule_text].lines():
                        print(line, file=sys.stderr)
        return res.grammar
    if stage == "desugar":
        return saturate_br(desugar(g)) if is_tree_shape(g) else desugar(g)
    if stage == "step2":
        return transform_grammar2(g, prune=not args.no_prune)
    raise ValueError(stage)


def cmd_transform(args) -> int:
    g = _read(args.file)
    if args.stage == "all":
        if args.trace:
            _stage(normalize_order0_args(g), "step1", args)
        stages = pipeline_stages(g, prune=not args.no_prune)
        if args.keep_stages:
            d = Path(args.keep_stages)
            d.mkdir(parents=True, exist_ok=True)
            for i, (name, h) in enumerate(stages):
                (d / f"{i}_{name}.hog").write_text(print_grammar(h), encoding="utf-8")
        out = stages[-1][1]
    else:
        out = _stage(g, args.stage, args)
        if args.keep_stages:
            d = Path(args.keep_stages)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"0_{args.stage}.hog").write_text(print_grammar(out), encoding="utf-8")
    _emit(out, args.output)
    return EXIT_OK


def cmd_converse(args) -> int:
    import warnings

    g = _read(args.file)
    g = desugar(g)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PreconditionWarning)
        out = tree_to_word(g, g0=False if args.no_g0 else None, check_precondition=not args.no_check)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(out, args.output)
    return EXIT_OK


def _default_lang(g: Grammar) -> str:
    return "word" if is_word_grammar(g) else "le"


def cmd_verify(args) -> int:
    g = _read(args.file)
    if args.file2:
        h = _read(args.file2)
        lang_a = args.lang_a or _default_lang(g)
        lang_b = args.lang_b or _default_lang(h)
    elif is_word_grammar(g) and not g.extended:
        h = pipeline_stages(g)[-1][1]
        lang_a, lang_b = args.lang_a or "word", args.lang_b or "le"
    elif is_tree_shape(g):
        h = desugar(g)
        if converse_precondition(h, args.max_len, args.budget) is False:
            print("warning: some e-frontier word contains e; the converse may not preserve it", file=sys.stderr)
        g = tree_to_word(h)
        lang_a, lang_b = args.lang_a or "word", args.lang_b or "le"
    else:
        raise GrammarError("a single input must be a word grammar or a tree grammar")
    rep = compare_word_slices(g, lang_a, h, lang_b, args.max_len, args.budget, args.budget_hi)
    print(rep.to_json_lines() if args.json else rep.to_text())
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[rep.verdict]


# --- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hogram", description="Higher-order grammar transformations and bounded checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="parse and validate a grammar file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("enum", help="enumerate a bounded slice of a language")
    e.add_argument("file")
    e.add_argument("--budget", type=int, required=True, help="maximum number of reduction steps")
    e.add_argument("--kind", choices=("trees", "words", "frontier", "le"), default="words")
    e.add_argument("--max-len", type=int, default=None, help="only words up to this length")
    e.set_defaults(func=cmd_enum)

    t = sub.add_parser("transform", help="apply one stage or the whole pipeline")
    t.add_argument("file")
    t.add_argument("--stage", choices=("pre", "step1", "desugar", "step2", "all"), default="all")
    t.add_argument("--no-prune", action="store_true", help="keep unreachable and unproductive rules")
    t.add_argument("--trace", action="store_true", help="print step-1 derivations to stderr")
    t.add_argument("--keep-stages", metavar="DIR", help="write every intermediate grammar to DIR")
    t.add_argument("-o", "--output", metavar="OUT")
    t.set_defaults(func=cmd_transform)

    v = sub.add_parser("converse", help="tree grammar to word grammar")
    v.add_argument("file")
    v.add_argument("--no-g0", action="store_true", help="use composition even for order-0 input")
    v.add_argument("--no-check", action="store_true", help="skip the e-free precondition check")
    v.add_argument("-o", "--output", metavar="OUT")
    v.set_defaults(func=cmd_converse)

    f = sub.add_parser("verify", help="compare bounded word slices")
    f.add_argument("file")
    f.add_argument("file2", nargs="?")
    f.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    f.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    f.add_argument("--budget-hi", type=int, default=None, help="default 4*budget+64")
    f.add_argument("--lang-a", choices=("word", "le"), default=None)
    f.add_argument("--lang-b", choices=("word", "le"), default=None)
    f.add_argument("--json", action="store_true", help="JSON-lines report")
    f.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GrammarError as exc:
        msg = str(exc)
        if not msg.startswith(exc.code):
            msg = f"{exc.code}: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
