"""Higher-order grammar toolkit.

Word grammars of order n+1 are turned into tree grammars of order n with the
same ε-frontier language, and back; bounded enumeration gives oracles to
check both directions on small inputs.
"""

from .converse import order_bound_check, tree_to_word
from .errors import GrammarError
from .ext import desugar, ext_substitute
from .grammar import Grammar, Rule, is_tree_shape, is_word_grammar, validate
from .preprocess import normalize_order0_args, saturate_br
from .semantics import (
    Tree,
    enumerate_trees,
    frontier_slice,
    le_epsilon_slice,
    leaves,
    reduce_step,
    remeps,
    word_language_slice,
)
from .sorts import O, arrow, sort_order
from .step1 import transform_grammar1
from .step2 import compute_derivability, transform_grammar2
from .syntax import parse_grammar, print_grammar
from .verify import compare_word_slices, fixture, pipeline, random_grammar

__version__ = "0.1.0"

__all__ = [
    "Grammar",
    "Rule",
    "GrammarError",
    "O",
    "arrow",
    "sort_order",
    "parse_grammar",
    "print_grammar",
    "validate",
    "is_word_grammar",
    "is_tree_shape",
    "desugar",
    "ext_substitute",
    "reduce_step",
    "enumerate_trees",
    "word_language_slice",
    "frontier_slice",
    "le_epsilon_slice",
    "leaves",
    "remeps",
    "Tree",
    "normalize_order0_args",
    "saturate_br",
    "transform_grammar1",
    "compute_derivability",
    "transform_grammar2",
    "tree_to_word",
    "order_bound_check",
    "compare_word_slices",
    "pipeline",
    "random_grammar",
    "fixture",
]
