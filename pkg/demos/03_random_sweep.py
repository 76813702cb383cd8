"""A small seeded sweep of the word-to-tree pipeline against the oracle.

Each random order-2 word grammar is transformed and its word slice compared
with the e-frontier slice of the result.  The acceptance suite does the same
for 500 seeds; this runs a handful so it finishes in seconds.
"""

import sys
from collections import Counter

from hogram import compare_word_slices, pipeline, random_grammar

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
tally = Counter()
for seed in range(n):
    g = random_grammar(seed, "word")
    rep = compare_word_slices(g, "word", pipeline(g), "le")
    tally[rep.verdict] += 1
    print(f"seed {seed:3d}: {rep.verdict:12s} |W slice| = {rep.size_a}")
print(dict(tally))
