"""Walk the order-2 copy grammar through both transformation steps.

The input generates { ww | w in {a,b}+ } as a word grammar.  Step 1 lowers
the order by one and produces a tree grammar whose frontier may contain
stray e leaves; step 2 removes them.  At each stage we print the grammar
and a bounded slice of its language so the invariant is visible.
"""

from hogram import fixture, le_epsilon_slice, print_grammar, word_language_slice
from hogram.semantics import format_word
from hogram.verify import pipeline_stages


def show_words(title, words, limit=8):
    ws = sorted(words, key=lambda w: (len(w), w))
    print(f"{title}: {len(ws)} words, e.g. {', '.join(format_word(w) for w in ws[:limit])}")


g1 = fixture("g1")
print("input grammar (order", g1.order, ")")
print(print_grammar(g1))
show_words("W(input), length <= 6", word_language_slice(g1, 40, 6))

for name, g in pipeline_stages(g1)[1:]:
    print(f"\n--- after {name}: order {g.order}, {len(g.rules)} rules")
    if len(g.rules) <= 12:
        print(print_grammar(g))
    show_words(f"Le(after {name}), length <= 6", le_epsilon_slice(g, 40, 6))
