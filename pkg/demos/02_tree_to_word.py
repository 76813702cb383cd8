"""The converse direction: an order-1 tree grammar becomes an order-2 word grammar.

Trees are read as functions that prepend their frontier to a continuation,
so br turns into composition and e into the identity.
"""

from hogram import compare_word_slices, fixture, print_grammar, tree_to_word

g2 = fixture("g2")
print(print_grammar(g2))

w = tree_to_word(g2)
print(f"converse (order {w.order}):")
print(print_grammar(w))

report = compare_word_slices(w, "word", g2, "le", max_len=8)
print(report.to_text())
