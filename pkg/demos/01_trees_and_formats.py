"""Trees, their two file formats, and what discontinuity means.

Run: python3 demos/01_trees_and_formats.py
"""

import discoseq as dq

# A discbracket leaf is index=word, so a constituent can gather words
# that are not adjacent in the sentence.  Here the VP owns word 0 and
# word 2 while word 1 belongs directly to S: a crossing branch.
tree = dq.parse_discbracket("(S (VP 0=a 2=c) 1=b)")
print("sentence:      ", tree.sentence)
print("continuous?    ", dq.is_continuous(tree))
print("crossing nodes:", dq.discontinuous_constituents(tree))

# The classic bracketed format has no indices; words appear in order.
plain = dq.parse_bracketed("(S (NP the dog) (VP ran))")
print("\nbracketed:     ", dq.emit_bracketed(plain))
print("as discbracket:", dq.emit_discbracket(plain))

# canonical_leaf_order walks the tree depth-first, which lines the
# words up so every constituent becomes a consecutive block.
order = dq.canonical_leaf_order(tree)
print("\ncanonical order:", order)
flattened = dq.reorder_canonical(tree)
print("rearranged:    ", dq.emit_discbracket(flattened))
print("continuous now?", dq.is_continuous(flattened))

# permute_leaves goes the other way: scramble a continuous tree to
# fabricate discontinuity (handy for generating test material).
scrambled = dq.permute_leaves(plain, [2, 0, 1])
print("\nscrambled:     ", dq.emit_discbracket(scrambled))
print("continuous?    ", dq.is_continuous(scrambled))

# validate returns None for a well-formed tree, else a Violation.
print("\nvalidate ok:   ", dq.validate(tree))

# Three small treebanks ship with the package; load_treebank and
# save_treebank handle files, gzipped transparently when named *.gz.
bank = dq.bundled("toy20.discbracket")
print("\nbundled toy20: ", len(bank), "trees,",
      sum(not dq.is_continuous(t) for t in bank), "discontinuous")
