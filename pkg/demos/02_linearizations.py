"""Every shipped scheme on the same discontinuous tree.

The reordering transitions differ in how verbosely they express the
same crossing branch: SWAP moves one word at a time, SWAP#k compresses
a run of swaps into one token, and SHIFT#k dodges reordering entirely
by pulling buffer words out of order, so its sequences are exactly as
long as for a continuous tree.

Run: python3 demos/02_linearizations.py
"""

import discoseq as dq

tree = dq.bundled("fig_disco.discbracket")[0]
print("tree:", dq.emit_discbracket(tree))
print()

for scheme in dq.SHIPPED_SCHEMES:
    if scheme.disco == "none":
        continue
    tokens = dq.encode(tree, scheme)
    print(f"{str(scheme):<16} {len(tokens):>3} tokens")
    print(f"    {dq.format_transitions(tokens)}")

# Plain schemes refuse crossing branches outright.
try:
    dq.encode(tree, dq.parse_scheme("inorder"))
except dq.EncodeError as exc:
    print("\ninorder on a discontinuous tree:", exc)

# But they accept its canonical rearrangement, and the SHIFT#k
# sequence has exactly that length.
flat = dq.reorder_canonical(tree)
shiftk = dq.encode(tree, dq.parse_scheme("inorder+shiftk"))
plain = dq.encode(flat, dq.parse_scheme("inorder"))
print(f"\ninorder+shiftk: {len(shiftk)} tokens, "
      f"inorder on rearranged tree: {len(plain)} tokens")

# Enriched variants label the REDUCE, trading dictionary size for
# shorter, more explicit sequences.
small = dq.parse_discbracket("(S (NP 0=the 1=dog) 2=ran)")
for name in ("topdown", "topdown:enriched"):
    seq = dq.encode(small, dq.parse_scheme(name))
    print(f"\n{name}: {dq.format_transitions(seq)}")

# vocab_stats sizes the output dictionary a model would need.
bank = dq.bundled("toy20.discbracket")
for name in ("inorder+swap", "inorder+shiftk"):
    stats = dq.vocab_stats(bank, dq.parse_scheme(name))
    print(f"\n{name}: dictionary {stats.size}, longest sequence {stats.max_length}")
