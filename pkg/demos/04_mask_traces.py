"""Deterministic stack/buffer masks, step by step.

The token prefix alone determines which words sit in the parser's stack
and which wait in the buffer, so a model's cross-attention heads can be
hard-masked to see only one side.  A constituent on the stack is
represented by its lowest word position; the other member positions go
dark until a later step frees them.

Run: python3 demos/04_mask_traces.py
"""

import discoseq as dq

scheme = dq.parse_scheme("inorder+swap")
tree = dq.parse_discbracket("(S (VP 0=a 2=c) 1=b)")
tokens = dq.encode(tree, scheme)
n = len(tree.sentence)


def fmt(positions):
    return "{" + ",".join(str(p) for p in sorted(positions)) + "}"


print("tree:", dq.emit_discbracket(tree))
print("\nstep  token      stack      buffer")
trace = dq.trace(n, tokens, scheme)
for step, pair in enumerate(trace):
    token = dq.format_transitions(tokens[step - 1:step]) if step else "-"
    print(f"{step:>4}  {token:<9}  {fmt(pair.stack_positions):<9}"
          f"  {fmt(pair.buffer_positions)}")

# The actual mask vectors are additive: 0.0 for visible, -inf for not.
final = trace[-1]
print("\nfinal stack mask: ", final.stack)
print("final buffer mask:", final.buffer)

# Stepping past FINISH (or applying any inconsistent token) raises.
state = dq.initial_state(n, scheme)
for token in tokens:
    state = dq.step(state, token)
try:
    dq.step(state, dq.shift())
except dq.MaskError as exc:
    print("\nstep after FINISH:", exc)

# A REDUCE collapses its members into one representative, shrinking
# the visible stack set without touching the buffer.
before = dq.trace(n, tokens[:5], scheme)[-1]
after = dq.trace(n, tokens[:6], scheme)[-1]
print(f"\nREDUCE at step 6: stack {fmt(before.stack_positions)}"
      f" -> {fmt(after.stack_positions)}")
