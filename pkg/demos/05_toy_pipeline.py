"""The whole pipeline: train a tiny model, parse, score.

The bundled 20-tree treebank is small enough for the default model to
memorize in seconds on a CPU.  Prediction replays the parser
configuration for each hypothesis and masks illegal tokens, so even a
half-trained model emits sequences that decode without repairs.

Run: python3 demos/05_toy_pipeline.py
"""

import discoseq as dq
from discoseq.neural import predict, train

scheme = dq.parse_scheme("inorder+swap")
bank = dq.bundled("toy20.discbracket")

result = train(bank, scheme, early_stop_accuracy=1.0,
               log=lambda s: s.epoch % 10 or print(
                   f"epoch {s.epoch:>3}  loss {s.loss:.4f}"
                   f"  token accuracy {s.token_accuracy:.3f}"))
last = result.history[-1]
print(f"stopped after epoch {last.epoch},"
      f" token accuracy {last.token_accuracy:.3f}")

predicted = []
repaired = 0
for tree in bank:
    out = predict(result.params, result.config, list(tree.sentence),
                  beam_size=10)
    decoded = dq.decode(tree.sentence, out.tokens, scheme)
    predicted.append(decoded.tree)
    repaired += bool(decoded.repairs)

report = dq.evaluate(list(bank), predicted)
print(f"\nlabeled F1 {report.labeled.f1:.1f}"
      f"  discontinuous F1 {report.discontinuous.f1:.1f}"
      f"  exact match {report.exact_match:.2f}"
      f"  repaired {repaired}")

# The model generalizes at least to unseen word order of known words.
sentence = ["the", "dog", "ran", "off"]
out = predict(result.params, result.config, sentence, beam_size=10)
print("\nnew sentence:", " ".join(sentence))
print("parsed:      ", dq.emit_discbracket(
    dq.decode(tuple(sentence), out.tokens, scheme).tree))
