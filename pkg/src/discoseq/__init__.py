"""Discontinuous constituency parsing as sequence transduction.

Trees with crossing branches are linearised into transition-token
sequences (several scheme variants, with and without reordering
tokens), decoded back with deterministic repair rules, and scored with
labelled bracketing metrics.  A small numpy transformer demonstrates
the intended consumer: its cross-attention is steered by stack and
buffer masks replayed from the token stream alone.
"""

from .decode import BatchStats, DecodeResult, LabelMismatch, Repair, decode, decode_batch
from .masks import NEG_INF, MaskError, MaskPair, MaskState, initial_state, step, trace
from .metrics import (DEFAULT_PUNCTUATION, MetricsError, Report, Score,
                      bracket_items, disc_f1, evaluate, exact_match, f1)
from .oracle import EncodeError, VocabStats, encode, encode_enriched, vocab_stats
from .transitions import (SHIPPED_SCHEMES, Configuration, IllegalTransition,
                          Scheme, Transition, apply, extract_tree, finish,
                          format_transitions, illegality, initial, is_terminal,
                          legal, nt, parse_scheme, parse_transition,
                          parse_transitions, reduce_, reduce_kl, reduce_l,
                          shift, shift_k, swap, swap_k)
from .tree import (Constituent, ConstituentTree, Violation, canonical_leaf_order,
                   discontinuous_constituents, is_continuous, permute_leaves,
                   reorder_canonical, validate, yield_is_consecutive)
from .treebank import (ParseFailure, Treebank, TreebankError, bundled,
                       emit_bracketed, emit_discbracket, load_treebank,
                       parse_bracketed, parse_discbracket, parse_treebank,
                       save_treebank)

__version__ = "0.1.0"

__all__ = [
    "BatchStats", "Configuration", "Constituent", "ConstituentTree",
    "DEFAULT_PUNCTUATION", "DecodeResult", "EncodeError", "IllegalTransition",
    "LabelMismatch", "MaskError", "MaskPair", "MaskState", "MetricsError",
    "NEG_INF", "ParseFailure", "Repair", "Report", "SHIPPED_SCHEMES", "Scheme",
    "Score", "Transition", "Treebank", "TreebankError", "Violation",
    "VocabStats", "apply",
    "bracket_items", "bundled", "canonical_leaf_order", "decode", "decode_batch",
    "disc_f1", "discontinuous_constituents", "emit_bracketed",
    "emit_discbracket", "encode", "encode_enriched", "evaluate", "exact_match",
    "extract_tree", "f1", "finish", "format_transitions", "illegality",
    "initial", "initial_state", "is_continuous", "is_terminal", "legal",
    "load_treebank", "nt", "parse_bracketed", "parse_discbracket",
    "parse_scheme", "parse_transition", "parse_transitions", "parse_treebank",
    "permute_leaves", "reduce_", "reduce_kl", "reduce_l", "reorder_canonical",
    "save_treebank", "shift", "shift_k", "step", "swap", "swap_k", "trace",
    "validate", "vocab_stats", "yield_is_consecutive",
]
