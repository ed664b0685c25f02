"""Beam search over transition tokens with legality masking.

Every hypothesis carries a replayed parser configuration and mask
state, so candidate tokens that are illegal in the current
configuration are excluded outright rather than merely down-weighted.
Scores are summed log probabilities without length normalisation.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..masks import MaskPair, MaskState, initial_state, step
from ..transitions import (Configuration, Transition, apply, initial,
                           is_terminal, legal, parse_scheme, parse_transition)
from .model import ModelConfig, Parameters, _decode, _encode, mask_rows


@dataclass(frozen=True)
class Prediction:
    """Best-scoring token sequence for one sentence."""

    tokens: tuple[Transition, ...]
    score: float
    terminal: bool


@dataclass
class _Hypothesis:
    score: float
    token_ids: list[int]
    tokens: list[Transition]
    config_state: Configuration
    mask_state: MaskState
    pairs: list[MaskPair]


def _log_distribution(params: Parameters, config: ModelConfig,
                      memory: np.ndarray, hyp: _Hypothesis) -> np.ndarray:
    in_ids = np.array([config.bos_id] + hyp.token_ids, dtype=np.int64)
    stack_rows, buffer_rows = mask_rows(hyp.pairs)
    logits, _ = _decode(params, config, memory, in_ids, stack_rows,
                        buffer_rows, None)
    row = logits[-1]
    shifted = row - row.max()
    return shifted - math.log(np.exp(shifted).sum())


def predict(params: Parameters, config: ModelConfig, words: list[str],
            beam_size: int = 10, max_len: int | None = None) -> Prediction:
    """Decode one sentence; ties break toward the lower token id.

    A hypothesis whose configuration is terminal joins the finished
    pool and stops expanding.  If the step cap runs out before any
    hypothesis finishes, the best unfinished one is returned and the
    sequence decoder's repair rules take it from there.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be positive")
    scheme = parse_scheme(config.scheme)
    n = len(words)
    if max_len is None:
        max_len = config.max_positions - 1
    vocabulary = sorted((i, parse_transition(text))
                        for text, i in config.token_to_id.items()
                        if i != config.bos_id)
    memory, _ = _encode(params, config, config.word_ids(words), None)

    start = initial_state(n, scheme)
    live = [_Hypothesis(score=0.0, token_ids=[], tokens=[],
                        config_state=initial(n), mask_state=start,
                        pairs=[start.pair])]
    finished: list[_Hypothesis] = []
    for _ in range(max_len):
        if not live:
            break
        if len(finished) >= beam_size:
            best_live = max(hyp.score for hyp in live)
            worst_kept = min(hyp.score for hyp in finished)
            if best_live <= worst_kept:
                break
        candidates: list[tuple[float, int, int, _Hypothesis, Transition]] = []
        for hyp_index, hyp in enumerate(live):
            log_probs = _log_distribution(params, config, memory, hyp)
            for token_id, transition in vocabulary:
                if legal(hyp.config_state, transition, scheme):
                    candidates.append((hyp.score + log_probs[token_id],
                                       token_id, hyp_index, hyp, transition))
        if not candidates:
            break
        candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
        next_live = []
        for score, token_id, _, hyp, transition in candidates[:beam_size]:
            mask_state = step(hyp.mask_state, transition)
            child = _Hypothesis(score=score,
                                token_ids=hyp.token_ids + [token_id],
                                tokens=hyp.tokens + [transition],
                                config_state=apply(hyp.config_state, transition,
                                                   scheme),
                                mask_state=mask_state,
                                pairs=hyp.pairs + [mask_state.pair])
            if is_terminal(child.config_state, scheme):
                finished.append(child)
            else:
                next_live.append(child)
        finished.sort(key=lambda hyp: -hyp.score)
        del finished[beam_size:]
        live = next_live

    pool = finished if finished else live
    if not pool:
        raise RuntimeError("beam search produced no hypotheses")
    best = max(pool, key=lambda hyp: hyp.score)
    return Prediction(tokens=tuple(best.tokens), score=best.score,
                      terminal=bool(finished))
