"""Encoder-decoder transformer whose cross-attention follows the parse.

The decoder's cross-attention reserves two heads per layer: head 0 may
only attend input words currently on the stack, head 1 only words still
in the buffer, both steered by the additive mask vectors the mask
engine derives from the token stream.  The remaining heads are free.
A learned sentinel row is prepended to the encoder memory and is always
visible to the two specialized heads, so their softmax stays defined
when the stack or buffer is empty; masked positions get exactly zero
attention weight either way.

Sizes default to a desk-scale setup that trains on a CPU in seconds.
FULL_SCALE_PRESET records the reference recipe used for full treebank
experiments (6+6 layers, width 256, inverse-sqrt schedule with 4000
warm-up updates, label smoothing 0.01, and so on) for documentation.
"""

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..masks import MaskPair
from .layers import (causal_mask, dropout, dropout_bwd, embed, embed_bwd,
                     layer_norm, layer_norm_bwd, linear, linear_bwd,
                     masked_attention, masked_attention_bwd, relu, relu_bwd,
                     sinusoidal_positions)

BOS = "<bos>"
UNK = "<unk>"

# Reference hyper-parameters for full-scale treebank training, kept as
# documentation; the runnable defaults below are deliberately tiny.
FULL_SCALE_PRESET: Mapping[str, object] = {
    "n_layers": 6,
    "d_model": 256,
    "d_ff": 1024,
    "n_heads": 4,
    "dropout": 0.33,
    "lr": 5e-4,
    "warmup_updates": 4000,
    "warmup_init_lr": 1e-7,
    "min_lr": 1e-9,
    "adam_betas": (0.9, 0.98),
    "adam_eps": 1e-8,
    "label_smoothing": 0.01,
    "batch_tokens": 3584,
    "epochs": 80,
}


@dataclass
class ModelConfig:
    scheme: str
    word_to_id: dict[str, int]
    token_to_id: dict[str, int]
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 256
    dropout: float = 0.0
    max_positions: int = 512
    label_smoothing: float = 0.01
    lr: float = 5e-4
    warmup_updates: int = 100
    warmup_init_lr: float = 1e-7
    min_lr: float = 1e-9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.98
    adam_eps: float = 1e-8
    epochs: int = 120
    batch_size: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_heads < 2:
            raise ValueError("need at least a stack head and a buffer head")
        if self.d_model % self.n_heads:
            raise ValueError("d_model must divide evenly into heads")
        for name, vocab in (("word", self.word_to_id), ("token", self.token_to_id)):
            if sorted(vocab.values()) != list(range(len(vocab))):
                raise ValueError(f"{name} vocabulary ids must be 0..{len(vocab) - 1}")
        if BOS not in self.token_to_id:
            raise ValueError(f"token vocabulary must contain {BOS!r}")
        if UNK not in self.word_to_id:
            raise ValueError(f"word vocabulary must contain {UNK!r}")

    @property
    def bos_id(self) -> int:
        return self.token_to_id[BOS]

    @property
    def id_to_token(self) -> dict[int, str]:
        return {i: t for t, i in self.token_to_id.items()}

    def word_ids(self, words: Sequence[str]) -> np.ndarray:
        unk = self.word_to_id[UNK]
        return np.array([self.word_to_id.get(w, unk) for w in words], dtype=np.int64)


Parameters = dict[str, np.ndarray]


def init_parameters(config: ModelConfig, rng: np.random.Generator) -> Parameters:
    d, ff = config.d_model, config.d_ff
    params: Parameters = {}

    def glorot(name: str, fan_in: int, fan_out: int) -> None:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=(fan_in, fan_out))

    def attention(prefix: str) -> None:
        for proj in ("wq", "wk", "wv", "wo"):
            glorot(f"{prefix}.{proj}", d, d)
        for proj in ("bq", "bk", "bv", "bo"):
            params[f"{prefix}.{proj}"] = np.zeros(d)

    def norm(prefix: str) -> None:
        params[f"{prefix}.g"] = np.ones(d)
        params[f"{prefix}.b"] = np.zeros(d)

    def feed_forward(prefix: str) -> None:
        glorot(f"{prefix}.w1", d, ff)
        params[f"{prefix}.b1"] = np.zeros(ff)
        glorot(f"{prefix}.w2", ff, d)
        params[f"{prefix}.b2"] = np.zeros(d)

    scale = 1.0 / math.sqrt(d)
    params["word_emb"] = rng.standard_normal((len(config.word_to_id), d)) * scale
    params["tok_emb"] = rng.standard_normal((len(config.token_to_id), d)) * scale
    params["sentinel"] = rng.standard_normal(d) * scale
    for i in range(config.n_layers):
        attention(f"enc{i}.self")
        norm(f"enc{i}.ln1")
        feed_forward(f"enc{i}.ff")
        norm(f"enc{i}.ln2")
    for i in range(config.n_layers):
        attention(f"dec{i}.self")
        norm(f"dec{i}.ln1")
        attention(f"dec{i}.cross")
        norm(f"dec{i}.ln2")
        feed_forward(f"dec{i}.ff")
        norm(f"dec{i}.ln3")
    glorot("out.w", d, len(config.token_to_id))
    params["out.b"] = np.zeros(len(config.token_to_id))
    return params


def _accumulate(grads: Parameters, name: str, value: np.ndarray) -> None:
    if name in grads:
        grads[name] += value
    else:
        grads[name] = value


def _mha(p: Parameters, prefix: str, x_q: np.ndarray, x_kv: np.ndarray,
         head_masks: np.ndarray | None, n_heads: int) -> tuple[np.ndarray, tuple]:
    q = linear(x_q, p[f"{prefix}.wq"], p[f"{prefix}.bq"])
    k = linear(x_kv, p[f"{prefix}.wk"], p[f"{prefix}.bk"])
    v = linear(x_kv, p[f"{prefix}.wv"], p[f"{prefix}.bv"])
    d_model = q.shape[1]
    d_head = d_model // n_heads
    concat = np.empty_like(q)
    per_head = []
    for h in range(n_heads):
        cols = slice(h * d_head, (h + 1) * d_head)
        mask = None if head_masks is None else head_masks[h]
        out_h, weights = masked_attention(q[:, cols], k[:, cols], v[:, cols], mask)
        concat[:, cols] = out_h
        per_head.append(weights)
    out = linear(concat, p[f"{prefix}.wo"], p[f"{prefix}.bo"])
    return out, (x_q, x_kv, q, k, v, concat, per_head)


def _mha_bwd(p: Parameters, prefix: str, d_out: np.ndarray, cache: tuple,
             n_heads: int, grads: Parameters) -> tuple[np.ndarray, np.ndarray]:
    x_q, x_kv, q, k, v, concat, per_head = cache
    d_concat, d_wo, d_bo = linear_bwd(d_out, concat, p[f"{prefix}.wo"])
    _accumulate(grads, f"{prefix}.wo", d_wo)
    _accumulate(grads, f"{prefix}.bo", d_bo)
    d_q = np.empty_like(q)
    d_k = np.empty_like(k)
    d_v = np.empty_like(v)
    d_head = q.shape[1] // n_heads
    for h in range(n_heads):
        cols = slice(h * d_head, (h + 1) * d_head)
        d_q[:, cols], d_k[:, cols], d_v[:, cols] = masked_attention_bwd(
            d_concat[:, cols], q[:, cols], k[:, cols], v[:, cols], per_head[h])
    d_xq, d_wq, d_bq = linear_bwd(d_q, x_q, p[f"{prefix}.wq"])
    d_xkv_k, d_wk, d_bk = linear_bwd(d_k, x_kv, p[f"{prefix}.wk"])
    d_xkv_v, d_wv, d_bv = linear_bwd(d_v, x_kv, p[f"{prefix}.wv"])
    for name, grad in (("wq", d_wq), ("bq", d_bq), ("wk", d_wk), ("bk", d_bk),
                       ("wv", d_wv), ("bv", d_bv)):
        _accumulate(grads, f"{prefix}.{name}", grad)
    return d_xq, d_xkv_k + d_xkv_v


def _sublayer_ff(p: Parameters, prefix: str, x: np.ndarray) -> tuple[np.ndarray, tuple]:
    pre = linear(x, p[f"{prefix}.w1"], p[f"{prefix}.b1"])
    act = relu(pre)
    out = linear(act, p[f"{prefix}.w2"], p[f"{prefix}.b2"])
    return out, (x, pre, act)


def _sublayer_ff_bwd(p: Parameters, prefix: str, d_out: np.ndarray, cache: tuple,
                     grads: Parameters) -> np.ndarray:
    x, pre, act = cache
    d_act, d_w2, d_b2 = linear_bwd(d_out, act, p[f"{prefix}.w2"])
    d_pre = relu_bwd(d_act, pre)
    d_x, d_w1, d_b1 = linear_bwd(d_pre, x, p[f"{prefix}.w1"])
    for name, grad in (("w1", d_w1), ("b1", d_b1), ("w2", d_w2), ("b2", d_b2)):
        _accumulate(grads, f"{prefix}.{name}", grad)
    return d_x


def _norm(p: Parameters, prefix: str, x: np.ndarray) -> tuple[np.ndarray, tuple]:
    return layer_norm(x, p[f"{prefix}.g"], p[f"{prefix}.b"])


def _norm_bwd(prefix: str, d_out: np.ndarray, cache: tuple,
              grads: Parameters) -> np.ndarray:
    d_x, d_g, d_b = layer_norm_bwd(d_out, cache)
    _accumulate(grads, f"{prefix}.g", d_g)
    _accumulate(grads, f"{prefix}.b", d_b)
    return d_x


def _encode(p: Parameters, config: ModelConfig, word_ids: np.ndarray,
            rng: np.random.Generator | None) -> tuple[np.ndarray, dict]:
    n = len(word_ids)
    if n > config.max_positions:
        raise ValueError(f"sentence length {n} exceeds max_positions")
    scale = math.sqrt(config.d_model)
    x = embed(p["word_emb"], word_ids, scale) + sinusoidal_positions(n, config.d_model)
    x, drop_emb = dropout(x, config.dropout, rng)
    layers = []
    for i in range(config.n_layers):
        attn, attn_cache = _mha(p, f"enc{i}.self", x, x, None, config.n_heads)
        attn, drop1 = dropout(attn, config.dropout, rng)
        h1, ln1_cache = _norm(p, f"enc{i}.ln1", x + attn)
        ff, ff_cache = _sublayer_ff(p, f"enc{i}.ff", h1)
        ff, drop2 = dropout(ff, config.dropout, rng)
        x, ln2_cache = _norm(p, f"enc{i}.ln2", h1 + ff)
        layers.append((attn_cache, drop1, ln1_cache, ff_cache, drop2, ln2_cache))
    memory = np.vstack([p["sentinel"][None, :], x])
    return memory, {"word_ids": word_ids, "drop_emb": drop_emb, "layers": layers}


def _encode_bwd(p: Parameters, config: ModelConfig, d_memory: np.ndarray,
                cache: dict, grads: Parameters) -> None:
    _accumulate(grads, "sentinel", d_memory[0])
    d_x = d_memory[1:].copy()
    for i in reversed(range(config.n_layers)):
        attn_cache, drop1, ln1_cache, ff_cache, drop2, ln2_cache = cache["layers"][i]
        d_sum = _norm_bwd(f"enc{i}.ln2", d_x, ln2_cache, grads)
        d_ff = dropout_bwd(d_sum, drop2)
        d_h1 = d_sum + _sublayer_ff_bwd(p, f"enc{i}.ff", d_ff, ff_cache, grads)
        d_sum = _norm_bwd(f"enc{i}.ln1", d_h1, ln1_cache, grads)
        d_attn = dropout_bwd(d_sum, drop1)
        d_xq, d_xkv = _mha_bwd(p, f"enc{i}.self", d_attn, attn_cache,
                               config.n_heads, grads)
        d_x = d_sum + d_xq + d_xkv
    d_x = dropout_bwd(d_x, cache["drop_emb"])
    _accumulate(grads, "word_emb",
                embed_bwd(d_x, p["word_emb"].shape, cache["word_ids"],
                          math.sqrt(config.d_model)))


def mask_rows(pairs: Sequence[MaskPair]) -> tuple[np.ndarray, np.ndarray]:
    """Stack the per-step mask vectors, prepending the sentinel column.

    The sentinel (memory row 0) is always attendable for both
    specialized heads, so rows whose structure is empty stay finite.
    """
    stack = np.stack([np.concatenate(([0.0], pair.stack)) for pair in pairs])
    buffer = np.stack([np.concatenate(([0.0], pair.buffer)) for pair in pairs])
    return stack, buffer


def _cross_head_masks(config: ModelConfig, stack_rows: np.ndarray,
                      buffer_rows: np.ndarray) -> np.ndarray:
    t, m = stack_rows.shape
    masks = np.zeros((config.n_heads, t, m))
    masks[0] = stack_rows
    masks[1] = buffer_rows
    return masks


def _decode(p: Parameters, config: ModelConfig, memory: np.ndarray,
            in_ids: np.ndarray, stack_rows: np.ndarray, buffer_rows: np.ndarray,
            rng: np.random.Generator | None) -> tuple[np.ndarray, dict]:
    t = len(in_ids)
    if t > config.max_positions:
        raise ValueError(f"sequence length {t} exceeds max_positions")
    scale = math.sqrt(config.d_model)
    y = embed(p["tok_emb"], in_ids, scale) + sinusoidal_positions(t, config.d_model)
    y, drop_emb = dropout(y, config.dropout, rng)
    self_masks = np.broadcast_to(causal_mask(t), (config.n_heads, t, t))
    cross_masks = _cross_head_masks(config, stack_rows, buffer_rows)
    layers = []
    for i in range(config.n_layers):
        attn, self_cache = _mha(p, f"dec{i}.self", y, y, self_masks, config.n_heads)
        attn, drop1 = dropout(attn, config.dropout, rng)
        h1, ln1_cache = _norm(p, f"dec{i}.ln1", y + attn)
        cross, cross_cache = _mha(p, f"dec{i}.cross", h1, memory, cross_masks,
                                  config.n_heads)
        cross, drop2 = dropout(cross, config.dropout, rng)
        h2, ln2_cache = _norm(p, f"dec{i}.ln2", h1 + cross)
        ff, ff_cache = _sublayer_ff(p, f"dec{i}.ff", h2)
        ff, drop3 = dropout(ff, config.dropout, rng)
        y, ln3_cache = _norm(p, f"dec{i}.ln3", h2 + ff)
        layers.append((self_cache, drop1, ln1_cache, cross_cache, drop2,
                       ln2_cache, ff_cache, drop3, ln3_cache))
    logits = linear(y, p["out.w"], p["out.b"])
    return logits, {"in_ids": in_ids, "drop_emb": drop_emb, "layers": layers,
                    "final": y}


def _decode_bwd(p: Parameters, config: ModelConfig, d_logits: np.ndarray,
                cache: dict, grads: Parameters) -> np.ndarray:
    """Returns the gradient w.r.t. the encoder memory."""
    d_y, d_out_w, d_out_b = linear_bwd(d_logits, cache["final"], p["out.w"])
    _accumulate(grads, "out.w", d_out_w)
    _accumulate(grads, "out.b", d_out_b)
    d_memory = None
    for i in reversed(range(config.n_layers)):
        (self_cache, drop1, ln1_cache, cross_cache, drop2,
         ln2_cache, ff_cache, drop3, ln3_cache) = cache["layers"][i]
        d_sum = _norm_bwd(f"dec{i}.ln3", d_y, ln3_cache, grads)
        d_ff = dropout_bwd(d_sum, drop3)
        d_h2 = d_sum + _sublayer_ff_bwd(p, f"dec{i}.ff", d_ff, ff_cache, grads)
        d_sum = _norm_bwd(f"dec{i}.ln2", d_h2, ln2_cache, grads)
        d_cross = dropout_bwd(d_sum, drop2)
        d_h1, d_mem = _mha_bwd(p, f"dec{i}.cross", d_cross, cross_cache,
                               config.n_heads, grads)
        d_memory = d_mem if d_memory is None else d_memory + d_mem
        d_h1 = d_h1 + d_sum
        d_sum = _norm_bwd(f"dec{i}.ln1", d_h1, ln1_cache, grads)
        d_attn = dropout_bwd(d_sum, drop1)
        d_yq, d_ykv = _mha_bwd(p, f"dec{i}.self", d_attn, self_cache,
                               config.n_heads, grads)
        d_y = d_sum + d_yq + d_ykv
    d_y = dropout_bwd(d_y, cache["drop_emb"])
    _accumulate(grads, "tok_emb",
                embed_bwd(d_y, p["tok_emb"].shape, cache["in_ids"],
                          math.sqrt(config.d_model)))
    return d_memory


@dataclass(frozen=True)
class Example:
    """One teacher-forcing unit: words, gold tokens, per-step mask rows."""

    word_ids: np.ndarray
    target_ids: np.ndarray
    stack_rows: np.ndarray   # (len(targets), n_words + 1), sentinel column first
    buffer_rows: np.ndarray


def forward(word_ids: np.ndarray, prefix_ids: Sequence[int],
            mask_trace: Sequence[MaskPair], params: Parameters,
            config: ModelConfig) -> np.ndarray:
    """Next-token distributions after each prefix position.

    Given a prefix of m gold tokens and the m+1 mask pairs of its
    trace, returns an (m+1, vocab) array whose row t is the predicted
    distribution for token t given the first t prefix tokens; the last
    row is the distribution after consuming the entire prefix.
    """
    prefix = np.asarray(prefix_ids, dtype=np.int64)
    if len(mask_trace) != len(prefix) + 1:
        raise ValueError("mask trace must have one pair per step plus the start")
    in_ids = np.concatenate(([config.bos_id], prefix))
    stack_rows, buffer_rows = mask_rows(mask_trace)
    memory, _ = _encode(params, config, np.asarray(word_ids, dtype=np.int64), None)
    logits, _ = _decode(params, config, memory, in_ids, stack_rows, buffer_rows, None)
    peak = logits.max(axis=-1, keepdims=True)
    exp = np.exp(logits - peak)
    return exp / exp.sum(axis=-1, keepdims=True)


def _smoothed_ce(logits: np.ndarray, targets: np.ndarray,
                 smoothing: float) -> tuple[float, np.ndarray]:
    """Summed label-smoothed cross entropy and its logits gradient.

    The smoothed target puts 1 - eps on the gold token and spreads eps
    uniformly over the whole vocabulary, so a uniform prediction costs
    ln(vocab) regardless of eps.
    """
    vocab = logits.shape[1]
    rows = np.arange(len(targets))
    peak = logits.max(axis=-1, keepdims=True)
    shifted = logits - peak
    log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_probs = shifted - log_z
    nll = -log_probs[rows, targets]
    uniform = -log_probs.mean(axis=-1)
    total = float(((1.0 - smoothing) * nll + smoothing * uniform).sum())
    smoothed_target = np.full_like(logits, smoothing / vocab)
    smoothed_target[rows, targets] += 1.0 - smoothing
    d_logits = np.exp(log_probs) - smoothed_target
    return total, d_logits


def _example_pass(params: Parameters, config: ModelConfig, example: Example,
                  rng: np.random.Generator | None, want_grads: bool,
                  ) -> tuple[float, int, int, Parameters | None]:
    targets = example.target_ids
    in_ids = np.concatenate(([config.bos_id], targets[:-1]))
    memory, enc_cache = _encode(params, config, example.word_ids, rng)
    logits, dec_cache = _decode(params, config, memory, in_ids,
                                example.stack_rows, example.buffer_rows, rng)
    total, d_logits = _smoothed_ce(logits, targets, config.label_smoothing)
    correct = int((logits.argmax(axis=-1) == targets).sum())
    if not want_grads:
        return total, len(targets), correct, None
    grads: Parameters = {}
    d_memory = _decode_bwd(params, config, d_logits, dec_cache, grads)
    _encode_bwd(params, config, d_memory, enc_cache, grads)
    return total, len(targets), correct, grads


def loss(distributions: np.ndarray, targets: Sequence[int],
         smoothing: float = 0.01) -> float:
    """Mean label-smoothed cross entropy of predicted distributions.

    The smoothed target mixes (1 - smoothing) of the gold one-hot with
    a uniform distribution, so predicting uniformly costs ln(vocab).
    """
    probs = np.asarray(distributions, dtype=float)
    target_ids = np.asarray(targets, dtype=np.int64)
    if probs.ndim != 2 or len(probs) != len(target_ids):
        raise ValueError("need one distribution per gold token")
    if len(target_ids) == 0:
        raise ValueError("no tokens to score")
    rows = np.arange(len(target_ids))
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    nll = -log_probs[rows, target_ids]
    if smoothing == 0.0:
        return float(nll.mean())
    uniform = -log_probs.mean(axis=-1)
    return float(((1.0 - smoothing) * nll + smoothing * uniform).mean())


def batch_loss(params: Parameters, config: ModelConfig,
               batch: Sequence[Example]) -> float:
    """Mean label-smoothed cross entropy per target token."""
    total = 0.0
    count = 0
    for example in batch:
        example_total, example_count, _, _ = _example_pass(
            params, config, example, None, want_grads=False)
        total += example_total
        count += example_count
    return total / count


def loss_and_grad(params: Parameters, config: ModelConfig, batch: Sequence[Example],
                  rng: np.random.Generator | None = None,
                  ) -> tuple[float, Parameters, int, int]:
    """Token-mean loss, gradients, and (correct, total) token counts."""
    total = 0.0
    count = 0
    correct = 0
    grads: Parameters = {}
    for example in batch:
        example_total, example_count, example_correct, example_grads = _example_pass(
            params, config, example, rng, want_grads=True)
        total += example_total
        count += example_count
        correct += example_correct
        for name, grad in example_grads.items():
            _accumulate(grads, name, grad)
    for name in grads:
        grads[name] /= count
    return total / count, grads, correct, count


def grad_check(params: Parameters, config: ModelConfig, batch: Sequence[Example],
               step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Meant for tiny double-precision models (d_model <= 16); checks every
    parameter coordinate.  Dropout is ignored (evaluation mode), since a
    stochastic forward has no well-defined finite difference.
    """
    if config.d_model > 16:
        raise ValueError("grad_check is for tiny models (d_model <= 16)")
    _, analytic, _, _ = loss_and_grad(params, config, batch, rng=None)
    worst = 0.0
    for name in sorted(params):
        flat = params[name].reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            kept = flat[i]
            flat[i] = kept + step
            upper = batch_loss(params, config, batch)
            flat[i] = kept - step
            lower = batch_loss(params, config, batch)
            flat[i] = kept
            numeric = (upper - lower) / (2.0 * step)
            scale = max(abs(numeric), abs(grad_flat[i]), 1e-4)
            worst = max(worst, abs(numeric - grad_flat[i]) / scale)
    return worst
