"""Building blocks with hand-written backward passes.

Everything is float64 and operates on single sequences (2-d arrays);
batching is a loop one level up.  Each forward returns its output plus
the cache its backward needs.  Backwards return gradients in the same
order as the forward inputs.
"""

import numpy as np

NEG_INF = float("-inf")


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row softmax that tolerates -inf entries (they get weight 0.0).

    Only an all--inf row is rejected; non-finite garbage from an upstream
    overflow flows through as NaN so the caller's loss check can see it.
    """
    peak = np.max(scores, axis=-1, keepdims=True)
    if np.isneginf(peak).any():
        raise ValueError("softmax over a fully masked row")
    exp = np.exp(scores - peak)
    return exp / exp.sum(axis=-1, keepdims=True)


def masked_attention(queries: np.ndarray, keys: np.ndarray, values: np.ndarray,
                     mask: np.ndarray | None = None,
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Scaled dot-product attention with an additive {0, -inf} mask.

    queries: (Tq, d), keys: (Tk, d), values: (Tk, dv), mask: (Tq, Tk).
    Returns (outputs (Tq, dv), weights (Tq, Tk)).  A -inf mask entry
    forces exactly zero weight; a query row with every key masked is an
    error because its weights would be undefined.
    """
    scale = 1.0 / np.sqrt(queries.shape[-1])
    scores = (queries @ keys.T) * scale
    if mask is not None:
        scores = scores + mask
    weights = softmax_rows(scores)
    return weights @ values, weights


def masked_attention_bwd(d_out: np.ndarray, queries: np.ndarray, keys: np.ndarray,
                         values: np.ndarray, weights: np.ndarray,
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    scale = 1.0 / np.sqrt(queries.shape[-1])
    d_values = weights.T @ d_out
    d_weights = d_out @ values.T
    # softmax backward; zero weights keep zero gradient, so -inf entries stay inert
    d_scores = weights * (d_weights - (d_weights * weights).sum(-1, keepdims=True))
    d_queries = (d_scores @ keys) * scale
    d_keys = (d_scores.T @ queries) * scale
    return d_queries, d_keys, d_values


def linear(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w + b


def linear_bwd(d_out: np.ndarray, x: np.ndarray, w: np.ndarray,
               ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return d_out @ w.T, x.T @ d_out, d_out.sum(axis=0)


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray,
               eps: float = 1e-5) -> tuple[np.ndarray, tuple]:
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    variance = (centered ** 2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(variance + eps)
    normalized = centered * inv_std
    return gain * normalized + bias, (normalized, inv_std, gain)


def layer_norm_bwd(d_out: np.ndarray, cache: tuple,
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    normalized, inv_std, gain = cache
    d_gain = (d_out * normalized).sum(axis=0)
    d_bias = d_out.sum(axis=0)
    d_norm = d_out * gain
    d_x = inv_std * (d_norm - d_norm.mean(axis=-1, keepdims=True)
                     - normalized * (d_norm * normalized).mean(axis=-1, keepdims=True))
    return d_x, d_gain, d_bias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_bwd(d_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    return d_out * (x > 0.0)


def embed(table: np.ndarray, ids: np.ndarray, scale: float) -> np.ndarray:
    return table[ids] * scale


def embed_bwd(d_out: np.ndarray, table_shape: tuple, ids: np.ndarray,
              scale: float) -> np.ndarray:
    d_table = np.zeros(table_shape)
    np.add.at(d_table, ids, d_out * scale)
    return d_table


def sinusoidal_positions(length: int, d_model: int) -> np.ndarray:
    """The fixed sin/cos position table; even columns sin, odd columns cos."""
    positions = np.arange(length)[:, None]
    exponents = np.arange(0, d_model, 2) / d_model
    angles = positions / np.power(10000.0, exponents)[None, :]
    table = np.zeros((length, d_model))
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return table


def causal_mask(length: int) -> np.ndarray:
    """(T, T) additive mask allowing each step to see itself and the past."""
    mask = np.zeros((length, length))
    mask[np.triu_indices(length, k=1)] = NEG_INF
    return mask


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator | None,
            ) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout; rng=None means evaluation mode (identity)."""
    if rng is None or rate <= 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep / (1.0 - rate)
    return x * mask, mask


def dropout_bwd(d_out: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return d_out if mask is None else d_out * mask
