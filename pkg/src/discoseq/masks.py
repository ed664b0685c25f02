"""Deterministic stack and buffer attention masks.

Each decoding step carries two additive mask vectors over the input
positions, one for the stack attention head and one for the buffer
head.  An entry is 0 where the head may attend and -inf where it must
not, so adding the mask to pre-softmax scores zeroes the masked
attention weights exactly.

The masks follow the parse state: initially every word is unmasked in
the buffer vector and masked in the stack vector.  A shift moves a word
from the buffer mask to the stack mask, a swap moves one back, closing
a constituent keeps only its lowest unmasked position as the
representative, and opening a non-terminal or finishing changes
nothing.  A position is unmasked in at most one vector; reduced-away
positions end up masked in both.

Mask vectors alone do not determine which position a SWAP or REDUCE
touches (that depends on the order of items on the stack), so the
engine carries a MaskState holding the ordered representatives and
updates the vectors incrementally from it, one token at a time.
"""

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from . import transitions as tr
from .transitions import MarkerItem, Scheme, Transition

NEG_INF = float("-inf")


class MaskError(Exception):
    """A token inconsistent with the mask state (bug or illegal input)."""


@dataclass(frozen=True)
class MaskPair:
    """Additive masks over input positions; entries are 0.0 or -inf."""

    stack: np.ndarray
    buffer: np.ndarray

    def __post_init__(self) -> None:
        for array in (self.stack, self.buffer):
            array.setflags(write=False)

    @property
    def stack_positions(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.stack == 0.0))

    @property
    def buffer_positions(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.buffer == 0.0))


# stack entries: a representative position (int) or an open non-terminal
Entry = Union[int, MarkerItem]


@dataclass(frozen=True)
class MaskState:
    """Ordered representatives plus the current mask vectors."""

    scheme: Scheme
    stack_entries: tuple[Entry, ...]
    buffer_reprs: tuple[int, ...]
    pair: MaskPair
    finished: bool = False


def initial_state(n_words: int, scheme: Scheme) -> MaskState:
    if n_words < 1:
        raise ValueError("masks need at least one word")
    stack = np.full(n_words, NEG_INF)
    buffer = np.zeros(n_words)
    return MaskState(scheme, (), tuple(range(n_words)), MaskPair(stack, buffer))


def step(state: MaskState, token: Transition) -> MaskState:
    """Advance the mask state by one token that was legal at this point."""
    if state.finished:
        raise MaskError("no tokens may follow FINISH")
    scheme = state.scheme
    stack = list(state.stack_entries)
    buffer = list(state.buffer_reprs)
    stack_mask = np.array(state.pair.stack)
    buffer_mask = np.array(state.pair.buffer)
    finished = False

    def to_stack(p: int) -> None:
        buffer_mask[p] = NEG_INF
        stack_mask[p] = 0.0

    def to_buffer(p: int) -> None:
        stack_mask[p] = NEG_INF
        buffer_mask[p] = 0.0

    kind = token.kind
    if kind in (tr.SHIFT, tr.SHIFT_K):
        k = token.k if kind == tr.SHIFT_K else 0
        if k >= len(buffer):
            raise MaskError(f"{token} with only {len(buffer)} buffer items")
        p = buffer.pop(k)
        stack.append(p)
        to_stack(p)
    elif kind in (tr.SWAP, tr.SWAP_K):
        k = token.k if kind == tr.SWAP_K else 1
        if len(stack) < k + 1 or any(isinstance(e, MarkerItem) for e in stack[-k - 1:]):
            raise MaskError(f"{token} without {k + 1} movable stack items")
        moved = stack[-k - 1:-1]
        del stack[-k - 1:-1]
        buffer[:0] = moved
        for p in moved:
            to_buffer(p)
    elif kind == tr.NT:
        stack.append(MarkerItem(token.label))
    elif kind in (tr.REDUCE, tr.REDUCE_L, tr.REDUCE_KL):
        if kind == tr.REDUCE_KL:
            if len(stack) < token.k:
                raise MaskError(f"{token} without {token.k} reducible items")
            popped = stack[-token.k:]
            if any(isinstance(e, MarkerItem) for e in popped):
                raise MaskError(f"{token} across an open non-terminal")
            del stack[-token.k:]
        else:
            marker = tr.topmost_marker(tuple(stack))
            if marker is None:
                raise MaskError(f"{token} without an open non-terminal")
            start = marker if scheme.base == tr.TOP_DOWN else marker - 1
            if start < 0 or (scheme.base != tr.TOP_DOWN
                             and isinstance(stack[marker - 1], MarkerItem)):
                raise MaskError(f"{token} without an item below the marker")
            popped = [e for e in stack[start:] if not isinstance(e, MarkerItem)]
            if not popped:
                raise MaskError(f"{token} closes an empty constituent")
            del stack[start:]
        survivor = min(popped)
        for p in popped:
            if p != survivor:
                stack_mask[p] = NEG_INF  # masked in both vectors from now on
        stack.append(survivor)
    elif kind == tr.FINISH:
        finished = True
    else:
        raise MaskError(f"unknown transition kind {kind!r}")

    return MaskState(scheme, tuple(stack), tuple(buffer),
                     MaskPair(stack_mask, buffer_mask), finished)


def trace(n_words: int, tokens: Iterable[Transition],
          scheme: Scheme) -> list[MaskPair]:
    """Mask pairs before each token and after the last: len(tokens) + 1."""
    state = initial_state(n_words, scheme)
    pairs = [state.pair]
    for token in tokens:
        state = step(state, token)
        pairs.append(state.pair)
    return pairs
