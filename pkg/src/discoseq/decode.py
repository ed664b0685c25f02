"""Replaying transition sequences into trees, repairing as needed.

Model output is not guaranteed to be well formed, so decoding is total
on non-empty sentences: every token sequence produces a valid tree plus
a log of the repairs that were necessary.  Gold sequences decode with an
empty log.

    R1  an illegal token is skipped
    R2  tokens ran out with buffer items left: shift them implicitly
    R3  tokens ran out with leftovers on the stack: discard unmatched
        open non-terminals and, if more than one item (or a bare word)
        remains, wrap everything in a fallback-labeled constituent
    R4  SHIFT#k beyond the buffer: clamp k to the last buffer item
    R5  REDUCE#k beyond the available items: clamp k to what is there

Decoding is deterministic; repairs never reorder the words.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import transitions as tr
from .tree import Constituent, ConstituentTree
from .treebank import Treebank
from .transitions import Configuration, Scheme, Transition


@dataclass(frozen=True)
class Repair:
    rule: str    # "R1" .. "R5"
    step: int    # token index; -1 for end-of-sequence repairs
    detail: str


@dataclass(frozen=True)
class LabelMismatch:
    """An enriched REDUCE whose carried label disagrees with its marker.

    The marker's label wins for the structure; the disagreement is
    recorded here because it is a labeling inconsistency, not a repair.
    """

    step: int
    marker_label: str
    carried_label: str


@dataclass(frozen=True)
class DecodeResult:
    tree: ConstituentTree
    repairs: tuple[Repair, ...]
    label_mismatches: tuple[LabelMismatch, ...] = ()

    @property
    def clean(self) -> bool:
        return not self.repairs


def decode(sentence: Sequence[str], tokens: Iterable[Transition],
           scheme: Scheme, fallback_label: str = "ROOT") -> DecodeResult:
    """Rebuild a tree from tokens over the given words; always succeeds."""
    sentence = tuple(sentence)
    if not sentence:
        raise ValueError("cannot decode over an empty sentence")
    config = tr.initial(len(sentence))
    repairs: list[Repair] = []
    mismatches: list[LabelMismatch] = []

    for step, token in enumerate(tokens):
        reason = tr.illegality(config, token, scheme)
        if reason is None:
            if token.kind == tr.REDUCE_L:
                marker_index = tr.topmost_marker(config.stack)
                marker = config.stack[marker_index]
                if marker.label != token.label:
                    mismatches.append(LabelMismatch(step, marker.label, token.label))
            config = tr.apply(config, token, scheme)
            continue
        clamped = _clamp(config, token, scheme)
        if clamped is not None:
            repairs.append(Repair(clamped[1], step, clamped[2]))
            config = tr.apply(config, clamped[0], scheme)
        else:
            repairs.append(Repair("R1", step, f"skipped {token}: {reason}"))

    if not tr.is_terminal(config, scheme):
        config, end_repairs = _force_terminal(config, scheme, fallback_label)
        repairs.extend(end_repairs)
    root_item = config.stack[0]
    assert isinstance(root_item, tr.ConstituentItem)
    tree = ConstituentTree(sentence, root_item.node)
    return DecodeResult(tree, tuple(repairs), tuple(mismatches))


def _clamp(config: Configuration, token: Transition,
           scheme: Scheme) -> tuple[Transition, str, str] | None:
    """R4/R5 parameter clamping, when a smaller k would have been legal."""
    if config.finished or token.kind not in scheme.kinds:
        return None
    if token.kind == tr.SHIFT_K and config.buffer and token.k >= len(config.buffer):
        fixed = tr.shift_k(len(config.buffer) - 1)
        return fixed, "R4", f"clamped {token} to {fixed}"
    if token.kind == tr.REDUCE_KL:
        available = 0
        for item in reversed(config.stack):
            if isinstance(item, tr.MarkerItem):
                break
            available += 1
        if 0 < available < token.k:
            fixed = tr.reduce_kl(available, token.label)
            return fixed, "R5", f"clamped {token} to {fixed}"
    return None


def _force_terminal(config: Configuration, scheme: Scheme,
                    fallback_label: str) -> tuple[Configuration, list[Repair]]:
    repairs: list[Repair] = []
    if config.buffer:
        count = len(config.buffer)
        stack = config.stack + config.buffer
        config = Configuration(stack, ())
        repairs.append(Repair("R2", -1, f"shifted {count} leftover buffer items"))

    material = [i for i in config.stack if not isinstance(i, tr.MarkerItem)]
    markers = len(config.stack) - len(material)
    needs_wrap = len(material) != 1 or isinstance(material[0], tr.WordItem)
    if markers or needs_wrap:
        detail = []
        if markers:
            detail.append(f"discarded {markers} unmatched open non-terminals")
        if needs_wrap:
            children = tuple(tr.as_child(item) for item in material)
            node = Constituent(fallback_label, children)
            material = [tr.ConstituentItem(node)]
            detail.append(f"wrapped {len(children)} items in {fallback_label!r}")
        repairs.append(Repair("R3", -1, "; ".join(detail)))
    config = Configuration((material[0],), (), finished=True)
    return config, repairs


@dataclass(frozen=True)
class BatchStats:
    rule_counts: dict[str, int] = field(default_factory=dict)
    repaired_trees: int = 0
    label_mismatches: int = 0


def decode_batch(sentences: Iterable[Sequence[str]],
                 token_sequences: Iterable[Sequence[Transition]],
                 scheme: Scheme, fallback_label: str = "ROOT",
                 ) -> tuple[Treebank, BatchStats, list[DecodeResult]]:
    """Decode many (sentence, tokens) pairs; stats count repairs by rule."""
    sentences = list(sentences)
    token_sequences = list(token_sequences)
    if len(sentences) != len(token_sequences):
        raise ValueError(f"{len(sentences)} sentences but "
                         f"{len(token_sequences)} token sequences")
    results = [decode(sentence, tokens, scheme, fallback_label)
               for sentence, tokens in zip(sentences, token_sequences)]
    counts: Counter[str] = Counter()
    for result in results:
        counts.update(repair.rule for repair in result.repairs)
    stats = BatchStats(
        rule_counts=dict(sorted(counts.items())),
        repaired_trees=sum(1 for r in results if r.repairs),
        label_mismatches=sum(len(r.label_mismatches) for r in results),
    )
    treebank = Treebank(tuple(r.tree for r in results))
    return treebank, stats, results
