"""Shared test machinery.

Two independent oracles live here so the incremental implementations can be
checked against something that shares no code with them:

* ``replay_pairs`` recomputes both attention mask vectors at every step by
  replaying a plain Configuration and reading positions off its stack and
  buffer directly.
* ``random_tree`` / ``trees`` build arbitrary valid constituency trees, first
  over contiguous spans and then through a leaf permutation, so discontinuity
  comes in through the same door real treebanks use.
"""

from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

import discoseq as dq
from discoseq import transitions as tr

LABELS = ("S", "NP", "VP", "PP", "X")
WORDS = ("a", "b", "the", "dog", "ran", "off", "up")

ALL_SCHEMES = tuple(dq.SHIPPED_SCHEMES)
DISCO_SCHEMES = tuple(s for s in ALL_SCHEMES if s.disco != "none")
PLAIN_SCHEMES = tuple(s for s in ALL_SCHEMES if s.disco == "none" and not s.enriched)

FIG_LINE = (
    "(S (VP 0=Allerdings (PP 2=in 3=bestimmten 4=Vierteln)"
    " (PP 6=aus 7=Brunnen) 8=gewonnen) 1=wird 5=Wasser)"
)


def toks(line: str) -> list[tr.Transition]:
    return dq.parse_transitions(line)


# ---------------------------------------------------------------------------
# random trees

def random_subtree(rng: random.Random, span: tuple[int, ...], depth: int = 4) -> dq.Constituent:
    children: list[int | dq.Constituent] = []
    i = 0
    while i < len(span):
        size = rng.randint(1, len(span) - i)
        chunk = span[i : i + size]
        i += size
        if len(chunk) == 1 and (depth == 0 or rng.random() < 0.6):
            children.append(chunk[0])
        elif depth == 0:
            children.extend(chunk)
        else:
            children.append(random_subtree(rng, chunk, depth - 1))
    return dq.Constituent(rng.choice(LABELS), tuple(children))


def random_tree(rng: random.Random, max_leaves: int = 12, *,
                discontinuous: bool = True) -> dq.ConstituentTree:
    n = rng.randint(1, max_leaves)
    root = random_subtree(rng, tuple(range(n)))
    sentence = tuple(rng.choice(WORDS) for _ in range(n))
    tree = dq.ConstituentTree(sentence, root)
    if discontinuous and n > 1 and rng.random() < 0.7:
        perm = list(range(n))
        rng.shuffle(perm)
        tree = dq.permute_leaves(tree, perm)
    assert dq.validate(tree) is None
    return tree


@st.composite
def subtrees(draw, span: tuple[int, ...], depth: int) -> dq.Constituent:
    children: list[int | dq.Constituent] = []
    i = 0
    while i < len(span):
        size = draw(st.integers(1, len(span) - i))
        chunk = span[i : i + size]
        i += size
        if len(chunk) == 1 and (depth == 0 or draw(st.booleans())):
            children.append(chunk[0])
        elif depth == 0:
            children.extend(chunk)
        else:
            children.append(draw(subtrees(chunk, depth - 1)))
    return dq.Constituent(draw(st.sampled_from(LABELS)), tuple(children))


@st.composite
def trees(draw, max_leaves: int = 10, *, discontinuous: bool = True) -> dq.ConstituentTree:
    n = draw(st.integers(1, max_leaves))
    root = draw(subtrees(tuple(range(n)), 3))
    sentence = tuple(draw(st.sampled_from(WORDS)) for _ in range(n))
    tree = dq.ConstituentTree(sentence, root)
    if discontinuous and n > 1:
        tree = dq.permute_leaves(tree, draw(st.permutations(range(n))))
    return tree


# ---------------------------------------------------------------------------
# mask replay oracle

def _representative(item: tr.StackItem) -> int:
    if isinstance(item, tr.WordItem):
        return item.position
    assert isinstance(item, tr.ConstituentItem)
    return min(item.node.positions)


def config_pair(config: tr.Configuration) -> tuple[frozenset[int], frozenset[int]]:
    stack = frozenset(
        _representative(e) for e in config.stack if not isinstance(e, tr.MarkerItem)
    )
    buffer = frozenset(_representative(e) for e in config.buffer)
    return stack, buffer


def replay_pairs(n_words: int, tokens, scheme: tr.Scheme):
    """From-scratch mask oracle: recompute the unmasked position sets at every
    step straight from a replayed Configuration."""
    config = dq.initial(n_words)
    pairs = [config_pair(config)]
    for token in tokens:
        config = dq.apply(config, token, scheme)
        pairs.append(config_pair(config))
    return pairs


# ---------------------------------------------------------------------------
# random legal walks (reach states the oracle never produces)

def candidate_pool(n_words: int, scheme: tr.Scheme) -> list[tr.Transition]:
    pool: list[tr.Transition] = []
    for kind in scheme.kinds:
        if kind == tr.SHIFT:
            pool.append(tr.shift())
        elif kind == tr.SHIFT_K:
            pool.extend(tr.shift_k(k) for k in range(n_words))
        elif kind == tr.SWAP:
            pool.append(tr.swap())
        elif kind == tr.SWAP_K:
            pool.extend(tr.swap_k(k) for k in range(1, 4))
        elif kind == tr.NT:
            pool.extend(tr.nt(label) for label in LABELS[:3])
        elif kind == tr.REDUCE:
            pool.append(tr.reduce_())
        elif kind == tr.REDUCE_L:
            pool.extend(tr.reduce_l(label) for label in LABELS[:3])
        elif kind == tr.REDUCE_KL:
            pool.extend(tr.reduce_kl(k, label) for k in range(1, 4) for label in LABELS[:3])
        elif kind == tr.FINISH:
            pool.append(tr.finish())
    return pool


def random_walk(rng: random.Random, n_words: int, scheme: tr.Scheme,
                max_steps: int = 40) -> list[tr.Transition]:
    config = dq.initial(n_words)
    pool = candidate_pool(n_words, scheme)
    out: list[tr.Transition] = []
    while len(out) < max_steps:
        options = [t for t in pool if dq.legal(config, t, scheme)]
        if not options:
            break
        token = rng.choice(options)
        out.append(token)
        config = dq.apply(config, token, scheme)
        if config.finished:
            break
    return out


# ---------------------------------------------------------------------------
# fixtures

@pytest.fixture(scope="session")
def fig_tree() -> dq.ConstituentTree:
    return dq.parse_discbracket(FIG_LINE)


@pytest.fixture(scope="session")
def toy20() -> dq.Treebank:
    return dq.bundled("toy20.discbracket")


@pytest.fixture(scope="session")
def cont5() -> dq.Treebank:
    return dq.bundled("cont5.bracketed")
