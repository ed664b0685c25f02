import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import discoseq as dq
from discoseq import transitions as tr
from conftest import ALL_SCHEMES, candidate_pool, random_walk

INORDER = dq.parse_scheme("inorder")
SWAP = dq.parse_scheme("inorder+swap")
SWAPK = dq.parse_scheme("inorder+swapk")
SHIFTK = dq.parse_scheme("inorder+shiftk")
TOPDOWN = dq.parse_scheme("topdown")
BOTTOMUP = dq.parse_scheme("bottomup")


# --- token surface forms ----------------------------------------------------

@pytest.mark.parametrize("token,text", [
    (tr.shift(), "SHIFT"),
    (tr.shift_k(0), "SHIFT#0"),
    (tr.shift_k(12), "SHIFT#12"),
    (tr.swap(), "SWAP"),
    (tr.swap_k(3), "SWAP#3"),
    (tr.nt("VP"), "NT(VP)"),
    (tr.reduce_(), "REDUCE"),
    (tr.reduce_l("NP"), "REDUCE(NP)"),
    (tr.reduce_kl(2, "PP"), "REDUCE#2(PP)"),
    (tr.finish(), "FINISH"),
])
def test_surface_forms(token, text):
    assert str(token) == text
    assert dq.parse_transition(text) == token


def test_shift0_and_shift_are_distinct_tokens():
    assert tr.shift_k(0) != tr.shift()
    assert tr.swap_k(1) != tr.swap()


def test_normalized_folds_degenerate_parameters():
    assert tr.shift_k(0).normalized() == tr.shift()
    assert tr.swap_k(1).normalized() == tr.swap()
    assert tr.shift_k(2).normalized() == tr.shift_k(2)
    assert tr.reduce_kl(2, "X").normalized() == tr.reduce_kl(2, "X")


@pytest.mark.parametrize("junk", [
    "SHIFTY", "NT", "NT()", "REDUCE#x", "SWAP#", "REDUCE#2", "SHIFT#-1",
    "FINISH(X)", "",
])
def test_parse_transition_rejects_junk(junk):
    with pytest.raises(ValueError):
        dq.parse_transition(junk)


@pytest.mark.parametrize("make", [
    lambda: tr.shift_k(-1),
    lambda: tr.swap_k(0),
    lambda: tr.reduce_kl(0, "X"),
    lambda: tr.nt(""),
    lambda: tr.nt("a b"),
    lambda: tr.nt("a(b"),
])
def test_constructor_validation(make):
    with pytest.raises(ValueError):
        make()


@given(st.sampled_from([
    tr.shift(), tr.shift_k(0), tr.shift_k(7), tr.swap(), tr.swap_k(2),
    tr.nt("S"), tr.reduce_(), tr.reduce_l("VP"), tr.reduce_kl(3, "NP"),
    tr.finish(),
]))
def test_parse_is_left_inverse_of_str(token):
    assert dq.parse_transition(str(token)) == token


def test_parse_format_transitions_line():
    line = "SHIFT NT(VP) SHIFT#1 REDUCE FINISH"
    tokens = dq.parse_transitions(line)
    assert len(tokens) == 5
    assert dq.format_transitions(tokens) == line


# --- scheme names -----------------------------------------------------------

def test_all_shipped_scheme_names_roundtrip():
    names = [str(s) for s in ALL_SCHEMES]
    assert names == [
        "topdown", "topdown:enriched", "inorder", "inorder:enriched",
        "bottomup", "topdown+swap", "inorder+swap", "bottomup+swap",
        "inorder+swapk", "inorder+shiftk",
    ]
    for scheme in ALL_SCHEMES:
        assert dq.parse_scheme(str(scheme)) == scheme


@pytest.mark.parametrize("name", [
    "bottomup+shiftk", "topdown+swapk", "bottomup:enriched",
    "inorder+swap:enriched", "sideways", "inorder+", "",
])
def test_parse_scheme_rejects(name):
    with pytest.raises(ValueError):
        dq.parse_scheme(name)


def test_scheme_token_kinds():
    assert TOPDOWN.kinds == frozenset({tr.SHIFT, tr.NT, tr.REDUCE})
    assert INORDER.kinds == frozenset({tr.SHIFT, tr.NT, tr.REDUCE, tr.FINISH})
    assert BOTTOMUP.kinds == frozenset({tr.SHIFT, tr.REDUCE_KL, tr.FINISH})
    assert SWAP.kinds == INORDER.kinds | {tr.SWAP}
    assert SWAPK.kinds == INORDER.kinds | {tr.SWAP_K}
    assert SHIFTK.kinds == (INORDER.kinds - {tr.SHIFT}) | {tr.SHIFT_K}
    assert dq.parse_scheme("topdown:enriched").kinds == frozenset(
        {tr.SHIFT, tr.NT, tr.REDUCE_L}
    )


# --- configurations and application ----------------------------------------

def test_initial_configuration():
    config = dq.initial(3)
    assert config.stack == ()
    assert [w.position for w in config.buffer] == [0, 1, 2]
    assert not config.finished


def test_initial_requires_a_word():
    with pytest.raises(ValueError):
        dq.initial(0)


def test_shift_moves_buffer_front():
    config = dq.apply(dq.initial(3), tr.shift(), INORDER)
    assert [w.position for w in config.stack] == [0]
    assert [w.position for w in config.buffer] == [1, 2]


def test_shift_k_picks_by_index():
    config = dq.apply(dq.initial(4), tr.shift_k(2), SHIFTK)
    assert [w.position for w in config.stack] == [2]
    assert [w.position for w in config.buffer] == [0, 1, 3]


def test_swap_returns_second_item_to_buffer_front():
    config = dq.initial(3)
    for token in (tr.shift(), tr.shift(), tr.swap()):
        config = dq.apply(config, token, SWAP)
    assert [w.position for w in config.stack] == [1]
    assert [w.position for w in config.buffer] == [0, 2]


def test_swap_k_preserves_depth_order():
    config = dq.initial(4)
    for token in (tr.shift(), tr.shift(), tr.shift(), tr.swap_k(2)):
        config = dq.apply(config, token, SWAPK)
    # the two moved items reach the buffer deepest first
    assert [w.position for w in config.stack] == [2]
    assert [w.position for w in config.buffer] == [0, 1, 3]


def test_swap_undo_guard():
    """Swapping an item back ahead of material it already passed is illegal."""
    config = dq.initial(2)
    for token in (tr.shift(), tr.shift(), tr.swap()):
        config = dq.apply(config, token, SWAP)
    # stack [1], buffer [0 2..]; shifting 0 back then swapping 1 out again
    config = dq.apply(config, tr.shift(), SWAP)
    assert dq.illegality(config, tr.swap(), SWAP) is not None


def test_apply_rejects_illegal():
    with pytest.raises(dq.IllegalTransition):
        dq.apply(dq.initial(2), tr.reduce_(), INORDER)


def test_apply_rejects_foreign_kind():
    assert dq.illegality(dq.initial(2), tr.swap(), INORDER) is not None
    with pytest.raises(dq.IllegalTransition):
        dq.apply(dq.initial(2), tr.swap(), INORDER)


def test_nothing_is_legal_after_finish():
    config = dq.initial(1)
    for token in (tr.shift(), tr.nt("S"), tr.reduce_(), tr.finish()):
        config = dq.apply(config, token, INORDER)
    assert config.finished
    for token in candidate_pool(1, INORDER):
        assert dq.illegality(config, token, INORDER) is not None


def test_topdown_terminates_without_finish():
    config = dq.initial(2)
    seq = "NT(S) SHIFT SHIFT REDUCE"
    for token in dq.parse_transitions(seq):
        config = dq.apply(config, token, TOPDOWN)
    assert dq.is_terminal(config, TOPDOWN)
    tree = dq.extract_tree(config, ("a", "b"), TOPDOWN)
    assert dq.emit_discbracket(tree) == "(S 0=a 1=b)"


def test_inorder_requires_finish_to_terminate():
    config = dq.initial(1)
    for token in dq.parse_transitions("SHIFT NT(S) REDUCE"):
        config = dq.apply(config, token, INORDER)
    assert not dq.is_terminal(config, INORDER)
    assert dq.illegality(config, tr.finish(), INORDER) is None
    config = dq.apply(config, tr.finish(), INORDER)
    assert dq.is_terminal(config, INORDER)


def test_bottomup_reduce_k_takes_top_k():
    config = dq.initial(3)
    seq = "SHIFT SHIFT REDUCE#2(NP) SHIFT REDUCE#2(S) FINISH"
    for token in dq.parse_transitions(seq):
        config = dq.apply(config, token, BOTTOMUP)
    tree = dq.extract_tree(config, ("a", "b", "c"), BOTTOMUP)
    assert dq.emit_discbracket(tree) == "(S (NP 0=a 1=b) 2=c)"


def test_reduce_kl_needs_k_material_items():
    config = dq.apply(dq.initial(2), tr.shift(), BOTTOMUP)
    assert dq.illegality(config, tr.reduce_kl(2, "S"), BOTTOMUP) is not None
    assert dq.illegality(config, tr.reduce_kl(1, "S"), BOTTOMUP) is None


def test_legal_agrees_with_illegality():
    rng = random.Random(11)
    for _ in range(200):
        scheme = rng.choice(ALL_SCHEMES)
        n = rng.randint(1, 6)
        config = dq.initial(n)
        for token in random_walk(rng, n, scheme, max_steps=rng.randint(0, 12)):
            config = dq.apply(config, token, scheme)
        probe = rng.choice(candidate_pool(n, scheme) + [tr.nt("ZZ")])
        assert dq.legal(config, probe, scheme) == (
            dq.illegality(config, probe, scheme) is None
        )


# --- parameterised token laws ------------------------------------------------

def _walk_to(rng, n, scheme, steps):
    config = dq.initial(n)
    for token in random_walk(rng, n, scheme, max_steps=steps):
        config = dq.apply(config, token, scheme)
    return config


def test_shift0_equals_shift():
    rng = random.Random(23)
    checked = 0
    while checked < 50:
        config = _walk_to(rng, rng.randint(1, 6), SHIFTK, rng.randint(0, 10))
        if not dq.legal(config, tr.shift_k(0), SHIFTK):
            continue
        via_k = dq.apply(config, tr.shift_k(0), SHIFTK)
        via_plain = dq.apply(config, tr.shift(), SWAP)
        assert via_k == via_plain
        checked += 1


def test_swap_k_equals_k_swaps():
    rng = random.Random(29)
    checked = 0
    while checked < 50:
        n = rng.randint(3, 7)
        config = _walk_to(rng, n, SWAPK, rng.randint(2, 14))
        k = rng.randint(1, 3)
        if not dq.legal(config, tr.swap_k(k), SWAPK):
            continue
        via_k = dq.apply(config, tr.swap_k(k), SWAPK)
        via_steps = config
        for _ in range(k):
            via_steps = dq.apply(via_steps, tr.swap(), SWAP)
        assert via_k == via_steps
        checked += 1


@given(st.integers(1, 8), st.data())
@settings(deadline=None)
def test_random_walks_stay_legal(n, data):
    scheme = data.draw(st.sampled_from(ALL_SCHEMES))
    seed = data.draw(st.integers(0, 2**31))
    config = dq.initial(n)
    for token in random_walk(random.Random(seed), n, scheme):
        assert dq.illegality(config, token, scheme) is None
        config = dq.apply(config, token, scheme)
