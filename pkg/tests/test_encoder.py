import numpy as np
import pytest

from higru.errors import DimensionError, EmptySequenceError, InvalidMaskError
from higru.models.encoder import (
    BiGRUParams, FusionParams, GRUCellParams, LevelParams, Variant, bigru_run, directional_self_attention,
    encode_dialogue, encode_utterance, fuse, fusion_width, gru_cell_step,
)
from higru.utils.tensor import Tensor, concat, max_over_time, parameter, total


def zero_cell(d_in, d_hid):
    return GRUCellParams(
        **{name: parameter(np.zeros((d_in, d_hid))) for name in ('W_z', 'W_r', 'W_h')},
        **{name: parameter(np.zeros((d_hid, d_hid))) for name in ('U_z', 'U_r', 'U_h')},
        **{name: parameter(np.zeros(d_hid)) for name in ('b_z', 'b_r', 'b_h')},
    )


def test_variant_names():
    assert Variant.parse('higru') is Variant.PLAIN
    assert Variant.parse('higru-f') is Variant.FUSION
    assert Variant.parse('sf') is Variant.SELF_ATTENTION
    assert Variant.SELF_ATTENTION.cli_name == 'higru-sf'


# ============== GRU ==============

def test_zero_cell_halves_previous_state():
    v = np.array([0.4, -1.0, 2.0])
    h = gru_cell_step(zero_cell(2, 3), Tensor([1.0, 1.0]), Tensor(v))
    np.testing.assert_allclose(h.data, 0.5 * v)
    np.testing.assert_array_equal(gru_cell_step(zero_cell(2, 3), Tensor([1.0, 1.0]), Tensor(np.zeros(3))).data, 0)


def test_gru_cell_shape_checks(rng):
    cell = GRUCellParams.initialize(2, 3, rng)
    with pytest.raises(DimensionError):
        gru_cell_step(cell, Tensor(np.ones(3)), Tensor(np.zeros(3)))
    with pytest.raises(DimensionError):
        GRUCellParams(**{**vars(cell), 'U_h': parameter(np.zeros((2, 3)))})


def test_bigru_single_step(rng):
    params = BiGRUParams.initialize(2, 3, rng)
    x = Tensor(rng.normal(size=(1, 2)))
    fwd, bwd = bigru_run(params, x)
    np.testing.assert_allclose(fwd.data[0], gru_cell_step(params.forward, x[0], Tensor(np.zeros(3))).data)
    np.testing.assert_allclose(bwd.data[0], gru_cell_step(params.backward, x[0], Tensor(np.zeros(3))).data)


def test_bigru_matches_unrolled_steps(rng):
    params = BiGRUParams.initialize(2, 3, rng)
    x = Tensor(rng.normal(size=(3, 2)))
    fwd, bwd = bigru_run(params, x)
    h = Tensor(np.zeros(3))
    for k in range(3):
        h = gru_cell_step(params.forward, x[k], h)
        np.testing.assert_allclose(fwd.data[k], h.data, rtol=1e-12)
    h = Tensor(np.zeros(3))
    for k in (2, 1, 0):
        h = gru_cell_step(params.backward, x[k], h)
        np.testing.assert_allclose(bwd.data[k], h.data, rtol=1e-12)


def test_bigru_reversal_symmetry(rng):
    params = BiGRUParams.initialize(2, 3, rng)
    swapped = BiGRUParams(forward=params.backward, backward=params.forward)
    x = rng.normal(size=(4, 2))
    fwd, bwd = bigru_run(params, Tensor(x))
    fwd_r, bwd_r = bigru_run(swapped, Tensor(x[::-1].copy()))
    np.testing.assert_allclose(fwd_r.data, bwd.data[::-1], rtol=1e-12)
    np.testing.assert_allclose(bwd_r.data, fwd.data[::-1], rtol=1e-12)


def test_bigru_empty(rng):
    with pytest.raises(EmptySequenceError):
        bigru_run(BiGRUParams.initialize(2, 3, rng), Tensor(np.zeros((0, 2))))


def test_bigru_padding_rows_are_zero_and_ignored(rng):
    params = BiGRUParams.initialize(2, 3, rng)
    x = rng.normal(size=(3, 2))
    padded = np.vstack([x, rng.normal(size=(2, 2))])
    fwd, bwd = bigru_run(params, Tensor(x))
    fwd_p, bwd_p = bigru_run(params, Tensor(padded), length=3)
    np.testing.assert_allclose(fwd_p.data[:3], fwd.data, rtol=0, atol=1e-12)
    np.testing.assert_allclose(bwd_p.data[:3], bwd.data, rtol=0, atol=1e-12)
    assert np.all(fwd_p.data[3:] == 0) and np.all(bwd_p.data[3:] == 0)


# ============== SELF-ATTENTION ==============

def test_attention_single_position():
    states = Tensor([[0.3, -0.7]])
    np.testing.assert_allclose(directional_self_attention(states).data, states.data)


def test_attention_identical_states():
    states = Tensor(np.tile([0.2, 0.5, -1.0], (4, 1)))
    np.testing.assert_allclose(directional_self_attention(states).data, states.data, rtol=1e-12)


def test_attention_two_positions():
    context, weights = directional_self_attention(Tensor([[1.0, 0.0], [0.0, 1.0]]), return_weights=True)
    e = np.e
    np.testing.assert_allclose(weights.data[0], [e / (e + 1), 1 / (e + 1)])
    np.testing.assert_allclose(context.data[0], [e / (e + 1), 1 / (e + 1)])


def test_attention_masks_tail():
    states = Tensor([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    _, weights = directional_self_attention(states, valid=2, return_weights=True)
    assert np.all(weights.data[:, 2] == 0.0)
    with pytest.raises(InvalidMaskError):
        directional_self_attention(states, valid=0)


# ============== FUSION ==============

def test_fusion_widths():
    assert fusion_width(Variant.PLAIN, 2, 3) == 6
    assert fusion_width(Variant.FUSION, 2, 3) == 8
    assert fusion_width(Variant.SELF_ATTENTION, 3, 4) == 19


def test_fusion_rejects_wrong_width():
    with pytest.raises(DimensionError) as e:
        FusionParams(W=parameter(np.zeros((3, 10))), b=parameter(np.zeros(3)),
                     variant=Variant.FUSION, d_individual=2, d_hidden=3)
    assert 'higru-f' in str(e.value) and '8' in str(e.value)


def test_plain_fusion_selects_forward_states(rng):
    d = 3
    W = np.hstack([np.eye(d), np.zeros((d, d))])
    params = FusionParams(W=parameter(W), b=parameter(np.zeros(d)), variant=Variant.PLAIN,
                          d_individual=2, d_hidden=d)
    fwd = Tensor(rng.normal(size=(4, d)))
    bwd = Tensor(rng.normal(size=(4, d)))
    out = fuse(Variant.PLAIN, fwd, bwd, None, None, None, params)
    np.testing.assert_allclose(out.data, np.tanh(fwd.data))


def test_sf_fusion_feature_order(rng):
    # one-hot rows of W pick out each block in turn: [left; fwd; individual; bwd; right]
    d_ind, d_hid = 1, 1
    params = FusionParams(W=parameter(np.eye(5)), b=parameter(np.zeros(5)), variant=Variant.SELF_ATTENTION,
                          d_individual=d_ind, d_hidden=d_hid)
    parts = [Tensor([[v]]) for v in (0.1, 0.2, 0.3, 0.4, 0.5)]
    left, fwd, ind, bwd, right = parts
    out = fuse(Variant.SELF_ATTENTION, fwd, bwd, ind, left, right, params)
    np.testing.assert_allclose(out.data[0], np.tanh([0.1, 0.2, 0.3, 0.4, 0.5]))


# ============== LEVELS ==============

@pytest.mark.parametrize('variant', list(Variant))
def test_single_word_utterance(variant, rng):
    level = LevelParams.initialize(variant, 4, 3, rng)
    word = Tensor(rng.normal(size=(1, 4)))
    fwd, bwd = bigru_run(level.bigru, word)
    left = right = None
    if variant is Variant.SELF_ATTENTION:
        left, right = fwd, bwd
    expected = fuse(variant, fwd, bwd, word, left, right, level.fusion).data[0]
    np.testing.assert_allclose(encode_utterance(word, level).data, expected, rtol=1e-12)


def test_max_pool_ignores_duplicated_winner(rng):
    context = Tensor(rng.normal(size=(4, 3)))
    winner = int(np.argmax(context.data[:, 0]))
    context.data[winner] = np.abs(context.data).max() + 1.0
    duplicated = concat([context, context[winner:winner + 1]], axis=0)
    np.testing.assert_array_equal(max_over_time(duplicated).data, max_over_time(context).data)


def test_repeating_the_winning_word_keeps_the_utterance_embedding(rng):
    # zero recurrences leave each fused row a function of its own word only
    level = LevelParams.initialize(Variant.FUSION, 4, 3, rng)
    for cell in (level.bigru.forward, level.bigru.backward):
        for weight in vars(cell).values():
            weight.data[:] = 0.0
    words = rng.normal(size=(4, 4))
    fwd, bwd = bigru_run(level.bigru, Tensor(words))
    fused = fuse(Variant.FUSION, fwd, bwd, Tensor(words), None, None, level.fusion)
    winner = int(np.argmax(fused.data[:, 0]))

    repeated = np.vstack([words, words[winner]])
    np.testing.assert_allclose(encode_utterance(Tensor(repeated), level).data,
                               encode_utterance(Tensor(words), level).data, rtol=0, atol=1e-12)


def test_single_utterance_dialogue(rng):
    level = LevelParams.initialize(Variant.SELF_ATTENTION, 3, 4, rng)
    assert encode_dialogue(Tensor(rng.normal(size=(1, 3))), level).shape == (1, 4)


@pytest.mark.parametrize('variant', list(Variant))
def test_padded_rows_do_not_change_the_encoding(variant, rng):
    level = LevelParams.initialize(variant, 4, 3, rng)
    words = rng.normal(size=(3, 4))
    padded = np.vstack([words, 10.0 * rng.normal(size=(2, 4))])
    plain = encode_utterance(Tensor(words), level).data
    masked = encode_utterance(Tensor(padded), level, length=3).data
    np.testing.assert_allclose(masked, plain, rtol=0, atol=1e-12)

    contexts = encode_dialogue(Tensor(padded), level, length=3)
    assert contexts.shape == (3, 3)
    np.testing.assert_allclose(contexts.data, encode_dialogue(Tensor(words), level).data, rtol=0, atol=1e-12)


def test_dialogue_encoding_depends_on_order(rng):
    level = LevelParams.initialize(Variant.PLAIN, 3, 4, rng)
    utterances = rng.normal(size=(4, 3))
    forward_order = encode_dialogue(Tensor(utterances), level).data
    reversed_order = encode_dialogue(Tensor(utterances[::-1].copy()), level).data
    assert not np.allclose(reversed_order[::-1], forward_order)


def test_first_output_sees_the_last_utterance(rng):
    level = LevelParams.initialize(Variant.PLAIN, 3, 4, rng)
    utterances = parameter(rng.normal(size=(4, 3)))
    total(encode_dialogue(utterances, level)[0]).backward()
    assert np.any(utterances.grad[-1] != 0.0)
