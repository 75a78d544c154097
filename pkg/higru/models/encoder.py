"""
Word-level and utterance-level encoders

Both levels share one shape: a bidirectional GRU over the sequence, an
optional directional self-attention over each direction's states, a fusion
layer that maps the concatenated features back to the hidden width, and
dropout. The word level max-pools the result into one utterance vector; the
utterance level keeps one contextual vector per utterance.

Row-vector convention throughout: a sequence is an (M, d) matrix, GRU input
and recurrent weights are (d_in, d_hid) / (d_hid, d_hid), fusion weights are
(d_out, d_cat) and are applied as x @ W.T + b.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from higru.errors import ConfigError, ContractError, DimensionError, EmptySequenceError
from higru.utils.tensor import (
    Tensor, concat, dropout, masked_softmax, matmul, max_over_time, parameter, reshape, sigmoid, tanh,
)


class Variant(str, Enum):
    PLAIN = 'plain'
    FUSION = 'f'
    SELF_ATTENTION = 'sf'

    @classmethod
    def parse(cls, name):
        """Accept 'higru', 'higru-f', 'higru-sf' as well as 'plain', 'f', 'sf'"""
        if isinstance(name, cls):
            return name
        key = str(name).lower()
        if key.startswith('higru'):
            key = key[len('higru'):].lstrip('-') or 'plain'
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"Unknown variant '{name}' (use higru, higru-f or higru-sf)") from None

    @property
    def cli_name(self):
        return 'higru' if self is Variant.PLAIN else f'higru-{self.value}'


def fusion_width(variant, d_individual, d_hidden):
    """Width of the concatenated features the fusion layer consumes"""
    variant = Variant.parse(variant)
    if variant is Variant.PLAIN:
        return 2 * d_hidden
    if variant is Variant.FUSION:
        return d_individual + 2 * d_hidden
    return d_individual + 4 * d_hidden


def _uniform(rng, shape, bound):
    return parameter(rng.uniform(-bound, bound, size=shape))


# ============== PARAMETERS ==============

@dataclass
class GRUCellParams:
    W_z: Tensor
    W_r: Tensor
    W_h: Tensor
    U_z: Tensor
    U_r: Tensor
    U_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor

    def __post_init__(self):
        d_in, d_hid = self.W_z.shape
        for name in ('W_z', 'W_r', 'W_h'):
            if getattr(self, name).shape != (d_in, d_hid):
                raise DimensionError(f'GRU {name} must be {(d_in, d_hid)}, got {getattr(self, name).shape}')
        for name in ('U_z', 'U_r', 'U_h'):
            if getattr(self, name).shape != (d_hid, d_hid):
                raise DimensionError(f'GRU {name} must be {(d_hid, d_hid)}, got {getattr(self, name).shape}')
        for name in ('b_z', 'b_r', 'b_h'):
            if getattr(self, name).shape != (d_hid,):
                raise DimensionError(f'GRU {name} must be {(d_hid,)}, got {getattr(self, name).shape}')

    @property
    def d_in(self):
        return self.W_z.shape[0]

    @property
    def d_hid(self):
        return self.W_z.shape[1]

    @classmethod
    def initialize(cls, d_in, d_hid, rng):
        """Weights uniform in ±1/sqrt(d_hid), biases zero"""
        bound = 1.0 / np.sqrt(d_hid)
        return cls(
            W_z=_uniform(rng, (d_in, d_hid), bound),
            W_r=_uniform(rng, (d_in, d_hid), bound),
            W_h=_uniform(rng, (d_in, d_hid), bound),
            U_z=_uniform(rng, (d_hid, d_hid), bound),
            U_r=_uniform(rng, (d_hid, d_hid), bound),
            U_h=_uniform(rng, (d_hid, d_hid), bound),
            b_z=parameter(np.zeros(d_hid)),
            b_r=parameter(np.zeros(d_hid)),
            b_h=parameter(np.zeros(d_hid)),
        )

    def named_parameters(self, prefix):
        names = ('W_z', 'W_r', 'W_h', 'U_z', 'U_r', 'U_h', 'b_z', 'b_r', 'b_h')
        return [(f'{prefix}.{name}', getattr(self, name)) for name in names]


@dataclass
class BiGRUParams:
    forward: GRUCellParams
    backward: GRUCellParams

    def __post_init__(self):
        if (self.forward.d_in, self.forward.d_hid) != (self.backward.d_in, self.backward.d_hid):
            raise DimensionError('forward and backward GRU cells must share d_in and d_hid')

    @property
    def d_in(self):
        return self.forward.d_in

    @property
    def d_hid(self):
        return self.forward.d_hid

    @classmethod
    def initialize(cls, d_in, d_hid, rng):
        return cls(forward=GRUCellParams.initialize(d_in, d_hid, rng),
                   backward=GRUCellParams.initialize(d_in, d_hid, rng))

    def named_parameters(self, prefix):
        return self.forward.named_parameters(f'{prefix}.fwd') + self.backward.named_parameters(f'{prefix}.bwd')


@dataclass
class FusionParams:
    """Affine map over the variant's concatenated features; the width is checked on construction"""
    W: Tensor
    b: Tensor
    variant: Variant
    d_individual: int
    d_hidden: int

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        expected = fusion_width(self.variant, self.d_individual, self.d_hidden)
        if self.W.ndim != 2 or self.W.shape[1] != expected:
            raise DimensionError(f'{self.variant.cli_name} fusion needs W with {expected} columns '
                                 f'(d_ind={self.d_individual}, d_hid={self.d_hidden}), got {self.W.shape}')
        if self.b.shape != (self.W.shape[0],):
            raise DimensionError(f'fusion bias must be {(self.W.shape[0],)}, got {self.b.shape}')

    @property
    def d_cat(self):
        return self.W.shape[1]

    @property
    def d_out(self):
        return self.W.shape[0]

    @classmethod
    def initialize(cls, variant, d_individual, d_hidden, d_out, rng):
        width = fusion_width(variant, d_individual, d_hidden)
        return cls(W=_uniform(rng, (d_out, width), 1.0 / np.sqrt(d_out)), b=parameter(np.zeros(d_out)),
                   variant=variant, d_individual=d_individual, d_hidden=d_hidden)

    def named_parameters(self, prefix):
        return [(f'{prefix}.W', self.W), (f'{prefix}.b', self.b)]


@dataclass
class LevelParams:
    """One encoder level: BiGRU plus its fusion layer"""
    bigru: BiGRUParams
    fusion: FusionParams

    def __post_init__(self):
        if self.fusion.d_hidden != self.bigru.d_hid or self.fusion.d_individual != self.bigru.d_in:
            raise DimensionError('fusion layer dimensions do not match the BiGRU')

    @property
    def variant(self):
        return self.fusion.variant

    @classmethod
    def initialize(cls, variant, d_in, d_hid, rng):
        return cls(bigru=BiGRUParams.initialize(d_in, d_hid, rng),
                   fusion=FusionParams.initialize(variant, d_in, d_hid, d_hid, rng))

    def named_parameters(self, prefix):
        return self.bigru.named_parameters(f'{prefix}.gru') + self.fusion.named_parameters(f'{prefix}.fusion')


# ============== RECURRENCE ==============

def _step(cell, xz, xr, xh, h_prev):
    z = sigmoid(xz + matmul(h_prev, cell.U_z))
    r = sigmoid(xr + matmul(h_prev, cell.U_r))
    candidate = tanh(xh + matmul(r * h_prev, cell.U_h))
    return (1.0 - z) * h_prev + z * candidate


def _as_row(x, width, name):
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.shape not in ((width,), (1, width)):
        raise DimensionError(f'{name} must have width {width}, got shape {x.shape}')
    return reshape(x, (1, width))


def gru_cell_step(params, x, h_prev):
    """
    One GRU update

    z = σ(x W_z + h U_z + b_z), r = σ(x W_r + h U_r + b_r),
    ĥ = tanh(x W_h + (r ⊙ h) U_h + b_h), h' = (1 - z) ⊙ h + z ⊙ ĥ

    Returns a tensor with h_prev's rank.
    """
    x_row = _as_row(x, params.d_in, 'x')
    h_row = _as_row(h_prev, params.d_hid, 'h_prev')
    h = _step(params,
              matmul(x_row, params.W_z) + params.b_z,
              matmul(x_row, params.W_r) + params.b_r,
              matmul(x_row, params.W_h) + params.b_h,
              h_row)
    h_shape = h_prev.shape if isinstance(h_prev, Tensor) else np.shape(h_prev)
    return reshape(h, h_shape)


def _run_direction(cell, inputs, steps, length):
    xz = matmul(inputs, cell.W_z) + cell.b_z
    xr = matmul(inputs, cell.W_r) + cell.b_r
    xh = matmul(inputs, cell.W_h) + cell.b_h
    h = Tensor(np.zeros((1, cell.d_hid)))
    states = {}
    for k in steps:
        h = _step(cell, xz[k:k + 1], xr[k:k + 1], xh[k:k + 1], h)
        states[k] = h
    rows = [states[k] for k in range(length)]
    padding = inputs.shape[0] - length
    if padding:
        rows.append(Tensor(np.zeros((padding, cell.d_hid))))
    return concat(rows, axis=0)


def _check_length(inputs, length):
    if inputs.ndim != 2:
        raise DimensionError(f'expected an (M, d) sequence, got shape {inputs.shape}')
    total = inputs.shape[0]
    length = total if length is None else int(length)
    if total == 0 or length == 0:
        raise EmptySequenceError('sequence has no time steps')
    if length > total:
        raise ContractError(f'length {length} exceeds the {total} rows provided')
    return length


def bigru_run(params, inputs, length=None):
    """
    Run both directions of a BiGRU from zero initial states

    Args:
        params: BiGRUParams
        inputs: (M, d_in) Tensor
        length: true length when inputs carry padded rows at the end; the
            recurrence stops there and padded rows of the outputs are zero

    Returns:
        (forward states, backward states), each (M, d_hid)
    """
    length = _check_length(inputs, length)
    if inputs.shape[1] != params.d_in:
        raise DimensionError(f'BiGRU expects width {params.d_in}, got {inputs.shape[1]}')
    forward = _run_direction(params.forward, inputs, range(length), length)
    backward = _run_direction(params.backward, inputs, range(length - 1, -1, -1), length)
    return forward, backward


def directional_self_attention(states, valid=None, return_weights=False):
    """
    Dot-product self-attention over one direction's hidden states

    Each position k gets sum_p a_kp h_p with a_k = softmax_p(h_k . h_p),
    positions p >= valid masked out. Forward states give the left context,
    backward states the right context.
    """
    valid = states.shape[0] if valid is None else valid
    scores = matmul(states, states.T)
    weights = masked_softmax(scores, valid)
    context = matmul(weights, states)
    return (context, weights) if return_weights else context


def fuse(variant, forward, backward, individual, attn_left, attn_right, params):
    """
    tanh(W [features] + b) over every row, features ordered as
        plain: [fwd; bwd]
        f:     [fwd; individual; bwd]
        sf:    [left; fwd; individual; bwd; right]

    Raises:
        DimensionError: if the concatenated width differs from the layer's
    """
    variant = Variant.parse(variant)
    if variant is not params.variant:
        raise DimensionError(f'fusion layer built for {params.variant.cli_name}, called as {variant.cli_name}')
    if variant is Variant.PLAIN:
        parts = [forward, backward]
    elif variant is Variant.FUSION:
        parts = [forward, individual, backward]
    else:
        parts = [attn_left, forward, individual, backward, attn_right]
    if any(p is None for p in parts):
        raise ContractError(f'{variant.cli_name} fusion is missing an input')
    width = sum(p.shape[-1] for p in parts)
    if width != params.d_cat:
        raise DimensionError(f'{variant.cli_name} fusion expects width {params.d_cat}, got {width}')
    features = concat(parts, axis=1)
    return tanh(matmul(features, params.W.T) + params.b)


def _contextualize(inputs, level, rate, train, rng, length):
    length = _check_length(inputs, length)
    forward, backward = bigru_run(level.bigru, inputs, length)
    left = right = None
    if level.variant is Variant.SELF_ATTENTION:
        left = directional_self_attention(forward, length)
        right = directional_self_attention(backward, length)
    context = fuse(level.variant, forward, backward, inputs, left, right, level.fusion)
    context = dropout(context, rate, train, rng)
    if length < inputs.shape[0]:
        context = context[:length]
    return context


def encode_utterance(word_embeddings, level, rate=0.0, train=False, rng=None, length=None):
    """
    Individual utterance embedding e(u_j): contextual word embeddings max-pooled over time

    Args:
        word_embeddings: (M, d0) Tensor
        level: word-level LevelParams
        rate: dropout rate applied to the contextual word embeddings
        train: dropout active when True
        rng: numpy Generator for dropout
        length: true token count when the rows are padded

    Returns:
        (d1,) Tensor
    """
    return max_over_time(_contextualize(word_embeddings, level, rate, train, rng, length))


def encode_dialogue(utterance_embeddings, level, rate=0.0, train=False, rng=None, length=None):
    """
    Contextual utterance embeddings e_c(u_j), one row per (valid) utterance

    Returns:
        (N, d2) Tensor
    """
    return _contextualize(utterance_embeddings, level, rate, train, rng, length)
