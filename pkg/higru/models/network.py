"""
HiGRU model: embedding layer, word-level encoder, utterance-level encoder and
a feed-forward classifier with a softmax over all classes.
"""
from dataclasses import dataclass, field

import numpy as np

from higru.errors import ConfigError, ContractError, DimensionError
from higru.models.encoder import LevelParams, Variant, encode_dialogue, encode_utterance, fusion_width
from higru.utils.embeddings import random_embeddings
from higru.utils.tensor import Tensor, concat, dropout, matmul, parameter, softmax, stack_rows, tanh


@dataclass(frozen=True)
class ModelConfig:
    variant: Variant = Variant.SELF_ATTENTION
    d0: int = 300
    d1: int = 300
    d2: int = 300
    fc_hidden: tuple = (100, 100)
    dropout: float = 0.5
    n_classes: int = 4
    vocab_size: int = 2
    train_embeddings: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'variant', Variant.parse(self.variant))
        object.__setattr__(self, 'fc_hidden', tuple(int(h) for h in self.fc_hidden))
        dims = {'d0': self.d0, 'd1': self.d1, 'd2': self.d2, 'n_classes': self.n_classes}
        for name, value in dims.items():
            if int(value) <= 0:
                raise ConfigError(f'{name} must be positive, got {value}')
        if any(h <= 0 for h in self.fc_hidden):
            raise ConfigError(f'fc widths must be positive, got {self.fc_hidden}')
        if self.vocab_size < 2:
            raise ConfigError('vocab_size must cover at least PAD and UNK')
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f'dropout must be in [0, 1), got {self.dropout}')

    @property
    def word_fusion_width(self):
        return fusion_width(self.variant, self.d0, self.d1)

    @property
    def utterance_fusion_width(self):
        return fusion_width(self.variant, self.d1, self.d2)

    def parameter_count(self):
        """Closed-form number of learnable scalars"""
        def bigru(d_in, d_hid):
            return 2 * (3 * d_in * d_hid + 3 * d_hid * d_hid + 3 * d_hid)

        widths = (self.d2,) + self.fc_hidden + (self.n_classes,)
        classifier = sum(a * b + b for a, b in zip(widths[:-1], widths[1:]))
        return (self.vocab_size * self.d0
                + bigru(self.d0, self.d1) + self.d1 * self.word_fusion_width + self.d1
                + bigru(self.d1, self.d2) + self.d2 * self.utterance_fusion_width + self.d2
                + classifier)

    def to_dict(self):
        return {
            'variant': self.variant.value,
            'd0': self.d0,
            'd1': self.d1,
            'd2': self.d2,
            'fc_hidden': list(self.fc_hidden),
            'dropout': self.dropout,
            'n_classes': self.n_classes,
            'vocab_size': self.vocab_size,
            'train_embeddings': self.train_embeddings,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class AffineParams:
    W: Tensor  # (d_out, d_in)
    b: Tensor

    def __call__(self, x):
        return matmul(x, self.W.T) + self.b

    @classmethod
    def initialize(cls, d_in, d_out, rng):
        bound = 1.0 / np.sqrt(d_out)
        return cls(W=parameter(rng.uniform(-bound, bound, size=(d_out, d_in))), b=parameter(np.zeros(d_out)))


@dataclass
class ModelParams:
    config: ModelConfig
    embedding: Tensor
    lower: LevelParams
    upper: LevelParams
    classifier: list = field(default_factory=list)

    def named_parameters(self):
        """Every array in a fixed order, embedding first"""
        named = [('embedding', self.embedding)]
        named += self.lower.named_parameters('lower')
        named += self.upper.named_parameters('upper')
        for i, layer in enumerate(self.classifier):
            named += [(f'fc{i}.W', layer.W), (f'fc{i}.b', layer.b)]
        return named

    def parameters(self):
        """Trainable tensors; the embedding is left out when frozen"""
        return [t for _, t in self.named_parameters() if t.requires_grad]

    def arrays(self):
        return {name: t.data for name, t in self.named_parameters()}

    def load_arrays(self, arrays):
        """Copy arrays into the existing tensors, checking every shape"""
        named = dict(self.named_parameters())
        missing = sorted(set(named) - set(arrays))
        if missing:
            raise DimensionError(f'missing arrays: {", ".join(missing)}')
        for name, tensor in named.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise DimensionError(f'{name}: expected shape {tensor.shape}, got {value.shape}')
            tensor.data = value.copy()

    @classmethod
    def initialize(cls, config, rng, embeddings=None):
        """
        Fresh parameters for a config

        Args:
            config: ModelConfig
            rng: numpy Generator
            embeddings: optional (vocab_size, d0) matrix; random rows otherwise
        """
        if embeddings is None:
            embeddings = random_embeddings(config.vocab_size, config.d0, rng)
        embeddings = np.array(embeddings, dtype=np.float64)
        if embeddings.shape != (config.vocab_size, config.d0):
            raise DimensionError(f'embedding matrix must be {(config.vocab_size, config.d0)}, got {embeddings.shape}')

        lower = LevelParams.initialize(config.variant, config.d0, config.d1, rng)
        upper = LevelParams.initialize(config.variant, config.d1, config.d2, rng)
        widths = (config.d2,) + config.fc_hidden + (config.n_classes,)
        classifier = [AffineParams.initialize(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]
        return cls(config=config,
                   embedding=Tensor(embeddings, requires_grad=config.train_embeddings),
                   lower=lower, upper=upper, classifier=classifier)


# ============== FORWARD ==============

def _classify(params, context, train, rng):
    # affine -> tanh -> dropout after the first hidden layer, tanh after the rest, then the output map
    hidden = context
    for i, layer in enumerate(params.classifier[:-1]):
        hidden = tanh(layer(hidden))
        if i == 0:
            hidden = dropout(hidden, params.config.dropout, train, rng)
    logits = params.classifier[-1](hidden)
    return logits, softmax(logits)


def _check_mode(params, train, rng):
    if train and rng is None and params.config.dropout > 0:
        raise ContractError('train mode needs an rng for dropout')


def _check_ids(ids, vocab_size):
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ContractError(f'token id outside vocabulary of size {vocab_size}')


def forward(params, utterances, train=False, rng=None):
    """
    Emotion distributions for every utterance of one dialogue

    Args:
        params: ModelParams
        utterances: list of int id arrays, one per utterance, each non-empty
        train: enables dropout (then rng is required)
        rng: numpy Generator for dropout

    Returns:
        (logits, probabilities), each an (N, n_classes) Tensor

    Raises:
        ContractError: for an empty dialogue or utterance, or ids outside the vocabulary
    """
    if not len(utterances):
        raise ContractError('cannot run the model on an empty dialogue')
    lengths = [len(u) for u in utterances]
    if min(lengths) == 0:
        raise ContractError('every utterance needs at least one token')
    ids = np.concatenate([np.asarray(u, dtype=np.int64) for u in utterances])
    _check_ids(ids, params.config.vocab_size)
    _check_mode(params, train, rng)

    rate = params.config.dropout
    words = params.embedding[ids]
    bounds = np.cumsum([0] + lengths)
    pooled = [encode_utterance(words[start:end], params.lower, rate, train, rng)
              for start, end in zip(bounds[:-1], bounds[1:])]
    context = encode_dialogue(stack_rows(pooled), params.upper, rate, train, rng)
    return _classify(params, context, train, rng)


def forward_padded(params, token_matrix, lengths, n_utterances, train=False, rng=None):
    """
    Padded form of forward(): rows of token_matrix beyond n_utterances and
    columns beyond each row's length are padding and never affect the output

    Args:
        token_matrix: (N_pad, M_pad) int array
        lengths: true token count per row
        n_utterances: number of real utterances

    Returns:
        (logits, probabilities) for the n_utterances real rows
    """
    token_matrix = np.asarray(token_matrix, dtype=np.int64)
    if token_matrix.ndim != 2 or not 0 < n_utterances <= token_matrix.shape[0]:
        raise ContractError('token matrix must be (N_pad, M_pad) with 0 < n_utterances <= N_pad')
    _check_ids(token_matrix, params.config.vocab_size)
    _check_mode(params, train, rng)

    rate = params.config.dropout
    words = params.embedding[token_matrix]
    pooled = [encode_utterance(words[i], params.lower, rate, train, rng, length=lengths[i])
              for i in range(n_utterances)]
    rows = [stack_rows(pooled)]
    padding = token_matrix.shape[0] - n_utterances
    if padding:
        rows.append(Tensor(np.zeros((padding, params.config.d1))))
    context = encode_dialogue(concat(rows, axis=0), params.upper, rate, train, rng, length=n_utterances)
    return _classify(params, context, train, rng)


def select_classes(probabilities, evaluated_mask):
    """Argmax per row over evaluated classes; ties go to the lowest class id"""
    probabilities = np.asarray(probabilities)
    masked = np.where(np.asarray(evaluated_mask, dtype=bool), probabilities, -np.inf)
    return masked.argmax(axis=1).tolist()


def predict(params, utterances, evaluated_mask):
    """Predicted class id per utterance (eval mode)"""
    _, probabilities = forward(params, utterances)
    return select_classes(probabilities.data, evaluated_mask)
