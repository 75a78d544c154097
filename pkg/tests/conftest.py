import numpy as np
import pytest

from make_toy_corpus import CLASSES, toy_dialogues, write_jsonl, write_scheme
from higru.models.encoder import Variant
from higru.models.labels import LabelScheme
from higru.models.network import ModelConfig, ModelParams

ALL_VARIANTS = [Variant.PLAIN, Variant.FUSION, Variant.SELF_ATTENTION]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scheme():
    return LabelScheme.from_dict({'classes': CLASSES, 'evaluated': CLASSES})


@pytest.fixture
def toy_files(tmp_path):
    """Toy train/val corpora and their label scheme on disk"""
    paths = {
        'train': tmp_path / 'train.jsonl',
        'val': tmp_path / 'val.jsonl',
        'scheme': tmp_path / 'scheme.json',
    }
    write_jsonl(paths['train'], toy_dialogues(seed=0))
    write_jsonl(paths['val'], toy_dialogues(n_dialogues=3, seed=1, prefix='val'))
    write_scheme(paths['scheme'])
    return {name: str(path) for name, path in paths.items()}


def toy_model_config(variant=Variant.SELF_ATTENTION, **overrides):
    values = dict(variant=variant, d0=4, d1=3, d2=3, fc_hidden=(5,), dropout=0.0, n_classes=3, vocab_size=10)
    values.update(overrides)
    return ModelConfig(**values)


def toy_model(variant=Variant.SELF_ATTENTION, seed=0, **overrides):
    return ModelParams.initialize(toy_model_config(variant, **overrides), np.random.default_rng(seed))


@pytest.fixture
def toy_dialogue():
    """Three utterances of 2-4 token ids inside a vocabulary of 10"""
    return [np.array([2, 5, 3]), np.array([7, 4]), np.array([9, 2, 6, 8])]
