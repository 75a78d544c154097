# Models package
from higru.models.corpus import Corpus, Dialogue, Utterance
from higru.models.encoder import Variant
from higru.models.labels import LabelScheme
from higru.models.network import ModelConfig, ModelParams
from higru.models.vocabulary import EncodedDialogue, Vocabulary

__all__ = [
    'Corpus', 'Dialogue', 'Utterance',
    'Variant',
    'LabelScheme',
    'ModelConfig', 'ModelParams',
    'EncodedDialogue', 'Vocabulary',
]
