"""
Dialogue corpus data model and JSON Lines loading

One dialogue per line:
    {"id": str, "utterances": [{"speaker": str, "text": str, "label": str|null}]}
"""
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from higru.errors import ConfigError, IngestError
from higru.models.vocabulary import UNK
from higru.utils.text import preprocess

logger = logging.getLogger(__name__)

SPLITS = ('train', 'val', 'test')


@dataclass(frozen=True)
class Utterance:
    """One labelled unit of speech"""
    speaker: str
    text: str
    tokens: tuple  # preprocessed token strings, never empty
    label: int = None  # class id, None when unlabelled
    degenerate: bool = False  # preprocessing left nothing; tokens is (UNK,)

    @property
    def length(self):
        return len(self.tokens)


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple

    def __post_init__(self):
        if not self.utterances:
            raise IngestError(f"dialogue '{self.id}' has no utterances")

    def __len__(self):
        return len(self.utterances)

    @property
    def labels(self):
        return [u.label for u in self.utterances]


@dataclass(frozen=True)
class Corpus:
    dialogues: tuple
    split: str = 'train'
    source: str = field(default=None, compare=False)

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ConfigError(f"Unknown split '{self.split}'")

    def __len__(self):
        return len(self.dialogues)

    def __iter__(self):
        return iter(self.dialogues)

    @property
    def n_utterances(self):
        return sum(len(d) for d in self.dialogues)


def make_utterance(speaker, text, label=None):
    """Preprocess raw text into an Utterance, substituting UNK for empty output"""
    tokens = preprocess(text)
    if tokens:
        return Utterance(speaker=speaker, text=text, tokens=tuple(tokens), label=label)
    return Utterance(speaker=speaker, text=text, tokens=(UNK,), label=label, degenerate=True)


def _parse_utterance(raw, scheme, path, line_no):
    if not isinstance(raw, dict):
        raise IngestError('utterance must be a JSON object', path=path, line=line_no)
    text = raw.get('text')
    if not isinstance(text, str):
        raise IngestError("utterance 'text' must be a string", path=path, line=line_no)
    label = raw.get('label')
    label_id = None
    if label is not None:
        if label not in scheme.classes:
            raise IngestError(f"unknown label '{label}'", path=path, line=line_no)
        label_id = scheme.classes.index(label)
    return make_utterance(str(raw.get('speaker', '')), text, label_id)


def load_corpus(path, scheme, split='train'):
    """
    Read a JSON Lines corpus

    Args:
        path: corpus file, UTF-8, one dialogue per line (blank lines skipped)
        scheme: LabelScheme that labels must belong to
        split: 'train', 'val' or 'test'

    Returns:
        Corpus

    Raises:
        IngestError: on malformed JSON, unknown labels, empty dialogues or
            an empty file; the message carries the line number
    """
    dialogues = []
    degenerate = 0
    with open(path, 'rb') as handle:
        for line_no, raw_line in enumerate(handle, start=1):
            try:
                line = raw_line.decode('utf-8')
            except UnicodeDecodeError as e:
                raise IngestError(f'not valid UTF-8: {e.reason}', path=path, line=line_no) from None
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(f'invalid JSON: {e.msg}', path=path, line=line_no) from None
            if not isinstance(raw, dict) or not isinstance(raw.get('utterances'), list):
                raise IngestError("expected an object with an 'utterances' list", path=path, line=line_no)
            utterances = tuple(_parse_utterance(u, scheme, path, line_no) for u in raw['utterances'])
            if not utterances:
                raise IngestError('dialogue has no utterances', path=path, line=line_no)
            degenerate += sum(u.degenerate for u in utterances)
            dialogues.append(Dialogue(id=str(raw.get('id', f'{split}-{line_no}')), utterances=utterances))

    if not dialogues:
        raise IngestError('corpus has no dialogues', path=path)
    if degenerate:
        logger.warning('%s: %d utterances were empty after preprocessing and map to UNK', path, degenerate)
    corpus = Corpus(dialogues=tuple(dialogues), split=split, source=str(path))
    logger.info('Loaded %s corpus %s: %d dialogues, %d utterances',
                split, path, len(corpus), corpus.n_utterances)
    return corpus


# ============== CORPUS TRANSFORMS ==============

def merge_corpora(corpora):
    """Concatenate corpora in argument order (mixed training sets)"""
    corpora = list(corpora)
    if not corpora:
        raise IngestError('no corpora to merge')
    if len(corpora) == 1:
        return corpora[0]
    dialogues = tuple(d for c in corpora for d in c.dialogues)
    return Corpus(dialogues=dialogues, split=corpora[0].split,
                  source='+'.join(str(c.source) for c in corpora))


def split_train_val(corpus, ratio, rng):
    """
    Shuffle dialogues and split them ratio : (1 - ratio) into train and val

    Raises:
        ConfigError: if either side would be empty
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f'train ratio must be in (0, 1), got {ratio}')
    order = rng.permutation(len(corpus))
    cut = int(np.ceil(ratio * len(corpus)))
    if cut == 0 or cut == len(corpus):
        raise ConfigError(f'cannot split {len(corpus)} dialogues at ratio {ratio}')
    train = tuple(corpus.dialogues[i] for i in order[:cut])
    val = tuple(corpus.dialogues[i] for i in order[cut:])
    return (Corpus(dialogues=train, split='train', source=corpus.source),
            Corpus(dialogues=val, split='val', source=corpus.source))


def drop_unevaluated(corpus, scheme):
    """Remove utterances labelled with excluded classes; drop dialogues left empty"""
    evaluated = scheme.evaluated
    dialogues = []
    for dialogue in corpus.dialogues:
        kept = tuple(u for u in dialogue.utterances if u.label is None or evaluated[u.label])
        if kept:
            dialogues.append(replace(dialogue, utterances=kept))
    if not dialogues:
        raise IngestError('no dialogues left after dropping unevaluated utterances', path=corpus.source)
    return replace(corpus, dialogues=tuple(dialogues))


def count_labels(corpus, n_classes):
    """Training utterances per class (I_c); unlabelled utterances are ignored"""
    counts = np.zeros(n_classes, dtype=np.int64)
    for dialogue in corpus.dialogues:
        for label in dialogue.labels:
            if label is not None:
                counts[label] += 1
    return counts


def corpus_statistics(corpus, scheme):
    """Dialogue, utterance and per-class counts"""
    counts = count_labels(corpus, scheme.n_classes)
    return {
        'dialogues': len(corpus),
        'utterances': corpus.n_utterances,
        'classes': {name: int(n) for name, n in zip(scheme.classes, counts)},
        'unlabelled': corpus.n_utterances - int(counts.sum()),
    }
