import numpy as np

from higru.errors import IngestError

PAD = '<pad>'
UNK = '<unk>'
PAD_ID = 0
UNK_ID = 1


class Vocabulary:
    """Token/id map with PAD=0 and UNK=1 reserved"""

    def __init__(self, tokens=()):
        self.itos = [PAD, UNK]
        self.stoi = {PAD: PAD_ID, UNK: UNK_ID}
        for token in tokens:
            self.add(token)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def __repr__(self):
        return f'<Vocabulary {len(self)} tokens>'

    def add(self, token):
        if token not in self.stoi:
            self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return self.stoi[token]

    def encode(self, tokens):
        """Token strings to an int64 id array; unknown tokens become UNK"""
        return np.array([self.stoi.get(t, UNK_ID) for t in tokens], dtype=np.int64)

    def decode(self, ids):
        return [self.itos[int(i)] for i in ids]

    @property
    def tokens(self):
        """Non-reserved tokens in id order"""
        return self.itos[2:]


def build_vocab(corpus):
    """
    Give every distinct training token an id in order of first occurrence

    Raises:
        IngestError: if the corpus has no dialogues
    """
    if not corpus.dialogues:
        raise IngestError('cannot build a vocabulary from an empty corpus')
    vocab = Vocabulary()
    for dialogue in corpus.dialogues:
        for utterance in dialogue.utterances:
            for token in utterance.tokens:
                vocab.add(token)
    return vocab


class EncodedDialogue:
    """Model-ready view of a dialogue: id arrays plus label ids (-1 when unlabelled)"""

    def __init__(self, dialogue, vocab):
        self.id = dialogue.id
        self.utterances = [vocab.encode(u.tokens) for u in dialogue.utterances]
        self.labels = np.array([-1 if u.label is None else u.label for u in dialogue.utterances],
                               dtype=np.int64)

    def __len__(self):
        return len(self.utterances)

    def loss_weights(self, class_weights):
        """ω(c_j) per utterance; unlabelled utterances weigh 0"""
        class_weights = np.asarray(class_weights, dtype=np.float64)
        return np.where(self.labels >= 0, class_weights[np.maximum(self.labels, 0)], 0.0)

    def padded(self, n_rows=None, n_cols=None):
        """(token matrix, lengths) padded with PAD to at least n_rows x n_cols"""
        lengths = [len(u) for u in self.utterances]
        n_rows = max(n_rows or 0, len(lengths))
        n_cols = max(n_cols or 0, max(lengths))
        matrix = np.full((n_rows, n_cols), PAD_ID, dtype=np.int64)
        for i, ids in enumerate(self.utterances):
            matrix[i, :len(ids)] = ids
        return matrix, lengths + [0] * (n_rows - len(lengths))


def encode_corpus(corpus, vocab):
    return [EncodedDialogue(d, vocab) for d in corpus.dialogues]
