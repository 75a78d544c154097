"""
Pretrained word vectors in the textual word2vec format

    [count dim]            optional header
    token v1 v2 ... vd     one entry per line
"""
import logging

import numpy as np

from higru.errors import IngestError
from higru.models.vocabulary import PAD_ID

logger = logging.getLogger(__name__)

OOV_RANGE = 0.25


def random_embeddings(vocab_size, d0, rng):
    """Uniform [-0.25, 0.25] rows with an all-zero PAD row"""
    matrix = rng.uniform(-OOV_RANGE, OOV_RANGE, size=(vocab_size, d0))
    matrix[PAD_ID] = 0.0
    return matrix


def _is_header(parts):
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def load_embeddings(path, vocab, d0, rng):
    """
    Build the |V| x d0 embedding matrix for a vocabulary

    Rows for tokens found in the file are copied verbatim; every other row
    (UNK included) is drawn uniform in [-0.25, 0.25]; the PAD row is zero.

    Args:
        path: word-vector text file
        vocab: Vocabulary
        d0: expected vector width
        rng: numpy Generator for the random rows

    Returns:
        numpy float64 array of shape (len(vocab), d0)

    Raises:
        IngestError: on a malformed line or a width other than d0
    """
    matrix = random_embeddings(len(vocab), d0, rng)
    found = 0
    with open(path, encoding='utf-8', errors='replace') as handle:
        for line_no, line in enumerate(handle, start=1):
            parts = line.rstrip('\n').rstrip().split(' ')
            if line_no == 1 and _is_header(parts):
                if int(parts[1]) != d0:
                    raise IngestError(f'header declares dimension {parts[1]}, expected {d0}',
                                      path=path, line=line_no)
                continue
            if not parts or not parts[0]:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != d0:
                raise IngestError(f"token '{token}' has {len(values)} values, expected {d0}",
                                  path=path, line=line_no)
            try:
                row = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise IngestError(f"non-numeric value for token '{token}'", path=path, line=line_no) from None
            if not np.all(np.isfinite(row)):
                raise IngestError(f"non-finite value for token '{token}'", path=path, line=line_no)
            index = vocab.stoi.get(token)
            if index is None or index == PAD_ID:
                continue
            matrix[index] = row
            found += 1

    logger.info('Embeddings %s: %d of %d vocabulary tokens found, %d randomly initialised',
                path, found, len(vocab) - 2, len(vocab) - 2 - found)
    return matrix
