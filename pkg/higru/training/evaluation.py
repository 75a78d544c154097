import logging
from concurrent.futures import ThreadPoolExecutor

from higru.models.network import forward, select_classes
from higru.utils.metrics import ConfusionMatrix

logger = logging.getLogger(__name__)


def _confusion(params, dialogues, scheme):
    cm = ConfusionMatrix.for_scheme(scheme)
    for dialogue in dialogues:
        _, probabilities = forward(params, dialogue.utterances)
        predictions = select_classes(probabilities.data, scheme.evaluated)
        for truth, pred in zip(dialogue.labels, predictions):
            if truth >= 0:
                cm.update(truth, pred)
    return cm


def evaluate(params, dialogues, scheme, threads=1):
    """
    Eval-mode confusion matrix over encoded dialogues

    With threads > 1 the dialogues are split into contiguous chunks scored
    on a thread pool and the per-chunk matrices are summed.
    """
    dialogues = list(dialogues)
    threads = max(1, min(int(threads or 1), len(dialogues)))
    if threads == 1:
        return _confusion(params, dialogues, scheme)

    size = -(-len(dialogues) // threads)
    chunks = [dialogues[i:i + size] for i in range(0, len(dialogues), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        matrices = list(pool.map(lambda chunk: _confusion(params, chunk, scheme), chunks))
    merged = matrices[0]
    for cm in matrices[1:]:
        merged = merged.merge(cm)
    return merged


def predict_dialogues(params, dialogues, scheme):
    """Yield (predicted class ids, probability rows) per encoded dialogue"""
    for dialogue in dialogues:
        _, probabilities = forward(params, dialogue.utterances)
        yield select_classes(probabilities.data, scheme.evaluated), probabilities.data
