import numpy as np

from higru.errors import ContractError
from higru.utils.tensor import Tensor, log2, total

LOG_FLOOR = 1e-12


def weighted_ce(probabilities, labels, weights, normalizer=None):
    """
    Weighted categorical cross-entropy in bits

        loss = -(1 / N) Σ_j ω_j log2(ŷ_j[c_j])

    Args:
        probabilities: (N, C) Tensor of softmax rows
        labels: N class ids; entries with zero weight may hold any valid id
        weights: N per-utterance weights ω(c_j)
        normalizer: divisor, defaults to N (utterances in the batch)

    Returns:
        scalar Tensor
    """
    labels = np.asarray(labels, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    n, n_classes = probabilities.shape
    if labels.shape != (n,) or weights.shape != (n,):
        raise ContractError(f'expected {n} labels and weights, got {labels.shape} and {weights.shape}')
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ContractError(f'label outside 0..{n_classes - 1}')

    picked = probabilities[(np.arange(n), labels)]
    terms = log2(picked, floor=LOG_FLOOR) * Tensor(weights)
    return total(terms) * (-1.0 / (normalizer or n))
