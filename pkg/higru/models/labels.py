import json
from dataclasses import dataclass, replace

import numpy as np

from higru.errors import ConfigError, IngestError


@dataclass(frozen=True)
class LabelScheme:
    """Emotion classes, the evaluated subset, and (once computed) loss weights"""
    classes: tuple
    evaluated: tuple  # one bool per class
    counts: tuple = None  # training utterances per class, I_c
    alpha: float = None
    weights: tuple = None  # ω(c)

    def __post_init__(self):
        if len(self.classes) != len(set(self.classes)):
            raise ConfigError('Label scheme has duplicate class names')
        if len(self.evaluated) != len(self.classes):
            raise ConfigError('Evaluated mask must have one entry per class')
        if not any(self.evaluated):
            raise ConfigError('Label scheme must evaluate at least one class')

    def __len__(self):
        return len(self.classes)

    @property
    def n_classes(self):
        return len(self.classes)

    @property
    def evaluated_mask(self):
        return np.array(self.evaluated, dtype=bool)

    @property
    def evaluated_ids(self):
        return [i for i, flag in enumerate(self.evaluated) if flag]

    def index(self, name):
        """Class id for a label string"""
        try:
            return self.classes.index(name)
        except ValueError:
            raise ConfigError(f"Unknown label '{name}'") from None

    def name(self, class_id):
        return self.classes[class_id]

    def with_weights(self, counts, alpha):
        """Return a copy carrying I_c, α and the derived ω(c)"""
        weights = compute_class_weights(counts, alpha, self.evaluated)
        return replace(self, counts=tuple(int(c) for c in counts), alpha=float(alpha),
                       weights=tuple(float(w) for w in weights))

    def to_dict(self):
        return {
            'classes': list(self.classes),
            'evaluated': [c for c, flag in zip(self.classes, self.evaluated) if flag],
        }

    @classmethod
    def from_dict(cls, data):
        """Build from {"classes": [...], "evaluated": [...]}"""
        classes = data.get('classes')
        if not classes or not isinstance(classes, list):
            raise ConfigError("Label scheme needs a non-empty 'classes' list")
        evaluated = data.get('evaluated', classes)
        unknown = [c for c in evaluated if c not in classes]
        if unknown:
            raise ConfigError(f"Evaluated classes not in 'classes': {', '.join(unknown)}")
        chosen = set(evaluated)
        return cls(classes=tuple(classes), evaluated=tuple(c in chosen for c in classes))


def load_scheme(path):
    """Read a label scheme JSON file"""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise IngestError(f'invalid JSON: {e.msg}', path=path, line=e.lineno) from None
    except UnicodeDecodeError as e:
        raise IngestError(f'not valid UTF-8: {e.reason}', path=path) from None
    if not isinstance(data, dict):
        raise IngestError('label scheme must be a JSON object', path=path)
    return LabelScheme.from_dict(data)


def compute_class_weights(counts, alpha, evaluated):
    """
    Loss weights inversely proportional to I_c ** alpha

    ω(c) = sum over evaluated c' of I_c' ** alpha, divided by I_c ** alpha,
    for evaluated classes; 0 for every excluded class.

    Args:
        counts: training utterances per class, I_c >= 0
        alpha: smoothing exponent, >= 0
        evaluated: bool mask of evaluated classes

    Returns:
        numpy float64 array of weights

    Raises:
        ConfigError: if alpha < 0, or an evaluated class has no training
            utterances while alpha > 0
    """
    counts = np.asarray(counts, dtype=np.float64)
    evaluated = np.asarray(evaluated, dtype=bool)
    if alpha < 0:
        raise ConfigError(f'alpha must be >= 0, got {alpha}')
    if np.any(counts < 0):
        raise ConfigError('class counts must be non-negative')
    if alpha > 0:
        empty = np.flatnonzero(evaluated & (counts == 0))
        if empty.size:
            raise ConfigError(f'evaluated class {int(empty[0])} has no training utterances; '
                              f'cannot weight it with alpha={alpha}')

    powered = np.ones_like(counts) if alpha == 0 else counts ** alpha
    weights = np.zeros_like(counts)
    weights[evaluated] = powered[evaluated].sum() / powered[evaluated]
    return weights
