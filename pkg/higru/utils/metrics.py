"""
Confusion matrix with weighted (WA) and unweighted (UWA) accuracy

Rows are truth, columns are predictions. Only evaluated classes count:
utterances whose true class is excluded are skipped on update.
"""
import numpy as np

from higru.errors import ContractError, MetricError


class ConfusionMatrix:
    def __init__(self, evaluated, classes=None):
        self.evaluated = np.array(evaluated, dtype=bool)
        n = len(self.evaluated)
        self.classes = list(classes) if classes is not None else [str(i) for i in range(n)]
        self.counts = np.zeros((n, n), dtype=np.int64)

    def __repr__(self):
        return f'<ConfusionMatrix {self.total} samples>'

    @property
    def n_classes(self):
        return len(self.evaluated)

    @property
    def total(self):
        return int(self.counts[self.evaluated].sum())

    @classmethod
    def for_scheme(cls, scheme):
        return cls(scheme.evaluated, scheme.classes)

    def update(self, truth, pred):
        """Count one (truth, prediction) pair; excluded truths are ignored"""
        for value in (truth, pred):
            if not 0 <= int(value) < self.n_classes:
                raise ContractError(f'class id {value} outside 0..{self.n_classes - 1}')
        if self.evaluated[truth]:
            self.counts[truth, pred] += 1

    def update_many(self, truths, preds):
        for truth, pred in zip(truths, preds):
            self.update(truth, pred)

    def merge(self, other):
        """New matrix holding the summed counts of both"""
        if not np.array_equal(self.evaluated, other.evaluated):
            raise ContractError('cannot merge confusion matrices over different class schemes')
        merged = ConfusionMatrix(self.evaluated, self.classes)
        merged.counts = self.counts + other.counts
        return merged

    # ============== METRICS ==============

    def _rows(self):
        ids = np.flatnonzero(self.evaluated)
        totals = self.counts[ids].sum(axis=1)
        correct = self.counts[ids, ids]
        return ids, totals, correct

    def per_class_accuracy(self):
        """{class name: (n, accuracy)} for evaluated classes; accuracy is None when n is 0"""
        ids, totals, correct = self._rows()
        return {
            self.classes[i]: (int(n), (float(c) / n) if n else None)
            for i, n, c in zip(ids, totals, correct)
        }

    def wa(self):
        """
        Σ p_c a_c with p_c the class share of evaluated samples and a_c its accuracy

        Raises:
            MetricError: if no evaluated sample was counted
        """
        _, totals, correct = self._rows()
        grand = totals.sum()
        if grand == 0:
            raise MetricError('WA is undefined for an empty confusion matrix')
        share = totals / grand
        accuracy = np.divide(correct, totals, out=np.zeros(len(totals)), where=totals > 0)
        return float((share * accuracy).sum())

    def uwa(self):
        """
        Mean per-class accuracy over evaluated classes

        Raises:
            MetricError: naming the first evaluated class with no samples
        """
        ids, totals, correct = self._rows()
        absent = [self.classes[i] for i, n in zip(ids, totals) if n == 0]
        if absent:
            raise MetricError(f"UWA is undefined: evaluated class '{absent[0]}' has no samples")
        return float((correct / totals).mean())
