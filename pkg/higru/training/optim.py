"""Adam, global-norm gradient clipping and the step learning-rate schedule"""
import numpy as np

from higru.errors import ConfigError, TrainingError


def lr_at_epoch(initial, epoch, every=20, factor=0.5):
    """initial * factor ** floor(epoch / every)"""
    if epoch < 0:
        raise ConfigError(f'epoch must be >= 0, got {epoch}')
    return initial * factor ** (epoch // every)


def _grads(params):
    return [p.grad for p in params if p.grad is not None]


def global_norm(params):
    return float(np.sqrt(sum(float((g * g).sum()) for g in _grads(params))))


def clip_gradients(params, max_norm=5.0):
    """
    Rescale all gradients together when their global L2 norm exceeds max_norm

    Returns:
        the factor applied (1.0 when no clipping happened)

    Raises:
        TrainingError: if any gradient is NaN or infinite
    """
    norm = global_norm(params)
    if not np.isfinite(norm):
        bad = [i for i, p in enumerate(params) if p.grad is not None and not np.all(np.isfinite(p.grad))]
        raise TrainingError(f'non-finite gradient in parameter #{bad[0] if bad else "?"}')
    if norm <= max_norm:
        return 1.0
    factor = max_norm / norm
    for g in _grads(params):
        g *= factor
    return factor


class Adam:
    """Adam with bias correction; holds the per-parameter moments and step count"""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self, lr):
        """Apply one update with learning rate lr; missing gradients count as zero"""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad if p.grad is not None else 0.0
            if p.grad is not None and not np.all(np.isfinite(g)):
                raise TrainingError(f'non-finite gradient at Adam step {self.t}')
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state_dict(self):
        return {'t': self.t, 'm': [m.copy() for m in self.m], 'v': [v.copy() for v in self.v]}
