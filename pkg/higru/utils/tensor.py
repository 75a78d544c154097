"""
Dense tensor engine with reverse-mode automatic differentiation

A Tensor wraps a float64 numpy array. Every operation that touches a tensor
with requires_grad records its parents and a backward rule; Tensor.backward()
walks the recorded graph once in reverse topological order.

Only two broadcasts are supported: a scalar against anything, and a bias row
(shape (n,) or (1, n)) against a matrix of shape (m, n).
"""
import logging

import numpy as np

from higru.errors import (
    ConfigError, ContractError, DimensionError, EmptySequenceError, InvalidMaskError, TrainingError,
)

logger = logging.getLogger(__name__)

DTYPE = np.float64
MASK_VALUE = -1e30  # additive mask standing in for -inf


class Tensor:
    """Array value plus gradient slot and the graph node that produced it"""

    def __init__(self, data, requires_grad=False, parents=(), op='leaf', backward=None):
        self.data = np.asarray(data, dtype=DTYPE)
        self.grad = None
        self.requires_grad = requires_grad
        # graph node: op tag, parents and a closure over the saved activations
        self._op = op
        self._parents = parents
        self._backward = backward

    def __repr__(self):
        return f'<Tensor {self._op} shape={self.shape} requires_grad={self.requires_grad}>'

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def op(self):
        return self._op

    @property
    def parents(self):
        return self._parents

    @property
    def is_leaf(self):
        return not self._parents

    def item(self):
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data.copy())

    # ============== GRAPH TRAVERSAL ==============

    def _topological_order(self):
        """Nodes reachable through requires_grad edges, parents before children"""
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self):
        """
        Populate .grad on every leaf tensor that requires it

        Only leaves keep a .grad; gradients of intermediate results are
        released once propagated. Gradients accumulate: calling backward twice
        without reset_grads() adds the second pass on top of the first.

        Raises:
            ContractError: if this tensor is not a scalar
            TrainingError: if a leaf gradient ends up NaN or infinite
        """
        if self.size != 1:
            raise ContractError(f'backward() needs a scalar loss, got shape {self.shape}')
        if not self.requires_grad:
            return

        pending = {id(self): np.ones_like(self.data)}
        for node in reversed(self._topological_order()):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                if node.grad is None:
                    node.grad = np.array(g, dtype=DTYPE).reshape(node.shape)
                else:
                    node.grad += g
                if not np.all(np.isfinite(node.grad)):
                    raise TrainingError(f'non-finite gradient reached a leaf of shape {node.shape}')
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + pg
                else:
                    pending[key] = pg

    # ============== OPERATOR SUGAR ==============

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    @property
    def T(self):
        return transpose(self)


def parameter(data):
    """Create a learnable leaf tensor"""
    return Tensor(np.array(data, dtype=DTYPE), requires_grad=True)


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def reset_grads(tensors):
    for t in tensors:
        t.grad = None


def _result(data, parents, op, backward):
    requires_grad = any(p.requires_grad for p in parents)
    if not requires_grad:
        return Tensor(data, op=op)
    return Tensor(data, requires_grad=True, parents=tuple(parents), op=op, backward=backward)


# ============== BROADCASTING ==============

def _broadcast_shape(sa, sb, op):
    if sa == sb:
        return sa
    if sa == ():
        return sb
    if sb == ():
        return sa
    for row, mat in ((sa, sb), (sb, sa)):
        if len(mat) == 2 and row in ((mat[1],), (1, mat[1])):
            return mat
    raise DimensionError(f'{op}: incompatible shapes {sa} and {sb}')


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    if shape == ():
        return np.asarray(g.sum())
    if len(shape) == 1:
        return g.sum(axis=0)
    return g.sum(axis=0, keepdims=True)


# ============== ELEMENTWISE ==============

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, 'add')

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), 'add', backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, 'sub')

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), 'sub', backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, 'mul')

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), 'mul', backward)


def tanh(x):
    x = as_tensor(x)
    t = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - t * t),)

    return _result(t, (x,), 'tanh', backward)


def sigmoid(x):
    x = as_tensor(x)
    # tanh form is stable for large |x| and gives exactly 0.5 at 0
    s = 0.5 * (1.0 + np.tanh(0.5 * x.data))

    def backward(g):
        return (g * s * (1.0 - s),)

    return _result(s, (x,), 'sigmoid', backward)


def log2(x, floor=0.0):
    """Base-2 logarithm of max(x, floor); no gradient flows where the floor is active"""
    x = as_tensor(x)
    clipped = np.maximum(x.data, floor)
    active = x.data > floor

    def backward(g):
        return (np.where(active, g / (clipped * np.log(2.0)), 0.0),)

    return _result(np.log2(clipped), (x,), 'log2', backward)


_ELEMENTWISE = {'add': add, 'mul': mul, 'sub': sub, 'tanh': tanh, 'sigmoid': sigmoid}


def elementwise(op, *args):
    """Dispatch a pointwise operation by name"""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ContractError(f"Unknown elementwise op '{op}'") from None
    return fn(*args)


# ============== STRUCTURAL ==============

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f'matmul: cannot multiply {a.shape} by {b.shape}')

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), 'matmul', backward)


def transpose(x):
    x = as_tensor(x)
    if x.ndim != 2:
        raise DimensionError(f'transpose: expected a matrix, got shape {x.shape}')

    def backward(g):
        return (g.T,)

    return _result(x.data.T, (x,), 'transpose', backward)


def reshape(x, shape):
    x = as_tensor(x)
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise DimensionError(f'reshape: cannot view {x.shape} as {shape}') from None

    def backward(g):
        return (g.reshape(x.shape),)

    return _result(out, (x,), 'reshape', backward)


def total(x):
    """Sum of all entries as a scalar"""
    x = as_tensor(x)

    def backward(g):
        return (np.full(x.shape, float(g)),)

    return _result(np.asarray(x.data.sum()), (x,), 'sum', backward)


def take(x, key):
    """Index with numpy semantics; repeated indices accumulate their gradients"""
    x = as_tensor(x)
    out = x.data[key]

    def backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, key, g)
        return (full,)

    return _result(np.array(out, dtype=DTYPE), (x,), 'take', backward)


def concat(parts, axis=0):
    """
    Join tensors along an axis in argument order

    Raises:
        DimensionError: if the parts disagree on any other extent
    """
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise DimensionError('concat: no parts given')
    if len(parts) == 1:
        return parts[0]
    ndim = parts[0].ndim
    axis = axis % ndim
    for p in parts:
        if p.ndim != ndim or any(p.shape[i] != parts[0].shape[i] for i in range(ndim) if i != axis):
            shapes = ', '.join(str(q.shape) for q in parts)
            raise DimensionError(f'concat: parts disagree off axis {axis}: {shapes}')

    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result(np.concatenate([p.data for p in parts], axis=axis), parts, 'concat', backward)


def stack_rows(vectors):
    """Stack 1-D tensors of equal width into a matrix"""
    return concat([reshape(v, (1, -1)) for v in vectors], axis=0)


# ============== SEQUENCE OPS ==============

def masked_softmax(scores, valid):
    """
    Softmax over the last axis with positions >= valid masked out

    Masked positions get exactly zero weight and exactly zero gradient.

    Args:
        scores: Tensor of shape (n,) or (m, n)
        valid: number of leading valid positions, 0 < valid <= n

    Raises:
        InvalidMaskError: if valid is outside (0, n]
    """
    scores = as_tensor(scores)
    n = scores.shape[-1]
    if not 0 < valid <= n:
        raise InvalidMaskError(f'masked_softmax: valid={valid} outside 1..{n}')

    masked = scores.data.copy()
    masked[..., valid:] += MASK_VALUE
    masked -= masked.max(axis=-1, keepdims=True)
    e = np.exp(masked)
    y = e / e.sum(axis=-1, keepdims=True)
    y[..., valid:] = 0.0

    def backward(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _result(y, (scores,), 'masked_softmax', backward)


def softmax(scores):
    return masked_softmax(scores, as_tensor(scores).shape[-1])


def max_over_time(seq):
    """
    Per-dimension maximum over the rows of an (M, d) sequence

    Ties go to the first row. Gradient reaches only the winning rows.

    Raises:
        EmptySequenceError: if M is 0
    """
    seq = as_tensor(seq)
    if seq.ndim != 2:
        raise DimensionError(f'max_over_time: expected (M, d), got {seq.shape}')
    if seq.shape[0] == 0:
        raise EmptySequenceError('max_over_time: sequence has no time steps')
    winners = seq.data.argmax(axis=0)
    cols = np.arange(seq.shape[1])

    def backward(g):
        full = np.zeros_like(seq.data)
        full[winners, cols] = g
        return (full,)

    return _result(seq.data[winners, cols], (seq,), 'max_over_time', backward)


def dropout(x, rate, train, rng):
    """
    Inverted dropout: survivors are scaled by 1/(1-rate) so eval mode is identity

    Raises:
        ConfigError: if rate is outside [0, 1)
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f'dropout rate must be in [0, 1), got {rate}')
    x = as_tensor(x)
    if not train or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(g):
        return (g * keep,)

    return _result(x.data * keep, (x,), 'dropout', backward)
