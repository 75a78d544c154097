"""Central finite-difference oracle for checking autodiff gradients"""
import numpy as np

from higru.utils.tensor import reset_grads

STEP = 1e-5
RTOL = 1e-4
ATOL = 1e-8


def numerical_gradient(loss_fn, tensor, step=STEP):
    """
    Central differences of a scalar function with respect to one tensor

    Args:
        loss_fn: zero-argument callable returning a scalar Tensor
        tensor: the tensor whose .data is perturbed in place
        step: perturbation size

    Returns:
        numpy array shaped like tensor.data
    """
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = loss_fn().item()
        flat[i] = original - step
        minus = loss_fn().item()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * step)
    return grad


def gradient_mismatches(loss_fn, tensors, rtol=RTOL, atol=ATOL, step=STEP):
    """
    Compare autodiff against finite differences for every tensor

    Returns:
        list of (index, max abs error, allowed) for tensors that fail
        max(rtol*|g|, atol) elementwise; empty when all agree
    """
    reset_grads(tensors)
    loss_fn().backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]

    failures = []
    for i, (t, g) in enumerate(zip(tensors, analytic)):
        numeric = numerical_gradient(loss_fn, t, step)
        allowed = np.maximum(rtol * np.abs(numeric), atol)
        error = np.abs(g - numeric)
        if np.any(error > allowed) or not np.all(np.isfinite(g)):
            failures.append((i, float(error.max()), float(allowed.min())))
    return failures
