"""Central finite-difference gradient oracle shared by the test modules."""

import numpy as np

from holofocus.tensor import Tensor


def numeric_grad(fn, arrays, index, h=1e-5):
    """d fn(*arrays) / d arrays[index] by central differences (fn returns a float)."""
    base = [a.copy() for a in arrays]
    target = base[index]
    grad = np.zeros_like(target)
    it = np.nditer(target, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        orig = target[i]
        target[i] = orig + h
        up = fn(*base)
        target[i] = orig - h
        down = fn(*base)
        target[i] = orig
        grad[i] = (up - down) / (2 * h)
    return grad


def analytic_grads(fn, arrays):
    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    fn(*leaves).backward()
    return [leaf.grad for leaf in leaves]


def rel_err(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def check(op, arrays, h=1e-5):
    """Max relative error over all inputs between backward and finite differences.

    ``op`` maps Tensors to a Tensor; the checked scalar is sum(op(...) * probe)
    with a fixed random probe so every output element matters.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    out_shape = op(*[Tensor(a) for a in arrays]).shape
    probe = np.random.default_rng(1234).normal(size=out_shape)

    def scalar_t(*ts):
        from holofocus import tensor as T
        return T.sum(T.mul(op(*ts), Tensor(probe)))

    def scalar_np(*arrs):
        return float(np.sum(op(*[Tensor(a) for a in arrs]).data * probe))

    grads = analytic_grads(scalar_t, arrays)
    return max(rel_err(g, numeric_grad(scalar_np, arrays, i, h)) for i, g in enumerate(grads))
