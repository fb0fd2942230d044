"""Shared test oracles, independent of the library's own gradient paths."""

import numpy as np


def fd_gradient(f, q, rel_step=1e-5):
    """Central finite differences with per-coordinate step scaled by |q_j| + 1."""
    q = np.asarray(q, dtype=float)
    g = np.empty_like(q)
    for j in range(q.size):
        h = rel_step * (abs(q[j]) + 1.0)
        qp = q.copy()
        qm = q.copy()
        qp[j] += h
        qm[j] -= h
        g[j] = (f(qp) - f(qm)) / (2.0 * h)
    return g


def assert_grad_matches(target, q, rtol=1e-5):
    num = fd_gradient(target.potential, q)
    ana = target.gradient(q)
    scale = np.maximum(np.abs(num), 1.0)
    np.testing.assert_allclose(ana, num, atol=rtol, rtol=rtol, err_msg=str(q))
    assert np.max(np.abs(ana - num) / scale) < rtol


def fd_param_gradient(loss_fn, arrays, rel_step=1e-6):
    """Finite-difference gradients of a scalar loss w.r.t. a list of arrays."""
    grads = []
    for arr in arrays:
        g = np.empty_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = arr[idx]
            h = rel_step * (abs(orig) + 1.0)
            arr[idx] = orig + h
            fp = loss_fn()
            arr[idx] = orig - h
            fm = loss_fn()
            arr[idx] = orig
            g[idx] = (fp - fm) / (2.0 * h)
            it.iternext()
        grads.append(g)
    return grads
