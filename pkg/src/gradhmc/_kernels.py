"""Hot numeric kernels, JIT-compiled with numba when available.

Set ``GRADHMC_DISABLE_NUMBA=1`` before import to force the pure-numpy
fallback path (same functions, uncompiled). ``benchmarks/bench_kernels.py``
compares the two paths. Each kernel is self-contained so the fallback
variants never route through jitted code.
"""

import os

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))

NUMBA_ENABLED = os.environ.get("GRADHMC_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False


def _mlp_forward(w1, b1, w2, b2, mean, sd, q):
    x = (q - mean) / sd
    z = np.dot(w1, x) + b1
    # softplus without overflow; exact z for large z
    a = np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
    return np.dot(w2, a) + b2


def _mlp_leapfrog(w1, b1, w2, b2, mean, sd, q0, p0, step_size, n_steps):
    """Full leapfrog trajectory driven by a single-block MLP gradient.

    Returns (q, p, ok); ok is False when the state went non-finite.
    """
    q = q0.copy()
    p = p0.copy()
    x = (q - mean) / sd
    z = np.dot(w1, x) + b1
    a = np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
    g = np.dot(w2, a) + b2
    p = p - 0.5 * step_size * g
    for i in range(n_steps):
        q = q + step_size * p
        if not np.all(np.isfinite(q)):
            return q, p, False
        x = (q - mean) / sd
        z = np.dot(w1, x) + b1
        a = np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
        g = np.dot(w2, a) + b2
        if i < n_steps - 1:
            p = p - step_size * g
        else:
            p = p - 0.5 * step_size * g
        if not np.all(np.isfinite(p)):
            return q, p, False
    return q, p, True


def _garch_sigma2(y, alpha, beta, presample_var):
    """Conditional-variance recursion s[t] = a0 + sum a_j y[t-j]^2 + sum b_j s[t-j].

    Entries t < max(m, r) stay at ``presample_var``.
    """
    m = alpha.shape[0] - 1
    r = beta.shape[0]
    s = max(m, r)
    T = y.shape[0]
    sig2 = np.empty(T)
    for t in range(min(s, T)):
        sig2[t] = presample_var
    for t in range(s, T):
        v = alpha[0]
        for j in range(1, m + 1):
            v += alpha[j] * y[t - j] ** 2
        for j in range(1, r + 1):
            v += beta[j - 1] * sig2[t - j]
        sig2[t] = v
    return sig2


def _garch_nll(y, alpha, beta, presample_var):
    """Negative log-likelihood conditioning on the first max(m, r) observations."""
    m = alpha.shape[0] - 1
    r = beta.shape[0]
    s = max(m, r)
    T = y.shape[0]
    sig2 = np.empty(T)
    for t in range(min(s, T)):
        sig2[t] = presample_var
    nll = 0.0
    for t in range(s, T):
        v = alpha[0]
        for j in range(1, m + 1):
            v += alpha[j] * y[t - j] ** 2
        for j in range(1, r + 1):
            v += beta[j - 1] * sig2[t - j]
        sig2[t] = v
        nll += 0.5 * (LOG_2PI + np.log(v) + y[t] ** 2 / v)
    return nll


def _garch_nll_grad(y, alpha, beta, presample_var):
    """NLL and its gradient w.r.t. (alpha_0..alpha_m, beta_1..beta_r).

    Sensitivities d sigma2[t] / d theta follow the same linear recursion as
    sigma2 itself; presample variances carry zero sensitivity.
    """
    m = alpha.shape[0] - 1
    r = beta.shape[0]
    s = max(m, r)
    T = y.shape[0]
    k = m + 1 + r
    sig2 = np.empty(T)
    sens = np.zeros((T, k))
    for t in range(min(s, T)):
        sig2[t] = presample_var
    nll = 0.0
    grad = np.zeros(k)
    for t in range(s, T):
        v = alpha[0]
        for j in range(1, m + 1):
            v += alpha[j] * y[t - j] ** 2
        for j in range(1, r + 1):
            v += beta[j - 1] * sig2[t - j]
        sig2[t] = v
        sens[t, 0] = 1.0
        for j in range(1, m + 1):
            sens[t, j] = y[t - j] ** 2
        for j in range(1, r + 1):
            sens[t, m + j] = sig2[t - j]
        for j in range(1, r + 1):
            bj = beta[j - 1]
            if bj != 0.0:
                for c in range(k):
                    sens[t, c] += bj * sens[t - j, c]
        w = 0.5 * (1.0 / v - y[t] ** 2 / (v * v))
        nll += 0.5 * (LOG_2PI + np.log(v) + y[t] ** 2 / v)
        for c in range(k):
            grad[c] += w * sens[t, c]
    return nll, grad


# Plain-python references, kept importable for the fallback/JIT benchmark.
py_mlp_forward = _mlp_forward
py_mlp_leapfrog = _mlp_leapfrog
py_garch_sigma2 = _garch_sigma2
py_garch_nll = _garch_nll
py_garch_nll_grad = _garch_nll_grad

if NUMBA_ENABLED:
    mlp_forward = _njit(cache=True)(_mlp_forward)
    mlp_leapfrog = _njit(cache=True)(_mlp_leapfrog)
    garch_sigma2 = _njit(cache=True)(_garch_sigma2)
    garch_nll = _njit(cache=True)(_garch_nll)
    garch_nll_grad = _njit(cache=True)(_garch_nll_grad)
else:
    mlp_forward = _mlp_forward
    mlp_leapfrog = _mlp_leapfrog
    garch_sigma2 = _garch_sigma2
    garch_nll = _garch_nll
    garch_nll_grad = _garch_nll_grad


def warmup():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    y = np.array([0.1, -0.2, 0.3, 0.05])
    alpha = np.array([0.1, 0.2])
    beta = np.array([0.3])
    garch_sigma2(y, alpha, beta, 1.0)
    garch_nll(y, alpha, beta, 1.0)
    garch_nll_grad(y, alpha, beta, 1.0)
    w1 = np.ones((2, 2))
    b1 = np.zeros(2)
    w2 = np.ones((2, 2))
    b2 = np.zeros(2)
    mean = np.zeros(2)
    sd = np.ones(2)
    q = np.zeros(2)
    mlp_forward(w1, b1, w2, b2, mean, sd, q)
    mlp_leapfrog(w1, b1, w2, b2, mean, sd, q, q.copy(), 0.1, 2)
