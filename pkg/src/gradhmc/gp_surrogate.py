"""Gaussian-process surrogate of the potential itself, used as a gradient
oracle by differentiating the predictive mean.

Squared-exponential kernel exp(-||x - x'||^2 / (2 l^2)) with white noise;
(l, noise) picked by maximum marginal likelihood over a log grid. Each
candidate costs one O(N^3) factorization.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

DEFAULT_LENGTH_GRID = np.geomspace(0.1, 100.0, 10)
DEFAULT_NOISE_GRID = np.geomspace(1e-6, 1.0, 6)


def _sq_dists(A, B):
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.maximum(d2, 0.0)


class GpSurrogate:
    """Fitted GP over (position, potential) pairs."""

    cost_class = "surrogate"

    def __init__(self, train_q, train_u, length_scale, noise_var, alpha, u_shift):
        self.train_q = train_q
        self.train_u = train_u
        self.length_scale = float(length_scale)
        self.noise_var = float(noise_var)
        self.alpha = alpha
        self.u_shift = float(u_shift)
        self.n_evals = 0

    def predict_mean(self, q):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        k = np.exp(-_sq_dists(q, self.train_q) / (2.0 * self.length_scale**2))
        return k @ self.alpha + self.u_shift

    def gradient_of_mean(self, q):
        """Closed-form gradient of the predictive mean at a single point:
        sum_i alpha_i k(q, x_i) (x_i - q) / l^2."""
        q = np.asarray(q, dtype=float)
        diff = self.train_q - q
        k = np.exp(-np.sum(diff * diff, axis=1) / (2.0 * self.length_scale**2))
        return (self.alpha * k) @ diff / self.length_scale**2

    def __call__(self, q):
        # the GP is fit to potentials, so its mean gradient IS the oracle
        self.n_evals += 1
        return self.gradient_of_mean(q)


def _log_marginal(K, u):
    n = K.shape[0]
    try:
        cf = cho_factor(K, lower=True)
    except np.linalg.LinAlgError:
        K = K.copy()
        K[np.diag_indices_from(K)] += 1e-8
        cf = cho_factor(K, lower=True)
    alpha = cho_solve(cf, u)
    logdet = 2.0 * float(np.sum(np.log(np.diag(cf[0]))))
    lml = -0.5 * float(u @ alpha) - 0.5 * logdet - 0.5 * n * np.log(2.0 * np.pi)
    return lml, alpha


def fit(train_q, train_u, length_grid=None, noise_grid=None):
    """Grid-search (l, noise) by log marginal likelihood and cache the
    factorization. Training potentials are centered first; a constant shift
    changes nothing downstream since only the mean's gradient is consumed."""
    train_q = np.asarray(train_q, dtype=float)
    train_u = np.asarray(train_u, dtype=float)
    if train_q.ndim != 2 or train_q.shape[0] < 2:
        raise ValueError("need at least two training points")
    if train_u.shape != (train_q.shape[0],):
        raise ValueError("train_u must match train_q rows")
    if length_grid is None:
        length_grid = DEFAULT_LENGTH_GRID
    if noise_grid is None:
        noise_grid = DEFAULT_NOISE_GRID
    u_shift = float(train_u.mean())
    u = train_u - u_shift
    d2 = _sq_dists(train_q, train_q)
    best = None
    for ell in length_grid:
        K0 = np.exp(-d2 / (2.0 * ell**2))
        for noise in noise_grid:
            K = K0.copy()
            K[np.diag_indices_from(K)] += noise
            lml, alpha = _log_marginal(K, u)
            if best is None or lml > best[0]:
                best = (lml, ell, noise, alpha)
    lml, ell, noise, alpha = best
    surr = GpSurrogate(train_q, u, ell, noise, alpha, u_shift)
    surr.log_marginal_likelihood = lml
    return surr
