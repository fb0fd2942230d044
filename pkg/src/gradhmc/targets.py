"""Target posteriors: potential energy U(q) and its analytic gradient.

Every target exposes the same small surface: ``dim``, ``potential(q)``,
``gradient(q)`` and ``in_support(q)``. The potential is the negative log
unnormalized posterior with additive constants dropped; it returns +inf
outside the support. Gradients are hand-derived, never autodiff.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels

SQRT3 = float(np.sqrt(3.0))


class OutOfSupportError(ValueError):
    """Gradient requested at a point where the posterior has no density."""


class TargetModel:
    """Base class; subclasses set ``dim`` and implement the energy surface."""

    dim = None

    def potential(self, q):
        raise NotImplementedError

    def gradient(self, q):
        raise NotImplementedError

    def in_support(self, q):
        return True

    def _check_dim(self, q):
        if q.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {q.shape}")


class BananaTarget(TargetModel):
    """Banana-shaped 2-d density.

    U(x) = (A x1)^2 / 200 + (C x2 + B (A x1)^2 - 100 B)^2 / 2

    A and C scale the two axes, B bends the ridge. The minimum sits at
    (0, 100 B / C).
    """

    dim = 2

    def __init__(self, a=1.0, b=0.1, c=1.0):
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)

    def potential(self, q):
        self._check_dim(q)
        u = self.a * q[0]
        t = self.c * q[1] + self.b * u * u - 100.0 * self.b
        return u * u / 200.0 + 0.5 * t * t

    def gradient(self, q):
        self._check_dim(q)
        u = self.a * q[0]
        t = self.c * q[1] + self.b * u * u - 100.0 * self.b
        g0 = self.a * u / 100.0 + t * 2.0 * self.b * self.a * u
        g1 = t * self.c
        return np.array([g0, g1])


class IllConditionedGaussianTarget(TargetModel):
    """Zero-mean Gaussian with diagonal covariance on disparate scales."""

    def __init__(self, variances):
        variances = np.asarray(variances, dtype=float)
        if variances.ndim != 1 or variances.size == 0:
            raise ValueError("variances must be a non-empty 1-d array")
        if np.any(variances <= 0):
            raise ValueError("all variances must be positive")
        self.variances = variances
        self.dim = variances.size

    def potential(self, q):
        self._check_dim(q)
        return 0.5 * float(np.sum(q * q / self.variances))

    def gradient(self, q):
        self._check_dim(q)
        return q / self.variances


def ill_conditioned_variances(dim, seed, smallest=0.1, largest=1000.0):
    """Diagonal entries: smallest, then uniform(1, 100) middles, then largest."""
    if dim < 2:
        raise ValueError("need dim >= 2")
    rng = np.random.default_rng(seed)
    mid = rng.uniform(1.0, 100.0, size=dim - 2)
    return np.concatenate([[smallest], np.sort(mid), [largest]])


class LogisticRegressionTarget(TargetModel):
    """Bayesian logistic regression with a gaussian or laplace prior.

    U(beta) = sum_i [log(1 + e^{x_i beta}) - y_i x_i beta] - log prior(beta)
    """

    def __init__(self, X, y, prior="gaussian", prior_scale=10.0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("X must be n x d with matching y")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0/1")
        if prior not in ("gaussian", "laplace"):
            raise ValueError(f"unknown prior {prior!r}")
        self.X = X
        self.y = y
        self.prior = prior
        self.prior_scale = float(prior_scale)  # variance (gaussian) or scale (laplace)
        self.dim = X.shape[1]

    def potential(self, q):
        self._check_dim(q)
        z = self.X @ q
        nll = float(np.sum(np.logaddexp(0.0, z) - self.y * z))
        if self.prior == "gaussian":
            nlp = 0.5 * float(q @ q) / self.prior_scale
        else:
            nlp = float(np.sum(np.abs(q))) / self.prior_scale
        return nll + nlp

    def gradient(self, q):
        self._check_dim(q)
        z = self.X @ q
        p = _expit(z)
        g = self.X.T @ (p - self.y)
        if self.prior == "gaussian":
            g = g + q / self.prior_scale
        else:
            g = g + np.sign(q) / self.prior_scale
        return g

    def obs_gradient(self, q, idx):
        """Unbiased full-gradient estimate from the observation subset ``idx``."""
        self._check_dim(q)
        Xs = self.X[idx]
        z = Xs @ q
        p = _expit(z)
        g = Xs.T @ (p - self.y[idx]) * (self.X.shape[0] / len(idx))
        if self.prior == "gaussian":
            g = g + q / self.prior_scale
        else:
            g = g + np.sign(q) / self.prior_scale
        return g

    @property
    def n_obs(self):
        return self.X.shape[0]


def _expit(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class GarchTarget(TargetModel):
    """GARCH(m, r) with truncated gaussian priors on the natural parameters.

    Parameter vector (alpha_0, .., alpha_m, beta_1, .., beta_r). Support is
    the usual stationarity region: alpha_0 > 0, alpha_j >= 0, beta_j >= 0 and
    sum(alpha_{j>=1}) + sum(beta) < 1. Pre-sample conditional variances are
    seeded with the sample variance of y.
    """

    def __init__(self, y, m=1, r=1, prior_sd=10.0):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size <= max(m, r):
            raise ValueError("need more observations than max(m, r)")
        if m < 1 or r < 0:
            raise ValueError("require m >= 1 and r >= 0")
        self.y = y
        self.m = int(m)
        self.r = int(r)
        self.prior_sd = float(prior_sd)
        self.dim = 1 + self.m + self.r
        self.presample_var = float(np.var(y))

    def _split(self, q):
        return q[: self.m + 1], q[self.m + 1 :]

    def in_support(self, q):
        alpha, beta = self._split(q)
        if alpha[0] <= 0 or np.any(alpha[1:] < 0) or np.any(beta < 0):
            return False
        return float(np.sum(alpha[1:]) + np.sum(beta)) < 1.0

    def potential(self, q):
        self._check_dim(q)
        if not self.in_support(q):
            return np.inf
        alpha, beta = self._split(q)
        nll = _kernels.garch_nll(self.y, alpha, beta, self.presample_var)
        return float(nll) + 0.5 * float(q @ q) / self.prior_sd**2

    def gradient(self, q):
        self._check_dim(q)
        if not self.in_support(q):
            raise OutOfSupportError("gradient requested outside the support")
        alpha, beta = self._split(q)
        _, g = _kernels.garch_nll_grad(self.y, alpha, beta, self.presample_var)
        return g + q / self.prior_sd**2

    def sigma2(self, q):
        """Conditional-variance path for parameters q (support required)."""
        if not self.in_support(q):
            raise ValueError("parameters outside the support")
        alpha, beta = self._split(q)
        return _kernels.garch_sigma2(self.y, alpha, beta, self.presample_var)


def matern32(d, length_scale):
    """Matern kernel with smoothness 3/2: (1 + sqrt(3) d/l) exp(-sqrt(3) d/l)."""
    a = SQRT3 * d / length_scale
    return (1.0 + a) * np.exp(-a)


class GpRegressionTarget(TargetModel):
    """Hyperparameter posterior of a zero-mean GP with a Matern-3/2 kernel.

    Sampled in theta = (log length_scale, log noise_variance); lognormal
    priors on the natural scale become gaussians here, so the support is all
    of R^2. A failed Cholesky factorization is treated as out of support.
    """

    dim = 2

    def __init__(self, X, Y, prior_loc=(0.0, 0.0), prior_scale=(3.0, 3.0)):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if X.ndim != 2 or Y.shape != (X.shape[0],):
            raise ValueError("X must be n x k with matching Y")
        self.X = X
        self.Y = Y
        self.prior_loc = np.asarray(prior_loc, dtype=float)
        self.prior_scale = np.asarray(prior_scale, dtype=float)
        d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
        self.dists = np.sqrt(np.maximum(d2, 0.0))

    def _prior_potential(self, theta):
        z = (theta - self.prior_loc) / self.prior_scale
        return 0.5 * float(z @ z)

    def marginal_nll(self, length_scale, noise_var):
        """0.5 Y' Kn^-1 Y + 0.5 log det Kn with Kn = K + noise_var I; inf on failure."""
        K = matern32(self.dists, length_scale)
        K[np.diag_indices_from(K)] += noise_var
        try:
            cf = cho_factor(K, lower=True)
        except np.linalg.LinAlgError:
            return np.inf
        alpha = cho_solve(cf, self.Y)
        logdet = 2.0 * float(np.sum(np.log(np.diag(cf[0]))))
        return 0.5 * float(self.Y @ alpha) + 0.5 * logdet

    def potential(self, q):
        self._check_dim(q)
        nll = self.marginal_nll(np.exp(q[0]), np.exp(q[1]))
        if not np.isfinite(nll):
            return np.inf
        return nll + self._prior_potential(q)

    def gradient(self, q):
        self._check_dim(q)
        ell = np.exp(q[0])
        noise = np.exp(q[1])
        K = matern32(self.dists, ell)
        K[np.diag_indices_from(K)] += noise
        cf = cho_factor(K, lower=True)
        alpha = cho_solve(cf, self.Y)
        Kinv = cho_solve(cf, np.eye(K.shape[0]))
        # dK/d(log l) for Matern-3/2: (sqrt(3) d / l)^2 exp(-sqrt(3) d / l)
        a = SQRT3 * self.dists / ell
        dK_dlogl = a * a * np.exp(-a)
        inner = Kinv - np.outer(alpha, alpha)
        g0 = 0.5 * float(np.sum(inner * dK_dlogl))
        g1 = 0.5 * noise * float(np.trace(Kinv) - alpha @ alpha)
        return np.array([g0, g1]) + (q - self.prior_loc) / self.prior_scale**2
