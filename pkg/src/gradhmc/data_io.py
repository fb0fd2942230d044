"""Synthetic dataset generators and CSV ingestion.

Generators are deterministic per seed and record their own provenance. No
downloading happens here; real datasets are user-supplied files.
"""

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise ValueError("X must be n x d with matching y")


def gen_logistic(n, d, seed, beta=None):
    """Gaussian design, uniform(-1, 1) coefficients, Bernoulli labels.

    Returns (dataset, beta). Pass ``beta`` to pin the coefficients.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    if beta is None:
        beta = rng.uniform(-1.0, 1.0, size=d)
    else:
        beta = np.asarray(beta, dtype=float)
    prob = 1.0 / (1.0 + np.exp(-(X @ beta)))
    y = (rng.random(n) < prob).astype(float)
    ds = Dataset(
        X=X,
        y=y,
        feature_names=[f"x{j}" for j in range(d)],
        provenance={"generator": "logistic", "n": n, "d": d, "seed": seed},
    )
    return ds, beta


def gen_garch(T, alpha, beta, seed):
    """Simulate a GARCH(m, r) series; pre-sample variances sit at the
    unconditional variance alpha0 / (1 - sum alpha_{j>=1} - sum beta)."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    persistence = float(np.sum(alpha[1:]) + np.sum(beta))
    if alpha[0] <= 0 or np.any(alpha[1:] < 0) or np.any(beta < 0) or persistence >= 1:
        raise ValueError("parameters outside the stationarity region")
    m = alpha.size - 1
    r = beta.size
    s = max(m, r)
    uncond = alpha[0] / (1.0 - persistence)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(T)
    y = np.empty(T)
    sig2 = np.full(T, uncond)
    for t in range(T):
        if t >= s:
            v = alpha[0]
            for j in range(1, m + 1):
                v += alpha[j] * y[t - j] ** 2
            for j in range(1, r + 1):
                v += beta[j - 1] * sig2[t - j]
            sig2[t] = v
        y[t] = np.sqrt(sig2[t]) * z[t]
    return y


def gp_pattern(X):
    """The polynomial used to label GP-regression inputs: a quadratic with
    one interaction per consecutive feature pair, cycling fixed small
    coefficients. Our choice, documented here rather than anywhere else."""
    n, k = X.shape
    lin = np.array(([1.0, -0.7, 0.5, -0.3] * (k // 4 + 1))[:k])
    quad = np.array(([0.4, -0.2, 0.3, -0.1] * (k // 4 + 1))[:k])
    y = X @ lin + (X**2) @ quad
    for j in range(k - 1):
        y = y + 0.25 * X[:, j] * X[:, j + 1]
    return y


def gen_gp_regression(n, k, seed, noise_sd=0.3):
    """Gaussian inputs mapped through ``gp_pattern`` plus gaussian noise."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    y = gp_pattern(X) + noise_sd * rng.standard_normal(n)
    return Dataset(
        X=X,
        y=y,
        feature_names=[f"x{j}" for j in range(k)],
        provenance={
            "generator": "gp_regression",
            "n": n,
            "k": k,
            "seed": seed,
            "noise_sd": noise_sd,
        },
    )


def load_csv(
    path,
    label_column,
    feature_columns=None,
    subsample=None,
    seed=0,
    standardize=False,
    positive_label=None,
):
    """Load a headered CSV into a Dataset.

    Labels must be binary; ``positive_label`` maps an arbitrary two-valued
    column onto {0, 1}. Malformed rows fail loudly with their line numbers.
    Subsampling (without replacement) is seeded and recorded in provenance.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if label_column not in header:
        raise ValueError(f"{path}: no column named {label_column!r}")
    if feature_columns is None:
        feature_columns = [c for c in header if c != label_column]
    missing = [c for c in feature_columns if c not in header]
    if missing:
        raise ValueError(f"{path}: missing feature columns {missing}")
    fidx = [header.index(c) for c in feature_columns]
    lidx = header.index(label_column)

    bad_lines = []
    X = np.empty((len(rows), len(fidx)))
    raw_labels = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            bad_lines.append(i + 2)
            continue
        try:
            X[i] = [float(row[j]) for j in fidx]
        except ValueError:
            bad_lines.append(i + 2)
            continue
        raw_labels.append(row[lidx])
    if bad_lines:
        raise ValueError(f"{path}: malformed rows at lines {bad_lines}")

    labels = np.array(raw_labels)
    uniq = sorted(set(labels.tolist()))
    if positive_label is not None:
        y = (labels == str(positive_label)).astype(float)
    else:
        try:
            y = np.array([float(v) for v in labels])
        except ValueError:
            raise ValueError(
                f"{path}: labels are not numeric; pass positive_label"
            ) from None
        if not set(np.unique(y)) <= {0.0, 1.0}:
            raise ValueError(f"{path}: labels must be binary 0/1, got {uniq}")

    prov = {
        "file": str(path),
        "label_column": label_column,
        "feature_columns": list(feature_columns),
        "positive_label": positive_label,
        "standardize": standardize,
    }
    if subsample is not None and subsample < X.shape[0]:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(X.shape[0], size=subsample, replace=False))
        X = X[keep]
        y = y[keep]
        prov["subsample"] = subsample
        prov["seed"] = seed
    if standardize:
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        X = (X - mean) / sd
    return Dataset(X=X, y=y, feature_names=list(feature_columns), provenance=prov)
