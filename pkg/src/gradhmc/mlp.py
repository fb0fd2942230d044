"""One-hidden-layer gradient network trained on (position, gradient) pairs.

The net maps a position q to an approximation of the potential gradient.
Output coordinates may be partitioned across disjoint blocks, each with its
own hidden layer, to cut parameter count in high dimensions. Softplus hidden
activation keeps the induced vector field smooth; the output layer is affine
because gradients are unbounded.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import _kernels

FORMAT_NAME = "gradhmc-net"
FORMAT_VERSION = 1


def softplus(z):
    return np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))


@dataclass
class Block:
    w1: np.ndarray  # (hidden, n_in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_out, hidden)
    b2: np.ndarray  # (n_out,)
    input_indices: np.ndarray
    output_indices: np.ndarray


def _glorot(rng, n_out, n_in):
    bound = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-bound, bound, size=(n_out, n_in))


class MlpGradientNet:
    """Gradient approximator; block outputs must partition 0..dim-1."""

    def __init__(self, dim, hidden, n_blocks=1, seed=0):
        if dim < 1 or hidden < 0 or n_blocks < 1 or n_blocks > dim:
            raise ValueError("bad net shape")
        self.dim = int(dim)
        self.input_mean = np.zeros(dim)
        self.input_sd = np.ones(dim)
        rng = np.random.default_rng(seed)
        bounds = np.linspace(0, dim, n_blocks + 1).astype(int)
        self.blocks = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            out_idx = np.arange(lo, hi)
            in_idx = np.arange(dim)
            self.blocks.append(
                Block(
                    w1=_glorot(rng, hidden, dim),
                    b1=np.zeros(hidden),
                    w2=_glorot(rng, hi - lo, hidden),
                    b2=np.zeros(hi - lo),
                    input_indices=in_idx,
                    output_indices=out_idx,
                )
            )
        self._validate()

    @classmethod
    def from_blocks(cls, dim, blocks, input_mean=None, input_sd=None):
        net = cls.__new__(cls)
        net.dim = int(dim)
        net.blocks = blocks
        net.input_mean = np.zeros(dim) if input_mean is None else np.asarray(input_mean, float)
        net.input_sd = np.ones(dim) if input_sd is None else np.asarray(input_sd, float)
        net._validate()
        return net

    def _validate(self):
        covered = np.concatenate([b.output_indices for b in self.blocks])
        if sorted(covered.tolist()) != list(range(self.dim)):
            raise ValueError("block output indices must partition 0..dim-1")

    def set_input_scaler(self, mean, sd):
        sd = np.asarray(sd, dtype=float)
        self.input_mean = np.asarray(mean, dtype=float).copy()
        self.input_sd = np.where(sd > 0, sd, 1.0)

    def fit_input_scaler(self, Q):
        self.set_input_scaler(Q.mean(axis=0), Q.std(axis=0))

    @property
    def single_block_full(self):
        """True when one block covers all coordinates in natural order."""
        if len(self.blocks) != 1:
            return False
        b = self.blocks[0]
        full = np.arange(self.dim)
        return np.array_equal(b.input_indices, full) and np.array_equal(
            b.output_indices, full
        )

    def forward(self, q):
        q = np.asarray(q, dtype=float)
        if self.single_block_full and self.blocks[0].w1.shape[0] > 0:
            b = self.blocks[0]
            return _kernels.mlp_forward(
                b.w1, b.b1, b.w2, b.b2, self.input_mean, self.input_sd, q
            )
        out = np.empty(self.dim)
        for b in self.blocks:
            x = (q[b.input_indices] - self.input_mean[b.input_indices]) / self.input_sd[
                b.input_indices
            ]
            out[b.output_indices] = b.w2 @ softplus(b.w1 @ x + b.b1) + b.b2
        return out

    __call__ = forward

    def forward_batch(self, Q):
        Q = np.asarray(Q, dtype=float)
        out = np.empty((Q.shape[0], self.dim))
        Xs = (Q - self.input_mean) / self.input_sd
        for b in self.blocks:
            A = softplus(Xs[:, b.input_indices] @ b.w1.T + b.b1)
            out[:, b.output_indices] = A @ b.w2.T + b.b2
        return out

    def parameters(self):
        params = []
        for b in self.blocks:
            params.extend([b.w1, b.b1, b.w2, b.b2])
        return params

    def to_json(self):
        doc = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "dim": self.dim,
            "input_mean": self.input_mean.tolist(),
            "input_sd": self.input_sd.tolist(),
            "activation": "softplus",
            "blocks": [
                {
                    "w1": b.w1.tolist(),
                    "b1": b.b1.tolist(),
                    "w2": b.w2.tolist(),
                    "b2": b.b2.tolist(),
                    "input_indices": b.input_indices.tolist(),
                    "output_indices": b.output_indices.tolist(),
                }
                for b in self.blocks
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("format") != FORMAT_NAME:
            raise ValueError("not a gradhmc net file")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported net format version {doc.get('version')}")
        def arr2d(rows, n_rows, n_cols):
            if n_rows == 0:
                return np.zeros((0, n_cols))
            return np.array(rows, dtype=float)

        blocks = []
        for b in doc["blocks"]:
            n_in = len(b["input_indices"])
            n_hidden = len(b["b1"])
            n_out = len(b["b2"])
            blocks.append(
                Block(
                    w1=arr2d(b["w1"], n_hidden, n_in),
                    b1=np.array(b["b1"], dtype=float),
                    w2=arr2d(b["w2"], n_out, n_hidden),
                    b2=np.array(b["b2"], dtype=float),
                    input_indices=np.array(b["input_indices"], dtype=int),
                    output_indices=np.array(b["output_indices"], dtype=int),
                )
            )
        return cls.from_blocks(
            doc["dim"], blocks, input_mean=doc["input_mean"], input_sd=doc["input_sd"]
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class AdamState:
    """Adam moments, one slot per parameter array."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def _init_slots(self, params):
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]

    def update(self, params, grads):
        self._init_slots(params)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def backprop(net, Q, G):
    """Batch MSE loss (mean over all N x dim entries) and its weight gradients.

    Gradient list is aligned with ``net.parameters()``.
    """
    Q = np.asarray(Q, dtype=float)
    G = np.asarray(G, dtype=float)
    if Q.shape[0] == 0:
        raise ValueError("empty batch")
    n, d = Q.shape[0], net.dim
    Xs = (Q - net.input_mean) / net.input_sd
    loss = 0.0
    grads = []
    for b in net.blocks:
        X = Xs[:, b.input_indices]
        Z = X @ b.w1.T + b.b1
        A = softplus(Z)
        P = A @ b.w2.T + b.b2
        E = P - G[:, b.output_indices]
        loss += float(np.sum(E * E)) / (n * d)
        dP = 2.0 * E / (n * d)
        dW2 = dP.T @ A
        dB2 = dP.sum(axis=0)
        dZ = (dP @ b.w2) * expit(Z)
        dW1 = dZ.T @ X
        dB1 = dZ.sum(axis=0)
        grads.extend([dW1, dB1, dW2, dB2])
    return loss, grads


def mse_loss(net, Q, G):
    E = net.forward_batch(Q) - G
    return float(np.sum(E * E)) / E.size


def train(net, Q, G, epochs, batch_size=32, adam=None, seed=0, fit_scaler=True):
    """Backprop + Adam on (position, gradient) pairs; returns per-epoch losses.

    Losses are measured on the full training set; index 0 is the pre-training
    loss. Deterministic for a fixed seed. No regularization or early stopping:
    labels are noiseless so overfitting is not the failure mode.
    """
    Q = np.asarray(Q, dtype=float)
    G = np.asarray(G, dtype=float)
    if Q.ndim != 2 or Q.shape != G.shape or Q.shape[1] != net.dim:
        raise ValueError("training arrays must both be n_train x dim")
    if Q.shape[0] == 0:
        raise ValueError("empty training set")
    if not 1 <= batch_size <= Q.shape[0]:
        raise ValueError("need n_train >= batch_size >= 1")
    if fit_scaler:
        net.fit_input_scaler(Q)
    if adam is None:
        adam = AdamState()
    rng = np.random.default_rng(seed)
    params = net.parameters()
    trace = [mse_loss(net, Q, G)]
    for _ in range(epochs):
        order = rng.permutation(Q.shape[0])
        for lo in range(0, Q.shape[0], batch_size):
            idx = order[lo : lo + batch_size]
            _, grads = backprop(net, Q[idx], G[idx])
            adam.update(params, grads)
        trace.append(mse_loss(net, Q, G))
    return trace


class PriorSwapOracle:
    """Re-targets a trained net to a new prior without retraining.

    Both prior terms are gradients of the prior's contribution to the
    potential (i.e. gradients of -log prior).
    """

    cost_class = "surrogate"

    def __init__(self, base, old_prior_grad, new_prior_grad):
        self.base = base
        self.old_prior_grad = old_prior_grad
        self.new_prior_grad = new_prior_grad

    def __call__(self, q):
        return self.base(q) - self.old_prior_grad(q) + self.new_prior_grad(q)
