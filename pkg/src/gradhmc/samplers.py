"""Leapfrog integration and HMC transition kernels, generic over the
gradient source.

Any callable q -> gradient works as an oracle; the Metropolis correction
always evaluates the exact target potential, which is what keeps the chain
asymptotically exact no matter how rough the oracle is. Momentum is standard
gaussian (identity mass) throughout.
"""

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels

from .targets import OutOfSupportError

# |delta H| above this (or any non-finite state) marks the trajectory
# divergent and the proposal is rejected. Guards surrogate oracles far from
# their training data.
DIVERGENCE_THRESHOLD = 1000.0


class ExactGradientOracle:
    """Analytic target gradient; one full-data evaluation per call."""

    cost_class = "full_data"

    def __init__(self, target):
        self.target = target
        self.n_evals = 0

    def __call__(self, q):
        self.n_evals += 1
        return self.target.gradient(q)


class NetGradientOracle:
    """Trained MLP gradient; supplies a fused trajectory kernel when the net
    is a single full-width block (the hot path of surrogate sampling)."""

    cost_class = "surrogate"

    def __init__(self, net):
        self.net = net
        self.n_evals = 0
        b = net.blocks[0] if net.blocks else None
        self._fused = (
            _kernels.NUMBA_ENABLED
            and net.single_block_full
            and b is not None
            and b.w1.shape[0] > 0
        )

    def __call__(self, q):
        self.n_evals += 1
        return self.net.forward(q)

    def trajectory(self, q, p, step_size, n_steps):
        if not self._fused:
            return None
        b = self.net.blocks[0]
        q1, p1, ok = _kernels.mlp_leapfrog(
            b.w1,
            b.b1,
            b.w2,
            b.b2,
            self.net.input_mean,
            self.net.input_sd,
            np.ascontiguousarray(q, dtype=float),
            np.ascontiguousarray(p, dtype=float),
            float(step_size),
            int(n_steps),
        )
        self.n_evals += n_steps + 1
        return LeapfrogResult(q1, p1, bool(ok))


class ZeroGradientOracle:
    """Constant-zero field; turns HMC into a random-walk proposal."""

    cost_class = "surrogate"

    def __init__(self, dim):
        self.dim = dim
        self.n_evals = 0

    def __call__(self, q):
        self.n_evals += 1
        return np.zeros(self.dim)


class PerturbedGradientOracle:
    """Exact gradient plus a smooth pseudo-random field of norm <= bound.

    The perturbation e(q) = bound * sin(A q + phi) / sqrt(d) is deterministic
    in q (so the oracle is a genuine vector field) and continuous (so
    round-trip reversibility is preserved to floating-point accuracy).
    """

    cost_class = "full_data"

    def __init__(self, target, bound, seed=0):
        if bound < 0:
            raise ValueError("bound must be >= 0")
        self.target = target
        self.bound = float(bound)
        rng = np.random.default_rng(seed)
        d = target.dim
        self._mix = rng.standard_normal((d, d))
        self._phase = rng.uniform(0.0, 2.0 * np.pi, size=d)
        self._scale = self.bound / np.sqrt(d)
        self.n_evals = 0

    def perturbation(self, q):
        return self._scale * np.sin(self._mix @ q + self._phase)

    def __call__(self, q):
        self.n_evals += 1
        return self.target.gradient(q) + self.perturbation(q)


class LeapfrogResult(NamedTuple):
    q: np.ndarray
    p: np.ndarray
    ok: bool


def leapfrog(oracle, q0, p0, n_steps, step_size):
    """Symmetric leapfrog: momentum half-step, n_steps position/momentum
    alternations, momentum half-step. Exactly n_steps + 1 oracle calls.

    Oracles exposing a ``trajectory`` method (fused kernel) are dispatched to
    it. Non-finite intermediate state flags the trajectory as divergent.
    """
    fused = getattr(oracle, "trajectory", None)
    if fused is not None:
        res = fused(q0, p0, step_size, n_steps)
        if res is not None:
            return res
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    try:
        p -= 0.5 * step_size * oracle(q)
    except OutOfSupportError:
        return LeapfrogResult(q, p, False)
    for i in range(n_steps):
        q += step_size * p
        if not np.all(np.isfinite(q)):
            return LeapfrogResult(q, p, False)
        try:
            g = oracle(q)
        except OutOfSupportError:
            return LeapfrogResult(q, p, False)
        p -= (step_size if i < n_steps - 1 else 0.5 * step_size) * g
        if not np.all(np.isfinite(p)):
            return LeapfrogResult(q, p, False)
    return LeapfrogResult(q, p, True)


@dataclass
class HmcConfig:
    leapfrog_steps: int
    step_size: float
    n_iterations: int
    seed: int = 0

    def __post_init__(self):
        if self.leapfrog_steps < 1 or self.step_size <= 0 or self.n_iterations < 1:
            raise ValueError("leapfrog_steps, step_size, n_iterations must be positive")


@dataclass
class Chain:
    """Ordered draws plus per-iteration diagnostics and cost accounting."""

    draws: np.ndarray
    accepted: np.ndarray
    delta_h: np.ndarray
    timings: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.draws.shape[0]

    @property
    def dim(self):
        return self.draws.shape[1]

    @property
    def acceptance(self):
        return float(np.mean(self.accepted))

    def total_time(self):
        return float(sum(self.timings.values()))

    def to_csv(self, path):
        header = ",".join(
            [f"dim_{j}" for j in range(self.dim)] + ["accepted", "delta_h"]
        )
        body = np.column_stack(
            [self.draws, self.accepted.astype(float), self.delta_h]
        )
        np.savetxt(path, body, delimiter=",", header=header, comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(
            draws=data[:, :-2],
            accepted=data[:, -2].astype(bool),
            delta_h=data[:, -1],
        )


class HmcSampler:
    """Stateful single-chain HMC with a swappable gradient oracle.

    Three independent RNG streams (momentum, accept test, minibatch) are
    spawned from the seed so swapping oracles never perturbs the acceptance
    randomness. The current potential value is cached: one exact potential
    evaluation per iteration.
    """

    def __init__(self, target, oracle, leapfrog_steps, step_size, seed, init_q):
        init_q = np.asarray(init_q, dtype=float)
        if init_q.shape != (target.dim,):
            raise ValueError("init_q has wrong shape")
        if not target.in_support(init_q):
            raise ValueError("init_q outside target support")
        self.target = target
        self.oracle = oracle
        self.leapfrog_steps = int(leapfrog_steps)
        self.step_size = float(step_size)
        if isinstance(seed, np.random.SeedSequence):
            ss = seed
        else:
            ss = np.random.SeedSequence(seed)
        self.rng_momentum, self.rng_mh, self.rng_minibatch = (
            np.random.default_rng(s) for s in ss.spawn(3)
        )
        self.q = init_q.copy()
        self.u_q = target.potential(self.q)
        self.n_potential_evals = 1

    def set_oracle(self, oracle):
        self.oracle = oracle

    def step(self):
        """One transition; returns (q, accepted, delta_h)."""
        p0 = self.rng_momentum.standard_normal(self.target.dim)
        h0 = self.u_q + 0.5 * float(p0 @ p0)
        q1, p1, ok = leapfrog(
            self.oracle, self.q, p0, self.leapfrog_steps, self.step_size
        )
        delta_h = np.nan
        accepted = False
        if ok:
            u1 = self.target.potential(q1)
            self.n_potential_evals += 1
            h1 = u1 + 0.5 * float(p1 @ p1)
            delta_h = h1 - h0
            if np.isfinite(delta_h) and abs(delta_h) <= DIVERGENCE_THRESHOLD:
                if delta_h <= 0 or self.rng_mh.random() < np.exp(-delta_h):
                    accepted = True
                    self.q = q1
                    self.u_q = u1
        return self.q, accepted, delta_h


def run_chain(target, oracle, config, init_q):
    """Run a full chain; wall time lands in ``timings['sample_s']``."""
    sampler = HmcSampler(
        target,
        oracle,
        config.leapfrog_steps,
        config.step_size,
        config.seed,
        init_q,
    )
    n = config.n_iterations
    draws = np.empty((n, target.dim))
    accepted = np.empty(n, dtype=bool)
    delta_h = np.empty(n)
    start = time.perf_counter()
    for t in range(n):
        draws[t], accepted[t], delta_h[t] = sampler.step()
    elapsed = time.perf_counter() - start
    return Chain(
        draws=draws,
        accepted=accepted,
        delta_h=delta_h,
        timings={"sample_s": elapsed},
        counters={
            "gradient_evals": getattr(oracle, "n_evals", None),
            "potential_evals": sampler.n_potential_evals,
        },
        meta={
            "cost_class": getattr(oracle, "cost_class", "unknown"),
            "leapfrog_steps": config.leapfrog_steps,
            "step_size": config.step_size,
            "seed": config.seed,
        },
    )


@dataclass
class SghmcConfig:
    step_size: float
    n_leapfrog: int
    minibatch_size: int
    friction: float
    n_iterations: int
    seed: int = 0
    mh_correction: bool = True


def sghmc_run(target, config, init_q):
    """Stochastic-gradient HMC with friction, minibatch gradients and an
    optional exact-potential Metropolis test per trajectory.

    Per momentum update of size dt: p <- p - dt grad - dt B p + N(0, 2 B dt),
    arranged on the leapfrog skeleton (half kicks at both ends) so that
    friction 0 + full-data minibatch + MH reduces exactly to plain HMC.
    """
    init_q = np.asarray(init_q, dtype=float)
    n_obs = target.n_obs
    bs = min(config.minibatch_size, n_obs)
    full_batch = bs == n_obs
    b_hat = float(config.friction)
    eps = float(config.step_size)
    n_steps = int(config.n_leapfrog)

    ss = np.random.SeedSequence(config.seed)
    rng_momentum, rng_mh, rng_batch = (np.random.default_rng(s) for s in ss.spawn(3))

    def grad_est(q):
        if full_batch:
            return target.gradient(q)
        idx = rng_batch.choice(n_obs, size=bs, replace=False)
        return target.obs_gradient(q, idx)

    def kick(p, g, dt):
        p = p - dt * g - dt * b_hat * p
        if b_hat > 0:
            p = p + rng_momentum.standard_normal(p.shape) * np.sqrt(2.0 * b_hat * dt)
        return p

    n = config.n_iterations
    d = target.dim
    draws = np.empty((n, d))
    accepted = np.empty(n, dtype=bool)
    delta_h = np.full(n, np.nan)
    q = init_q.copy()
    u_q = target.potential(q) if config.mh_correction else np.nan
    n_grad = 0
    n_pot = 1 if config.mh_correction else 0
    start = time.perf_counter()
    for t in range(n):
        p = rng_momentum.standard_normal(d)
        h0 = u_q + 0.5 * float(p @ p) if config.mh_correction else np.nan
        q1 = q.copy()
        p = kick(p, grad_est(q1), 0.5 * eps)
        ok = True
        for i in range(n_steps):
            q1 += eps * p
            if not np.all(np.isfinite(q1)):
                ok = False
                break
            g = grad_est(q1)
            p = kick(p, g, eps if i < n_steps - 1 else 0.5 * eps)
        n_grad += n_steps + 1
        if not ok:
            accepted[t] = False
        elif config.mh_correction:
            u1 = target.potential(q1)
            n_pot += 1
            dh = u1 + 0.5 * float(p @ p) - h0
            delta_h[t] = dh
            take = (
                np.isfinite(dh)
                and abs(dh) <= DIVERGENCE_THRESHOLD
                and (dh <= 0 or rng_mh.random() < np.exp(-dh))
            )
            accepted[t] = take
            if take:
                q = q1
                u_q = u1
        else:
            accepted[t] = True
            q = q1
        draws[t] = q
    elapsed = time.perf_counter() - start
    return Chain(
        draws=draws,
        accepted=accepted,
        delta_h=delta_h,
        timings={"sample_s": elapsed},
        counters={"gradient_evals": n_grad, "potential_evals": n_pot},
        meta={
            "cost_class": "minibatch",
            "leapfrog_steps": n_steps,
            "step_size": eps,
            "friction": b_hat,
            "minibatch_size": bs,
            "mh_correction": config.mh_correction,
            "seed": config.seed,
        },
    )
