"""Training-schedule controller: decide, while the exact chain runs, when the
gradient net has seen enough data to take over.

Between ``start_iter`` and ``end_iter``, every ``check_interval`` draws the
collected (position, gradient) pairs are fitted and probed with a short
surrogate run; the net is adopted once its probe acceptance reaches
``acceptance_target`` times the recent exact acceptance. Probe draws never
enter the chain; sampling resumes from the last exact state. If the schedule
runs out, the remaining draws fall back to exact HMC and the training cost
was the only overhead paid.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import mlp
from .samplers import Chain, ExactGradientOracle, HmcSampler, NetGradientOracle


@dataclass
class TrainingSchedule:
    start_iter: int
    end_iter: int
    check_interval: int
    acceptance_target: float = 0.9
    probe_draws: int = 50

    def __post_init__(self):
        if not 0 <= self.start_iter < self.end_iter:
            raise ValueError("need 0 <= start_iter < end_iter")
        if self.check_interval < 1 or self.probe_draws < 1:
            raise ValueError("check_interval and probe_draws must be positive")


@dataclass
class NetSpec:
    hidden: int = 100
    n_blocks: int = 1
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    max_train_points: int = None


@dataclass
class ScheduleResult:
    adopted: bool
    net: object
    iterations_consumed: int
    chain: Chain
    probe_acceptances: list = field(default_factory=list)


class CollectingOracle:
    """Wraps the exact oracle and records every (q, gradient) pair it
    produces, optionally keeping only every ``stride``-th evaluation."""

    cost_class = "full_data"

    def __init__(self, target, stride=1):
        self.inner = ExactGradientOracle(target)
        self.stride = int(stride)
        self.positions = []
        self.gradients = []
        self.active = False

    @property
    def n_evals(self):
        return self.inner.n_evals

    def __call__(self, q):
        g = self.inner(q)
        if self.active and (self.inner.n_evals - 1) % self.stride == 0:
            self.positions.append(q.copy())
            self.gradients.append(g.copy())
        return g

    def training_arrays(self):
        return np.array(self.positions), np.array(self.gradients)


def train_net_on(collector, spec, dim, attempt=0):
    """Fit a fresh net on everything collected so far; returns (net, trace)."""
    Q, G = collector.training_arrays()
    if spec.max_train_points is not None and Q.shape[0] > spec.max_train_points:
        rng = np.random.default_rng(spec.seed + 1000 + attempt)
        keep = rng.choice(Q.shape[0], size=spec.max_train_points, replace=False)
        Q, G = Q[keep], G[keep]
    net = mlp.MlpGradientNet(
        dim, spec.hidden, n_blocks=spec.n_blocks, seed=spec.seed + attempt
    )
    adam = mlp.AdamState(lr=spec.learning_rate)
    trace = mlp.train(
        net,
        Q,
        G,
        epochs=spec.epochs,
        batch_size=min(spec.batch_size, Q.shape[0]),
        adam=adam,
        seed=spec.seed + attempt,
    )
    return net, trace


def _probe_acceptance(target, net, sampler, schedule, probe_seed):
    probe = HmcSampler(
        target,
        NetGradientOracle(net),
        sampler.leapfrog_steps,
        sampler.step_size,
        probe_seed,
        sampler.q,
    )
    hits = 0
    for _ in range(schedule.probe_draws):
        _, acc, _ = probe.step()
        hits += acc
    return hits / schedule.probe_draws


def run_training_schedule(
    sampler,
    schedule,
    net_spec,
    collect_stride=1,
    n_iterations=None,
):
    """Drive ``sampler`` (positioned at iteration 0) through the schedule and
    on to ``n_iterations`` total draws.

    Phase wall-times are recorded separately: exact draws + gradient
    collection under ``collect_s``, net fitting and probing under
    ``train_s``, post-adoption surrogate draws under ``sample_s``.
    """
    target = sampler.target
    if n_iterations is None:
        n_iterations = schedule.end_iter
    n = int(n_iterations)
    if n < schedule.start_iter:
        raise ValueError("n_iterations must reach the schedule start")

    collector = CollectingOracle(target, stride=collect_stride)
    sampler.set_oracle(collector)
    n_checks = (schedule.end_iter - schedule.start_iter) // schedule.check_interval + 1
    probe_seeds = np.random.SeedSequence(net_spec.seed + 7).spawn(max(n_checks, 1))

    draws = np.empty((n, target.dim))
    accepted = np.empty(n, dtype=bool)
    delta_h = np.empty(n)
    exact_hits = 0
    exact_since_start = 0
    hits_since_start = 0

    adopted = False
    net = None
    attempt = 0
    probe_acceptances = []
    t_collect = 0.0
    t_train = 0.0
    t_sample = 0.0
    adoption_iter = n

    t = 0
    while t < n:
        tic = time.perf_counter()
        if t == schedule.start_iter:
            collector.active = True
        draws[t], accepted[t], delta_h[t] = sampler.step()
        if not adopted:
            exact_hits += accepted[t]
            if t >= schedule.start_iter:
                exact_since_start += 1
                hits_since_start += accepted[t]
        t_collect += time.perf_counter() - tic
        t += 1

        due = (
            not adopted
            and t > schedule.start_iter
            and t <= schedule.end_iter
            and (t - schedule.start_iter) % schedule.check_interval == 0
            and len(collector.positions) > 0
        )
        if due:
            tic = time.perf_counter()
            net, _ = train_net_on(collector, net_spec, target.dim, attempt=attempt)
            probe_acc = _probe_acceptance(
                target, net, sampler, schedule, probe_seeds[attempt]
            )
            probe_acceptances.append(probe_acc)
            attempt += 1
            t_train += time.perf_counter() - tic
            recent = hits_since_start / max(exact_since_start, 1)
            if probe_acc >= schedule.acceptance_target * recent:
                adopted = True
                adoption_iter = t
                collector.active = False
                sampler.set_oracle(NetGradientOracle(net))
                break

    if adopted:
        tic = time.perf_counter()
        while t < n:
            draws[t], accepted[t], delta_h[t] = sampler.step()
            t += 1
        t_sample = time.perf_counter() - tic
    else:
        # schedule exhausted: finish with exact gradients
        collector.active = False
        tic = time.perf_counter()
        while t < n:
            draws[t], accepted[t], delta_h[t] = sampler.step()
            exact_hits += accepted[t]
            t += 1
        t_collect += time.perf_counter() - tic

    n_exact = adoption_iter if adopted else n
    chain = Chain(
        draws=draws,
        accepted=accepted,
        delta_h=delta_h,
        timings={"collect_s": t_collect, "train_s": t_train, "sample_s": t_sample},
        counters={
            "gradient_evals": collector.n_evals
            + (sampler.oracle.n_evals if adopted else 0),
            "potential_evals": sampler.n_potential_evals,
            "training_pairs": len(collector.positions),
        },
        meta={
            "cost_class": "surrogate" if adopted else "full_data",
            "leapfrog_steps": sampler.leapfrog_steps,
            "step_size": sampler.step_size,
            "adopted": adopted,
            "adoption_iter": adoption_iter if adopted else None,
            "acceptance_exact_phase": exact_hits / max(n_exact, 1),
            "acceptance_surrogate_phase": (
                float(np.mean(accepted[adoption_iter:])) if adopted else None
            ),
            "probe_acceptances": probe_acceptances,
        },
    )
    return ScheduleResult(
        adopted=adopted,
        net=net if adopted else None,
        iterations_consumed=adoption_iter if adopted else n,
        chain=chain,
        probe_acceptances=probe_acceptances,
    )


def run_nng_chain(
    target,
    config,
    net_spec,
    schedule,
    init_q,
    collect_stride=1,
):
    """Convenience wrapper: build the sampler, run the schedule, return
    (ScheduleResult, Chain)."""
    sampler = HmcSampler(
        target,
        ExactGradientOracle(target),
        config.leapfrog_steps,
        config.step_size,
        config.seed,
        init_q,
    )
    result = run_training_schedule(
        sampler,
        schedule,
        net_spec,
        collect_stride=collect_stride,
        n_iterations=config.n_iterations,
    )
    return result, result.chain
