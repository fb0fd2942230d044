"""User-facing property checks: reversibility, volume preservation, energy
scaling and perturbation bounds, all with fixed seeds.

Each check returns (name, passed, detail). ``run_all`` drives the CLI
``verify`` subcommand; the integrator is injectable so a deliberately broken
leapfrog can be shown to fail.
"""

import numpy as np

from . import mlp
from .samplers import (
    ExactGradientOracle,
    PerturbedGradientOracle,
    ZeroGradientOracle,
    leapfrog,
)
from .targets import IllConditionedGaussianTarget


def _quadratic_target(dim, seed=0):
    rng = np.random.default_rng(seed)
    return IllConditionedGaussianTarget(rng.uniform(0.5, 2.0, size=dim))


def _trained_net(target, seed=0, n_train=400, hidden=40, epochs=80):
    rng = np.random.default_rng(seed)
    Q = rng.standard_normal((n_train, target.dim)) * np.sqrt(target.variances)
    G = np.array([target.gradient(q) for q in Q])
    net = mlp.MlpGradientNet(target.dim, hidden, seed=seed)
    mlp.train(net, Q, G, epochs=epochs, seed=seed)
    return net


def _oracle_zoo(dim=3, seed=0):
    target = _quadratic_target(dim, seed)
    net = _trained_net(target, seed=seed)
    from .samplers import NetGradientOracle

    return target, {
        "exact": ExactGradientOracle(target),
        "nn": NetGradientOracle(net),
        "zero": ZeroGradientOracle(dim),
        "perturbed": PerturbedGradientOracle(target, bound=0.5, seed=seed),
    }


def check_reversibility(integrator=leapfrog, tol=1e-10, seed=0):
    """Forward L steps, negate momentum, L steps back, negate again: the
    start state must return for every oracle type."""
    target, oracles = _oracle_zoo(seed=seed)
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for name, oracle in oracles.items():
        for _ in range(5):
            q0 = rng.standard_normal(target.dim)
            p0 = rng.standard_normal(target.dim)
            q1, p1, ok1 = integrator(oracle, q0, p0, 12, 0.05)
            q2, p2, ok2 = integrator(oracle, q1, -p1, 12, 0.05)
            if not (ok1 and ok2):
                return "reversibility", False, f"{name}: trajectory diverged"
            scale = max(1.0, float(np.max(np.abs(q0))), float(np.max(np.abs(p0))))
            err = max(np.max(np.abs(q2 - q0)), np.max(np.abs(-p2 - p0))) / scale
            worst = max(worst, err)
    return "reversibility", worst < tol, f"worst relative round-trip error {worst:.2e}"


def check_volume_preservation(integrator=leapfrog, tol=1e-6, seed=0):
    """|det d(q', p')/d(q, p) - 1| of one leapfrog map under the NN oracle,
    by central finite differences, at 20 random points in dims 2 and 4."""
    from .samplers import NetGradientOracle

    worst = 0.0
    for dim in (2, 4):
        target = _quadratic_target(dim, seed + dim)
        net = _trained_net(target, seed=seed + dim)
        oracle = NetGradientOracle(net)
        rng = np.random.default_rng(seed + 10 + dim)
        h = 1e-5
        for _ in range(10):
            z0 = rng.standard_normal(2 * dim)
            jac = np.empty((2 * dim, 2 * dim))
            for j in range(2 * dim):
                zp = z0.copy()
                zm = z0.copy()
                zp[j] += h
                zm[j] -= h
                qp, pp, _ = integrator(oracle, zp[:dim], zp[dim:], 3, 0.1)
                qm, pm, _ = integrator(oracle, zm[:dim], zm[dim:], 3, 0.1)
                jac[:, j] = (np.concatenate([qp, pp]) - np.concatenate([qm, pm])) / (
                    2 * h
                )
            worst = max(worst, abs(abs(np.linalg.det(jac)) - 1.0))
    return "volume_preservation", worst < tol, f"worst |det - 1| = {worst:.2e}"


def check_energy_scaling(integrator=leapfrog, lo=3.5, hi=4.5, seed=0):
    """Mean |delta H| over fixed-time exact-gradient trajectories on a
    quadratic target must drop by ~4x when the step size is halved."""
    target = _quadratic_target(4, seed)
    oracle = ExactGradientOracle(target)
    rng = np.random.default_rng(seed + 2)
    sd = np.sqrt(target.variances)

    def mean_abs_dh(eps, steps, n=200):
        acc = 0.0
        rng_local = np.random.default_rng(seed + 3)
        for _ in range(n):
            q0 = rng_local.standard_normal(target.dim) * sd
            p0 = rng_local.standard_normal(target.dim)
            h0 = target.potential(q0) + 0.5 * p0 @ p0
            q1, p1, _ = integrator(oracle, q0, p0, steps, eps)
            h1 = target.potential(q1) + 0.5 * p1 @ p1
            acc += abs(h1 - h0)
        return acc / n

    coarse = mean_abs_dh(0.2, 40)
    fine = mean_abs_dh(0.1, 80)
    ratio = coarse / fine
    return "energy_scaling", lo <= ratio <= hi, f"halving ratio {ratio:.3f}"


def check_perturbation_monotonicity(bounds=(1.0, 0.1, 0.01, 0.001), seed=0):
    """Mean |dH/dt| along near-continuous trajectories (step 1e-4) must
    decrease monotonically as the perturbation bound shrinks."""
    target = _quadratic_target(3, seed)
    rng = np.random.default_rng(seed + 4)
    q0 = rng.standard_normal(target.dim)
    p0 = rng.standard_normal(target.dim)
    eps = 1e-4
    steps = 2000
    rates = []
    for bound in bounds:
        oracle = PerturbedGradientOracle(target, bound=bound, seed=seed + 5)
        q = q0.copy()
        p = p0.copy()
        h_prev = target.potential(q) + 0.5 * p @ p
        acc = 0.0
        for i in range(steps):
            q, p, _ = leapfrog(oracle, q, p, 1, eps)
            h = target.potential(q) + 0.5 * p @ p
            acc += abs(h - h_prev) / eps
            h_prev = h
        rates.append(acc / steps)
    monotone = all(a > b for a, b in zip(rates, rates[1:]))
    detail = ", ".join(f"{b:g}: {r:.3e}" for b, r in zip(bounds, rates))
    return "perturbation_monotonicity", monotone, detail


def check_euler_local_error(seed=0):
    """Single Euler step against the exact flow of a 1-d harmonic oscillator:
    error <= dt * delta + C * dt^2 with C calibrated on the unperturbed case."""
    target = IllConditionedGaussianTarget([1.0])
    rng = np.random.default_rng(seed + 6)
    points = rng.standard_normal((30, 2))
    dts = (0.05, 0.02, 0.01)

    def true_flow(q, p, t):
        # d/dt (q, p) = (p, -q): rotation
        return q * np.cos(t) + p * np.sin(t), p * np.cos(t) - q * np.sin(t)

    def euler(oracle, q, p, dt):
        return q + dt * p, p - dt * oracle(np.array([q]))[0]

    exact = ExactGradientOracle(target)
    c_cal = 0.0
    for dt in dts:
        for q, p in points:
            qt, pt = true_flow(q, p, dt)
            q1, p1 = euler(exact, q, p, dt)
            err = np.hypot(qt - q1, pt - p1)
            c_cal = max(c_cal, err / dt**2)
    c_cal *= 1.0 + 1e-9
    ok = True
    worst = ""
    for bound in (0.5, 0.1):
        oracle = PerturbedGradientOracle(target, bound=bound, seed=seed + 7)
        for dt in dts:
            for q, p in points:
                qt, pt = true_flow(q, p, dt)
                q1, p1 = euler(oracle, q, p, dt)
                err = np.hypot(qt - q1, pt - p1)
                limit = dt * bound + c_cal * dt**2
                if err > limit:
                    ok = False
                    worst = f"err {err:.3e} > bound {limit:.3e} at dt={dt}, delta={bound}"
    return "euler_local_error", ok, worst or f"C = {c_cal:.3f}"


def run_all(integrator=leapfrog, seed=0):
    """All property checks; list of (name, passed, detail)."""
    return [
        check_reversibility(integrator, seed=seed),
        check_volume_preservation(integrator, seed=seed),
        check_energy_scaling(integrator, seed=seed),
        check_perturbation_monotonicity(seed=seed),
        check_euler_local_error(seed=seed),
    ]
