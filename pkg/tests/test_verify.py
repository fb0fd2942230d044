import numpy as np

from gradhmc import verify
from gradhmc.samplers import LeapfrogResult, leapfrog


def broken_leapfrog(oracle, q0, p0, n_steps, step_size):
    """Leapfrog with a sign error in the final half kick."""
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    p -= 0.5 * step_size * oracle(q)
    for i in range(n_steps):
        q += step_size * p
        g = oracle(q)
        if i < n_steps - 1:
            p -= step_size * g
        else:
            p += 0.5 * step_size * g  # wrong sign
    return LeapfrogResult(q, p, True)


class TestChecks:
    def test_reversibility_passes(self):
        name, passed, detail = verify.check_reversibility()
        assert passed, detail

    def test_reversibility_catches_sign_error(self):
        _, passed, _ = verify.check_reversibility(integrator=broken_leapfrog)
        assert not passed

    def test_volume_preservation(self):
        name, passed, detail = verify.check_volume_preservation()
        assert passed, detail

    def test_energy_scaling(self):
        name, passed, detail = verify.check_energy_scaling()
        assert passed, detail

    def test_perturbation_monotonicity(self):
        name, passed, detail = verify.check_perturbation_monotonicity()
        assert passed, detail

    def test_euler_local_error(self):
        name, passed, detail = verify.check_euler_local_error()
        assert passed, detail

    def test_run_all_green(self):
        results = verify.run_all()
        assert all(ok for _, ok, _ in results)

    def test_run_all_reports_broken_integrator(self):
        results = verify.run_all(integrator=broken_leapfrog)
        by_name = {name: ok for name, ok, _ in results}
        assert not by_name["reversibility"]
