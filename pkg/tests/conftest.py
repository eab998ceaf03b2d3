import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lognls import Grid, PotentialSpec, WaveField, default_epsilon, gausson_profile
from lognls.potentials import kappa_to_omega2

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def gausson_field(N=256, L=24.0, lam=1.0, kappa=1.0, nu=-0.5, epsilon=None):
    g = Grid((N,), (L,))
    w = math.sqrt(kappa_to_omega2(kappa, lam))
    vals = gausson_profile(nu, lam, kappa, 1).evaluate(g.coords())
    eps = default_epsilon(vals) if epsilon is None else epsilon
    return WaveField(g, vals, lam, PotentialSpec.harmonic(w), epsilon=eps)


def l2(a, cell):
    return math.sqrt(float(np.sum(np.abs(a) ** 2)) * cell)


@pytest.fixture
def gausson():
    return gausson_field()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
