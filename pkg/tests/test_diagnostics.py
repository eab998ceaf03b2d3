import math

import numpy as np
import pytest

from lognls import GaussianState, Grid, PotentialSpec, WaveField, run
from lognls.diagnostics import (compute_record, dual_logsob_residual, energies, gamma_norm_sq,
                                marginal_current, marginal_density, relative_entropy_and_ck,
                                rescale_u_to_v, wasserstein1_1d, wasserstein1_marginals,
                                write_records_csv, xlogx)
from lognls.errors import InvalidArgument, MassMismatch
from lognls.grid import RescaledFrame
from lognls.tau_ode import integrate_tau, tau_for_regime


def test_xlogx_convention():
    out = xlogx(np.array([0.0, 1.0, math.e]))
    assert out.tolist() == [0.0, 0.0, math.e]


def test_energy_of_gaussian_closed_form():
    # u = e^{-x^2/2}, lam = 1, V = x^2/2:
    # 1/2||u'||^2 = sqrt(pi)/4, int V|u|^2 = sqrt(pi)/4, int |u|^2 (ln|u|^2 - 1) = -3 sqrt(pi)/2
    g = Grid((256,), (24.0,))
    f = WaveField(g, np.exp(-g.axis(0) ** 2 / 2), 1.0, PotentialSpec.harmonic(1.0))
    E, Eeps = energies(f)
    assert E == pytest.approx(math.sqrt(math.pi) * (0.5 - 1.5), rel=1e-12)
    assert Eeps == E


def test_energy_eps_close_to_energy():
    g = Grid((256,), (24.0,))
    f = WaveField(g, np.exp(-g.axis(0) ** 2 / 2), 1.0, PotentialSpec.harmonic(1.0), epsilon=1e-12)
    E, Eeps = energies(f)
    assert abs(E - Eeps) < 1e-9


def test_record_moments():
    g = Grid((512,), (30.0,))
    st = GaussianState([2.0], 1.0, [0.5], [0.7])
    f = WaveField(g, st.evaluate(g.coords()), 1.0, PotentialSpec.free(1))
    r = compute_record(f)
    M = st.mass()
    assert r.mass == pytest.approx(M, rel=1e-12)
    assert r.I2[0] == pytest.approx(0.5 * M, rel=1e-12)
    assert r.J[0] == pytest.approx(0.7 * M, rel=1e-12)
    assert r.I1 is r.J
    assert r.second_moment == pytest.approx(M * (0.25 + 0.25), rel=1e-12)


def test_csv_is_repr_exact(tmp_path, gausson):
    _, recs = run(gausson, 0.02, 1e-2)
    path = tmp_path / "d.csv"
    write_records_csv(recs, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:4] == ["t", "mass", "energy", "energy_eps"]
    assert float(lines[1].split(",")[1]) == recs[0].mass


def test_gamma_norm():
    g = Grid((256, 256), (20.0, 20.0))
    gam = np.exp(-sum(x * x for x in g.coords()) / 2)
    assert float(np.sum(gam**2)) * g.cell == pytest.approx(gamma_norm_sq(2), rel=1e-12)


def test_rescale_of_the_rescaled_gaussian_profile():
    # at t = 0 (tau = 1, tau' = 0) the map is a pure normalization
    g = Grid((256,), (20.0,))
    f = WaveField(g, 3.0 * np.exp(-g.axis(0) ** 2 / 2), 1.0, PotentialSpec.free(1))
    traj = integrate_tau(tau_for_regime("free", 1.0), 1.0, 1e-3)
    v = rescale_u_to_v(f, traj, "free")
    assert np.allclose(v.values, np.exp(-g.axis(0) ** 2 / 2), atol=1e-13)
    assert v.is_rescaled


def test_marginal_density_partial():
    g = Grid((32, 64), (10.0, 16.0))
    x, y = g.coords()
    spec = PotentialSpec((1, 0), (2.0, 0.0))
    traj = integrate_tau(tau_for_regime("partial", 1.0), 1.0, 1e-3)
    vals = np.exp(-x**2) * np.exp(-(y - 0.5) ** 2)
    f = WaveField(g, vals, 1.0, spec, frame=RescaledFrame(traj, (False, True), "partial"))
    axes, rho = marginal_density(f)
    assert rho.shape == (64,)
    assert float(rho.sum()) * g.h[1] == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert np.allclose(marginal_current(f), 0.0, atol=1e-14)


def test_marginal_needs_frame_for_physical():
    g = Grid((64,), (10.0,))
    f = WaveField(g, np.exp(-g.axis(0) ** 2), 1.0, PotentialSpec.free(1))
    with pytest.raises(InvalidArgument):
        marginal_density(f)


def test_wasserstein_shift():
    x = np.linspace(-10, 10, 2001)
    dx = x[1] - x[0]
    p = np.exp(-x**2) / math.sqrt(math.pi)
    q = np.exp(-(x - 0.75) ** 2) / math.sqrt(math.pi)
    assert wasserstein1_1d(p, q, dx) == pytest.approx(0.75, rel=1e-6)
    with pytest.raises(MassMismatch):
        wasserstein1_1d(2 * p, q, dx)


def test_wasserstein_marginals():
    g = Grid((128, 128), (12.0, 12.0))
    x, y = g.coords()
    p = np.exp(-x**2 - y**2)
    q = np.exp(-(x - 0.5) ** 2 - y**2)
    w = wasserstein1_marginals(p, q, g)
    assert w[0] == pytest.approx(0.5, rel=1e-4)
    assert w[1] == pytest.approx(0.0, abs=1e-12)


def test_logsob_equality_for_matched_gaussian():
    g = Grid((512,), (20.0,))
    a = 1.7
    rho = np.exp(-a * g.axis(0) ** 2)
    res = dual_logsob_residual(rho, g, a, density=True)
    assert abs(res.residual) <= 1e-8
    assert res.a_star == pytest.approx(a, rel=1e-10)


def test_logsob_positive_for_mismatch():
    g = Grid((512,), (20.0,))
    res = dual_logsob_residual(np.exp(-g.axis(0) ** 2 / 2), g, 3.0)
    assert res.residual > 0.1
    assert res.residual_at_a_star <= res.residual


def test_kl_closed_form():
    # KL(N(0,s) || N(0,1/(2a))) = (1/2)(2 a s - 1 - ln(2 a s))
    x = np.linspace(-15, 15, 6001)
    dx = x[1] - x[0]
    s, a = 0.8, 1.3
    mu = np.exp(-x**2 / (2 * s)) / math.sqrt(2 * math.pi * s)
    nu = np.exp(-a * x**2) * math.sqrt(a / math.pi)
    kl, slack = relative_entropy_and_ck(mu, nu, dx)
    assert kl == pytest.approx(0.5 * (2 * a * s - 1 - math.log(2 * a * s)), rel=1e-9)
    assert slack >= 0


def test_kl_support_violation():
    mu = np.array([0.5, 0.5, 0.0]) / 1.0
    nu = np.array([1.0, 0.0, 0.0])
    with pytest.raises(InvalidArgument):
        relative_entropy_and_ck(mu, nu, 1.0)
