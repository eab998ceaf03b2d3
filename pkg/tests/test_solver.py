import math

import numpy as np
import pytest

from lognls import (GaussianState, Grid, PotentialSpec, WaveField, integrate_gaussian, run,
                    scaling_probe, split_step)
from lognls.diagnostics import frame_phase, rescale_u_to_v
from lognls.errors import InvalidArgument, ResolutionError
from lognls.grid import fourier_interpolate, gradient, translate
from lognls.solver import l2_stability_probe, step_count
from lognls.tau_ode import integrate_tau, tau_for_regime

from conftest import gausson_field, l2


def test_grid_layout():
    g = Grid((8, 16), (2.0, 4.0))
    assert g.shape == (8, 16)
    assert g.h == (0.25, 0.25)
    assert g.axis(0)[0] == -1.0 and g.axis(0)[-1] == pytest.approx(0.75)
    assert Grid.from_json(g.to_json()) == g


def test_spectral_gradient_exact_on_gaussian():
    g = Grid((128,), (20.0,))
    x = g.axis(0)
    u = np.exp(-x**2)
    assert np.max(np.abs(gradient(u, g, 0) - (-2 * x * u))) < 1e-12


def test_translate_and_interpolate():
    g = Grid((128,), (20.0,))
    x = g.axis(0)
    u = np.exp(-(x - 0.3) ** 2)
    assert np.max(np.abs(translate(u, g, 0, 0.7) - np.exp(-(x - 1.0) ** 2))) < 1e-12
    pts = np.array([-1.234, 0.0, 2.5])
    assert np.allclose(fourier_interpolate(u, g, 0, pts), np.exp(-(pts - 0.3) ** 2), atol=1e-12)
    with pytest.raises(ResolutionError):
        fourier_interpolate(u, g, 0, [11.0])


def test_step_count():
    assert step_count(1.0, 0.3) == (4, 0.25)
    assert step_count(0.0, 0.1)[0] == 0
    with pytest.raises(InvalidArgument):
        step_count(1.0, 0.0)


def test_linear_harmonic_ground_state():
    # lam = 0: e^{-x^2/2} is the ground state of the oscillator with energy 1/2
    g = Grid((128,), (20.0,))
    f = WaveField(g, np.exp(-g.axis(0) ** 2 / 2), 0.0, PotentialSpec.harmonic(1.0))
    errs = []
    for dt in (2e-2, 1e-2):
        out, _ = run(f, 1.0, dt, record=False)
        errs.append(np.max(np.abs(out.values - f.values * np.exp(-0.5j))))
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_gausson_phase_rotation(gausson):
    out, _ = run(gausson, 1.0, 1e-3, record=False)
    assert l2(out.values - gausson.values * np.exp(-0.5j), gausson.grid.cell) / gausson.norm() < 1e-5


def test_breathing_gaussian_matches_oracle():
    lam, a0 = 1.0, 2.0
    g = Grid((256,), (20.0,))
    spec = PotentialSpec.harmonic(math.sqrt(3.0))
    st = GaussianState([a0], 1.0)
    f = WaveField(g, st.evaluate(g.coords()), lam, spec, epsilon=0.0)
    out, _ = run(f, 1.0, 1e-3, record=False)
    ser = integrate_gaussian(st, spec, lam, 1.0, 1e-3)
    ref = ser[len(ser) - 1].evaluate(g.coords())
    assert l2(out.values - ref, g.cell) / l2(ref, g.cell) < 1e-5


def test_scaling_probe_small(gausson):
    assert scaling_probe(gausson, 2.0, 0.2, 1e-3) / (2 * gausson.norm()) < 1e-10


def test_l2_doubling_bound(gausson):
    rng = np.random.default_rng(1)
    w0 = 1e-3 * (rng.standard_normal(256) + 1j * rng.standard_normal(256)) * np.exp(-gausson.grid.axis(0) ** 2 / 8)
    rep = l2_stability_probe(gausson, w0, 0.5, 1e-3, save_every=50)
    assert rep.worst <= 1.0
    assert rep.times[-1] == pytest.approx(0.5)


def test_run_records_and_hooks(gausson):
    _, recs = run(gausson, 0.1, 1e-2, save_every=3, hooks=[lambda f: {"peak": float(np.abs(f.values).max())}])
    assert [round(r.t, 12) for r in recs] == [0.0, 0.03, 0.06, 0.09, 0.1]
    assert all("peak" in r.extra for r in recs)


def test_boundary_guard_trips():
    g = Grid((128,), (8.0,))
    vals = GaussianState([0.5], 1.0).evaluate(g.coords())
    f = WaveField(g, vals, 1.0, PotentialSpec.repulsive(1.0))
    with pytest.raises(ResolutionError):
        run(f, 1.0, 1e-2)


def test_split_step_preserves_mass_to_roundoff(gausson):
    out = split_step(gausson, 1e-2)
    assert out.mass() == pytest.approx(gausson.mass(), rel=1e-13)


def test_cross_frame_free():
    """A physical run mapped to the rescaled frame agrees with a rescaled run
    once the dropped time-only phase is restored."""
    lam, T = 1.0, 0.5
    g = Grid((1024,), (48.0,))
    gv = Grid((512,), (24.0,))
    u0 = GaussianState([1.0], 1.3).evaluate(g.coords())
    spec = PotentialSpec.free(1)
    traj = integrate_tau(tau_for_regime("free", lam), T + 1.0, 1e-4, log_clock=True)
    uf = WaveField(g, u0, lam, spec, epsilon=0.0)
    v0 = rescale_u_to_v(uf, traj, "free", target=gv)
    v0.epsilon = 0.0
    u_T, _ = run(uf, T, 1e-3, record=False)
    v_T, _ = run(v0, T, 1e-3, record=False)
    mapped = rescale_u_to_v(u_T, traj, "free", target=gv, u0_norm=uf.norm())
    theta = frame_phase(traj, T, 1, lam, norm_ratio=uf.norm() / math.pi ** 0.25)
    expect = v_T.values * np.exp(-1j * theta)
    assert l2(mapped.values - expect, gv.cell) / l2(expect, gv.cell) <= 1e-4
