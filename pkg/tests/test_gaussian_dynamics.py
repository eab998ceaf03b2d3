import math

import numpy as np
import pytest

from lognls import (GaussianState, Grid, PotentialSpec, TauParams, galilean_boost, gausson_profile,
                    integrate_gaussian, integrate_tau, tau_from_width, tensor_product, widths_from_tau)
from lognls.errors import InvalidArgument


def test_widths_and_tau_round_trip():
    a = widths_from_tau(1.7, -0.4)
    assert tau_from_width(a) == pytest.approx((1.7, -0.4), rel=1e-14)


def test_initial_width_convention():
    # a(0) = 1 - i beta corresponds to (tau0, tau1) = (1, beta)
    assert tau_from_width(1 - 3j) == (1.0, 3.0)


@pytest.mark.parametrize("Omega", [0.0, 3.0, -1.0])
def test_width_follows_tau(Omega):
    lam, beta = 1.0, 0.7
    spec = PotentialSpec((int(np.sign(Omega)),), (math.sqrt(abs(Omega)),))
    ser = integrate_gaussian(GaussianState([1 - 1j * beta], 1.0), spec, lam, 3.0, 1e-3)
    traj = integrate_tau(TauParams(lam, Omega, True, 1.0, beta), 3.0, 1e-3)
    tau_gauss = 1 / np.sqrt(ser.a[:, 0].real)
    assert len(tau_gauss) == len(traj)
    assert np.max(np.abs(tau_gauss / traj.tau - 1)) < 1e-9


def test_mass_conserved():
    ser = integrate_gaussian(GaussianState([2.0 - 0.5j], 0.8 + 0.1j), PotentialSpec.harmonic(1.3), 1.0,
                             5.0, 1e-3)
    m = ser.mass()
    assert np.max(np.abs(m / m[0] - 1)) < 1e-10


def test_gausson_is_stationary_up_to_phase():
    lam, kappa, nu = 1.0, 1.0, -0.5
    st = gausson_profile(nu, lam, kappa, 1)
    ser = integrate_gaussian(st, PotentialSpec.harmonic(math.sqrt(3.0)), lam, 2.0, 1e-3)
    assert np.max(np.abs(ser.a[:, 0] - kappa)) < 1e-12
    # H phi = -nu phi, so u = e^{i nu t} phi
    assert ser.b[-1] == pytest.approx(st.b * np.exp(1j * nu * 2.0), rel=1e-10)


def test_amplitude_scaling_phase():
    lam, k = 1.0, 3.0
    spec = PotentialSpec.free(1)
    a = integrate_gaussian(GaussianState([1.0], 1.0), spec, lam, 1.0, 1e-3)
    b = integrate_gaussian(GaussianState([1.0], k), spec, lam, 1.0, 1e-3)
    assert np.allclose(b.b, k * a.b * np.exp(-1j * lam * a.times * math.log(k * k)), rtol=1e-10)


def test_evaluate_and_mass_match_quadrature():
    st = GaussianState([1.5 + 0.3j], 0.7, [0.4], [1.1])
    g = Grid((512,), (30.0,))
    vals = st.evaluate(g.coords())
    assert float(np.sum(np.abs(vals) ** 2)) * g.cell == pytest.approx(st.mass(), rel=1e-12)


def test_tensor_product_evaluates_as_outer_product():
    s1 = GaussianState([1.0 - 0.2j], 0.5, [0.1], [0.3])
    s2 = GaussianState([2.0], 1.5j)
    g = Grid((32, 64), (8.0, 8.0))
    prod = tensor_product([s1, s2]).evaluate(g.coords())
    outer = np.multiply.outer(s1.evaluate([g.axis(0)]), s2.evaluate([g.axis(1)]))
    assert np.allclose(prod, outer, rtol=1e-14, atol=1e-15)


def test_boost_gaussian_and_field_agree():
    from lognls import WaveField

    g = Grid((256,), (20.0,))
    st = GaussianState([1.0], 1.0)
    f = WaveField(g, st.evaluate(g.coords()), 1.0, PotentialSpec.free(1))
    for regime, omega in (("free", None), ("confining", 1.2), ("repulsive", 0.8)):
        bs = galilean_boost(st, 0.6, regime, 0.7, omega=omega)
        bf = galilean_boost(f, 0.6, regime, 0.7, omega=omega)
        assert np.max(np.abs(bs.evaluate(g.coords()) - bf.values)) < 1e-10


def test_boost_validation():
    with pytest.raises(InvalidArgument):
        galilean_boost(GaussianState([1.0], 1.0), 1.0, "confining", 0.0)
    with pytest.raises(InvalidArgument):
        galilean_boost(GaussianState([1.0], 1.0), 1.0, "sideways", 0.0, omega=1.0)


def test_integrate_rejects_moving_state():
    with pytest.raises(InvalidArgument):
        integrate_gaussian(GaussianState([1.0], 1.0, [0.5]), PotentialSpec.free(1), 1.0, 1.0, 0.1)
