import math

import numpy as np
import pytest

from lognls import InvalidArgument, PotentialSpec, eval_potential, gausson_profile, gausson_width
from lognls.errors import NoGaussonError
from lognls.potentials import kappa_to_omega2


@pytest.mark.parametrize("signs, kind", [
    ((1, 1), "confining"), ((1, 0), "partial"), ((-1, -1), "repulsive"),
    ((1, -1), "saddle"), ((0, 0), "free"), ((0, -1), "saddle"),
])
def test_classify(signs, kind):
    assert PotentialSpec(signs, (1.0, 1.0)).classify() == kind


def test_zero_sign_axis_drops_frequency():
    spec = PotentialSpec((1, 0), (2.0, 5.0))
    assert spec.omegas == (2.0, 0.0)
    assert spec.curvatures == (4.0, 0.0)


def test_eval_and_grid_agree():
    spec = PotentialSpec((1, -1), (2.0, 3.0), (0.5, 0.0))
    x = np.array([0.3, -1.2])
    expect = 4 * 0.09 / 2 - 9 * 1.44 / 2 + 0.5 * 0.3
    assert eval_potential(spec, x) == pytest.approx(expect, rel=1e-15)
    grid_val = spec.on_grid([np.array([[0.3]]), np.array([[-1.2]])])
    assert grid_val[0, 0] == pytest.approx(expect, rel=1e-15)


def test_json_round_trip():
    spec = PotentialSpec((1, 0, -1), (1.5, 0.0, 2.0), (0.0, 0.1, 0.0))
    assert PotentialSpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize("bad", [
    dict(signs=(2,), omegas=(1.0,)),
    dict(signs=(1,), omegas=(-1.0,)),
    dict(signs=(1, 1), omegas=(1.0,)),
    dict(signs=(), omegas=()),
])
def test_invalid_specs(bad):
    with pytest.raises(InvalidArgument):
        PotentialSpec(**bad)


def test_eval_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        eval_potential(PotentialSpec.harmonic(1.0, 2), [1.0])


def test_gausson_width_root():
    lam, omega = 1.0, math.sqrt(3.0)
    k = gausson_width(lam, omega)
    assert k == pytest.approx(1.0, rel=1e-15)
    assert kappa_to_omega2(k, lam) == pytest.approx(omega**2, rel=1e-14)


def test_gausson_width_focusing_without_potential():
    assert gausson_width(-1.0, 0.0) == pytest.approx(2.0)


def test_gausson_width_no_solution():
    with pytest.raises(NoGaussonError):
        gausson_width(1.0, 0.0)


def test_gausson_profile_amplitude():
    st = gausson_profile(-0.5, 1.0, 1.0, 2)
    assert st.b == pytest.approx(math.exp(-(-0.5 + 1.0) / 2))
    assert np.all(st.a == 1.0)
