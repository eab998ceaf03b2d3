"""Free logNLS: the universal dispersion rate and the Gaussian profile.

For lambda > 0 and V = 0 every solution spreads like tau(t) ~ 2 t sqrt(lambda ln t),
and in the rescaled variable y = x / tau the modulus converges to the fixed
Gaussian gamma(y) = exp(-|y|^2 / 2), whatever the initial datum.

Run:  python3 demos/free_dispersion.py
"""
import math

import numpy as np

from lognls import Grid, PotentialSpec, TauParams, WaveField, default_epsilon, free_rate_check, integrate_tau, run
from lognls.diagnostics import wasserstein1_1d
from lognls.experiments import seeded_datum
from lognls.grid import RescaledFrame
from lognls.tau_ode import tau_for_regime

lam = 1.0

# 1. The rate, from the ODE alone.
traj = integrate_tau(TauParams(lam, 0.0, False), 1e6, 1e-4, log_clock=True)
rate = free_rate_check(traj)
for t in (1e2, 1e4, 1e6):
    i = min(int(np.searchsorted(rate.times, t)), rate.times.size - 1)
    print(f"t = {t:8.0e}   tau / (2 t sqrt(lam ln t)) = {rate.tau_ratio[i]:.4f}")

# 2. A lumpy datum in the rescaled frame relaxes toward gamma^2.
T = 100.0
g = Grid((2048,), (16.0,))
y = g.axis(0)
v0 = seeded_datum(y, np.random.default_rng(1), bumps=3)
v0 *= math.pi**0.25 / math.sqrt(float(np.sum(np.abs(v0) ** 2)) * g.cell)
tau = integrate_tau(tau_for_regime("free", lam), T + 1.0, 1e-4, log_clock=True)
f = WaveField(g, v0, lam, PotentialSpec.free(1), epsilon=default_epsilon(v0),
              frame=RescaledFrame(tau, (True,), "free"))
gamma2 = np.exp(-y**2) / math.sqrt(math.pi)


def w1(fld):
    return {"w1": wasserstein1_1d(fld.density() / math.sqrt(math.pi), gamma2, g.h[0], normalize=True)}


_, recs = run(f, T, 0.02, save_every=500, hooks=[w1])
print("\n     t    second moment / limit    W1(|v|^2, gamma^2)")
for r in recs:
    print(f"{r.t:6.1f}    {r.second_moment / (math.sqrt(math.pi) / 2):10.4f}           {r.extra['w1']:.4f}")
