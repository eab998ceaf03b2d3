"""Repulsive harmonic potential: exponential spreading with a data-dependent profile.

With V = -omega^2 |x|^2 / 2 Gaussian widths grow like mu_inf exp(omega t), and
mu_inf depends on the initial chirp beta of a(0) = 1 - i beta.  The limiting
|v| width in the rescaled frame is mu_inf(beta) / mu_inf(reference), so
different data give different limits: there is no universal profile.

Run:  python3 demos/repulsive_nonuniversality.py
"""
from lognls import TauParams, integrate_tau, mu_infinity_integral, mu_infinity_limit
from lognls.tau_ode import tau_for_regime

lam, omega = 1.0, 1.0
# reference: the frame-building trajectory (no cubic term, data (1, 0))
ref = integrate_tau(tau_for_regime("repulsive", lam, omega), 30.0, 2e-4, log_clock=True)
mu_ref = mu_infinity_integral(ref).value
print(f"reference mu_inf = {mu_ref:.9f}")
print("\n  beta    mu_inf (limit)    mu_inf (integral)    limiting |v| width")
for beta in (0.0, 1.0, 5.0, 20.0, 50.0):
    traj = integrate_tau(TauParams(lam, -omega**2, True, 1.0, beta), 30.0, 2e-4, log_clock=True,
                         clock_scale=1 / max(1.0, beta))
    lim, itg = mu_infinity_limit(traj), mu_infinity_integral(traj)
    print(f"{beta:6.1f}   {lim.value:14.9f}   {itg.value:16.9f}   {itg.value / mu_ref:14.6f}")
