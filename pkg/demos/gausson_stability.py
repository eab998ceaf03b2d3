"""Gaussons under a harmonic trap: stationarity and orbital stability.

With V = omega^2 |x|^2 / 2 and omega^2 = kappa (kappa + 2 lambda), the Gausson
phi_nu = exp(-(nu + kappa d/2) / (2 lambda)) exp(-kappa |x|^2 / 2) is a standing
wave e^{i nu t} phi_nu.  A small Sigma-perturbation stays close to its orbit.

Run:  python3 demos/gausson_stability.py
"""
from lognls import Grid
from lognls.variational import (VariationalContext, action_and_nehari, ground_energy,
                                orbital_stability_experiment)

ctx = VariationalContext(lam=1.0, kappa=1.0, nu=-0.5, d=1)
grid = Grid((512,), (24.0,))
phi = ctx.gausson_field(grid)
res = action_and_nehari(phi, ctx)
print(f"S(phi) = {res.S:.12f}   D(nu) = {ground_energy(ctx):.12f}   I(phi) = {res.I:.2e}")

for eta in (0.0, 0.01, 0.05):
    out = orbital_stability_experiment(eta, 10.0, ctx, grid, 1e-3, seed=0, save_every=200)
    print(f"eta = {eta:4.2f}: sup_t dist_Sigma(u(t), orbit) = {out.sup_dist:.3e} "
          f"(at t = {out.time_of_sup:.1f}); Nehari rho in [{out.rho.min():.4f}, {out.rho.max():.4f}]")
