"""Action, Nehari functional, ground energy and the orbital-stability experiment.

With V(x) = omega^2 |x|^2 / 2 and omega^2 = kappa (kappa + 2 lam):

    S_nu(u) = E(u) + nu ||u||^2
    I_nu(u) = ||grad u||^2 + omega^2 ||x u||^2 + 2 lam int |u|^2 ln|u|^2 + 2 nu ||u||^2
            = 2 S_nu(u) + 2 lam ||u||^2

and the Gausson phi_nu realizes D(nu) = inf { S_nu : I_nu = 0 }.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .diagnostics import xlogx
from .errors import InvalidArgument
from .grid import Grid, WaveField, default_epsilon, fftn, ifftn
from .potentials import PotentialSpec, gausson_profile


@dataclass(frozen=True)
class VariationalContext:
    lam: float
    kappa: float
    nu: float
    d: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidArgument("the variational setting needs lambda > 0")
        if not self.kappa > 0:
            raise InvalidArgument("kappa must be positive")
        if self.d < 1:
            raise InvalidArgument("d must be >= 1")

    @property
    def omega2(self) -> float:
        return self.kappa * (self.kappa + 2 * self.lam)

    @property
    def omega(self) -> float:
        return math.sqrt(self.omega2)

    def potential(self) -> PotentialSpec:
        return PotentialSpec.harmonic(self.omega, self.d)

    def gausson(self):
        return gausson_profile(self.nu, self.lam, self.kappa, self.d)

    def gausson_field(self, grid: Grid, epsilon: float | None = None) -> WaveField:
        if grid.ndim != self.d:
            raise InvalidArgument("grid dimension differs from the context")
        vals = self.gausson().evaluate(grid.coords())
        eps = default_epsilon(vals) if epsilon is None else epsilon
        return WaveField(grid, vals, self.lam, self.potential(), epsilon=eps)


class SigmaParts(NamedTuple):
    mass: float
    grad2: float
    xmom2: float


def sigma_parts(values: np.ndarray, grid: Grid) -> SigmaParts:
    """||u||^2, ||grad u||^2 (spectral) and ||x u||^2."""
    hat = fftn(values)
    power = hat.real**2 + hat.imag**2
    ksq = sum(grid.k(j) ** 2 for j in range(grid.ndim))
    grad2 = float(np.sum(ksq * power)) * grid.cell / power.size
    dens = values.real**2 + values.imag**2
    r2 = sum(x * x for x in grid.coords())
    return SigmaParts(float(dens.sum()) * grid.cell, grad2, float(np.sum(r2 * dens)) * grid.cell)


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, WaveField) else np.asarray(u, dtype=complex)


class ActionNehari(NamedTuple):
    S: float
    I: float
    residual: float


def action_and_nehari(u: WaveField, ctx: VariationalContext) -> ActionNehari:
    """S_nu, I_nu and the identity residual I - 2S - 2 lam ||u||^2, from one pass."""
    v = _values(u)
    g = u.grid
    parts = sigma_parts(v, g)
    if parts.mass == 0:
        raise InvalidArgument("the action is not used on the zero field")
    ent = float(np.sum(xlogx(v.real**2 + v.imag**2))) * g.cell
    lam, nu, w2 = ctx.lam, ctx.nu, ctx.omega2
    E = 0.5 * parts.grad2 + 0.5 * w2 * parts.xmom2 + lam * (ent - parts.mass)
    S = E + nu * parts.mass
    I = parts.grad2 + w2 * parts.xmom2 + 2 * lam * ent + 2 * nu * parts.mass
    return ActionNehari(S, I, I - 2 * S - 2 * lam * parts.mass)


def ground_energy(ctx: VariationalContext) -> float:
    """D(nu) = -lam pi^(d/2) kappa^(-d/2) exp(-(nu + kappa d / 2) / lam)."""
    d, k = ctx.d, ctx.kappa
    return -ctx.lam * math.pi ** (d / 2) * k ** (-d / 2) * math.exp(-(ctx.nu + k * d / 2) / ctx.lam)


def spectral_floor_check(u: WaveField, kappa: float) -> float:
    """||grad u||^2 + kappa^2 ||x u||^2 - kappa d ||u||^2  (>= 0, zero only on e^{-kappa|x|^2/2})."""
    if not kappa > 0:
        raise InvalidArgument("kappa must be positive")
    parts = sigma_parts(_values(u), u.grid)
    return parts.grad2 + kappa**2 * parts.xmom2 - kappa * u.grid.ndim * parts.mass


def sigma_inner(u: np.ndarray, w: np.ndarray, grid: Grid) -> complex:
    """<u, w>_Sigma = int u conj(w) + int grad u . conj(grad w) + int |x|^2 u conj(w)."""
    uh, wh = fftn(u), fftn(w)
    ksq = sum(grid.k(j) ** 2 for j in range(grid.ndim))
    grad = complex(np.sum(ksq * uh * np.conj(wh))) * grid.cell / uh.size
    r2 = sum(x * x for x in grid.coords())
    prod = u * np.conj(w)
    return complex(np.sum(prod)) * grid.cell + grad + complex(np.sum(r2 * prod)) * grid.cell


def sigma_norm(u: np.ndarray, grid: Grid) -> float:
    parts = sigma_parts(u, grid)
    return math.sqrt(parts.mass + parts.grad2 + parts.xmom2)


def sigma_distance_to_orbit(u: WaveField, phi: WaveField) -> tuple[float, float]:
    """inf over theta of ||u - e^{i theta} phi||_Sigma and the minimizer in [0, 2 pi)."""
    if u.grid != phi.grid:
        raise InvalidArgument("fields live on different grids")
    uv, pv = _values(u), _values(phi)
    theta = cmath.phase(sigma_inner(uv, pv, u.grid)) % (2 * math.pi)
    return sigma_norm(uv - np.exp(1j * theta) * pv, u.grid), theta


def nehari_rescale(u: WaveField, ctx: VariationalContext) -> tuple[float, WaveField]:
    """Scale u onto the Nehari set: rho = exp(-I_nu(u) / (4 lam ||u||^2)).

    Uses I_nu(k u) = k^2 (I_nu(u) + 2 lam ||u||^2 ln k^2) for real k > 0.
    """
    res = action_and_nehari(u, ctx)
    rho = math.exp(-res.I / (4 * ctx.lam * u.mass()))
    return rho, u.with_values(rho * u.values)


def random_sigma_perturbation(grid: Grid, rng: np.random.Generator, k_cut: float = 4.0,
                              envelope: float = 2.0) -> np.ndarray:
    """Band-limited complex Gaussian noise under a Gaussian envelope, unit Sigma norm.

    Fourier modes with |k| > k_cut are removed; the envelope
    exp(-|x|^2 / (2 envelope^2)) keeps the field localized so its
    second moment is finite and resolved on the box.
    """
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    ksq = sum(grid.k(j) ** 2 for j in range(grid.ndim))
    smooth = ifftn(fftn(noise) * (ksq <= k_cut**2))
    r2 = sum(x * x for x in grid.coords())
    field = smooth * np.exp(-r2 / (2 * envelope**2))
    return field / sigma_norm(field, grid)


@dataclass
class OrbitalStabilityResult:
    sup_dist: float
    time_of_sup: float
    times: np.ndarray
    dist: np.ndarray
    nehari: np.ndarray
    rho: np.ndarray
    eta: float
    seed: int | None


def orbital_stability_experiment(eta: float, T: float, ctx: VariationalContext, grid: Grid,
                                 dt: float, seed: int | None = 0, save_every: int = 100,
                                 phase_only: bool = False, k_cut: float = 4.0,
                                 envelope: float = 2.0) -> OrbitalStabilityResult:
    """Evolve phi_nu + eta psi (or e^{i eta} phi_nu with ``phase_only``) and track
    inf_theta ||u(t) - e^{i theta} phi_nu||_Sigma, I_nu(u(t)) and the Nehari
    renormalization factor rho(t)."""
    from .solver import run

    if eta < 0:
        raise InvalidArgument("eta must be >= 0")
    phi = ctx.gausson_field(grid)
    if phase_only:
        vals = np.exp(1j * eta) * phi.values
    else:
        psi = random_sigma_perturbation(grid, np.random.default_rng(seed), k_cut, envelope)
        vals = phi.values + eta * psi
    u0 = phi.with_values(vals)

    def hook(f):
        dist, _ = sigma_distance_to_orbit(f, phi)
        an = action_and_nehari(f, ctx)
        return {"sigma_dist": dist, "nehari": an.I,
                "rho": math.exp(-an.I / (4 * ctx.lam * f.mass()))}

    _, recs = run(u0, T, dt, save_every=save_every, hooks=[hook])
    times = np.array([r.t for r in recs])
    dist = np.array([r.extra["sigma_dist"] for r in recs])
    i = int(np.argmax(dist))
    return OrbitalStabilityResult(float(dist[i]), float(times[i]), times, dist,
                                  np.array([r.extra["nehari"] for r in recs]),
                                  np.array([r.extra["rho"] for r in recs]), eta,
                                  None if phase_only else seed)
