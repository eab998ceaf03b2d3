"""Observables: conserved quantities, moments, entropies, rescalings, distances.

All integrals are plain grid sums times the cell volume, accumulated in a
fixed order so repeated evaluations are bit-identical.  Gradient terms use
spectral differentiation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgument, MassMismatch, ResolutionError
from .grid import (Grid, RescaledFrame, WaveField, default_epsilon, fftn, fourier_interpolate,
                   gradient, gradient_sq_norms)

LOG_FLOOR = 1e-300


def xlogx(dens: np.ndarray) -> np.ndarray:
    """dens * ln(dens) with the 0 ln 0 = 0 convention."""
    out = np.zeros_like(dens, dtype=float)
    pos = dens > 0
    out[pos] = dens[pos] * np.log(dens[pos])
    return out


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    energy_eps: float
    J: np.ndarray
    I2: np.ndarray
    second_moment: float
    llogl: float
    kinetic: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def I1(self) -> np.ndarray:
        """Momentum Im int conj(f) grad f; the same integral as J."""
        return self.J

    def row(self) -> dict:
        out = {"t": self.t, "mass": self.mass, "energy": self.energy, "energy_eps": self.energy_eps}
        for name in ("J", "I2", "kinetic"):
            for j, val in enumerate(getattr(self, name)):
                out[f"{name}_{j}"] = float(val)
        out["second_moment"] = self.second_moment
        out["llogl"] = self.llogl
        for key in sorted(self.extra):
            out[key] = self.extra[key]
        return out


def _potential_array(f: WaveField) -> np.ndarray:
    """V for physical fields; the effective w^2|x'|^2/2 + lam|y|^2 in rescaled frames."""
    g = f.grid
    if not f.is_rescaled:
        return np.broadcast_to(f.potential.on_grid(g.coords()), g.shape)
    W = 0.0
    for j, (x, flag) in enumerate(zip(g.coords(), f.frame.rescaled)):
        if flag:
            W = W + f.lam * x * x
        else:
            W = W + f.potential.signs[j] * f.potential.omegas[j] ** 2 * x * x / 2
    return np.broadcast_to(W, g.shape)


def _kinetic_weights(f: WaveField) -> np.ndarray:
    """Per-axis coefficient in front of ||d_j f||^2 (1/2, or 1/(2 tau^2) on rescaled axes)."""
    w = np.full(f.grid.ndim, 0.5)
    if f.is_rescaled:
        tau, _ = f.frame.traj.at(f.t)
        for j, flag in enumerate(f.frame.rescaled):
            if flag:
                w[j] = 0.5 / tau**2
    return w


def momentum(f: WaveField, hat=None) -> np.ndarray:
    """Im int conj(f) d_j f, one entry per axis."""
    if hat is None:
        hat = fftn(f.values)
    out = np.empty(f.grid.ndim)
    conj = np.conj(f.values)
    for j in range(f.grid.ndim):
        out[j] = float(np.sum(conj * gradient(f.values, f.grid, j, hat)).imag) * f.grid.cell
    return out


def energies(f: WaveField, hat=None) -> tuple[float, float]:
    """(E, E_eps).

    Physical: E = 1/2||grad u||^2 + int V|u|^2 + lam int |u|^2 (ln|u|^2 - 1) and
    E_eps replaces the last integrand by (eps+rho)ln(eps+rho) - rho - eps ln eps,
    the energy conserved by the regularized equation.
    Rescaled: the dissipated energy with the tau-dependent kinetic weight and
    lam int |v|^2 ln|v|^2 (its eps analog adds rho to the eps integrand).
    """
    g = f.grid
    if hat is None:
        hat = fftn(f.values)
    rho = f.density()
    kin = float(np.dot(_kinetic_weights(f), gradient_sq_norms(f.values, g, hat)))
    pot = float(np.sum(_potential_array(f) * rho)) * g.cell
    rlogr = float(np.sum(xlogx(rho))) * g.cell
    mass = float(rho.sum()) * g.cell
    eps = f.epsilon
    if eps > 0:
        reg = float(np.sum((eps + rho) * np.log(eps + rho) - eps * math.log(eps))) * g.cell
    else:
        reg = rlogr
    if f.is_rescaled:
        return kin + pot + f.lam * rlogr, kin + pot + f.lam * reg
    return kin + pot + f.lam * (rlogr - mass), kin + pot + f.lam * (reg - mass)


def compute_record(f: WaveField) -> DiagnosticsRecord:
    g = f.grid
    hat = fftn(f.values)
    rho = f.density()
    mass = float(rho.sum()) * g.cell
    centers = np.array([float(np.sum(x * rho)) * g.cell for x in g.coords()])
    r2 = sum(x * x for x in g.coords())
    second = float(np.sum(r2 * rho)) * g.cell
    llogl = float(np.sum(np.abs(xlogx(rho)))) * g.cell
    kinetic = 0.5 * gradient_sq_norms(f.values, g, hat)
    E, Eeps = energies(f, hat)
    return DiagnosticsRecord(t=float(f.t), mass=mass, energy=E, energy_eps=Eeps,
                             J=momentum(f, hat), I2=centers, second_moment=second,
                             llogl=llogl, kinetic=kinetic)


moments = compute_record


def write_records_csv(records: Sequence[DiagnosticsRecord], path) -> None:
    """One row per record; columns fixed by the first record, floats in repr form."""
    if not records:
        raise InvalidArgument("no records to write")
    rows = [r.row() for r in records]
    header = list(rows[0])
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(row[k])) for k in header])
    except OSError as exc:
        raise OSError(f"cannot write diagnostics to {path}: {exc}") from exc


# -- frames ------------------------------------------------------------------

def gamma_norm_sq(d2: int) -> float:
    """||exp(-|y|^2/2)||^2 in d2 dimensions."""
    return math.pi ** (d2 / 2)


def rescaled_axes(potential, regime: str) -> tuple[bool, ...]:
    if regime in ("free", "repulsive"):
        return (True,) * potential.d
    if regime == "partial":
        return tuple(s == 0 for s in potential.signs)
    raise InvalidArgument(f"unknown regime {regime!r}")


def rescale_u_to_v(f: WaveField, traj, regime: str, target: Grid | None = None,
                   u0_norm: float | None = None) -> WaveField:
    """v(t, x', y) = tau^(p/2) u(t, x', y tau) exp(-i (tau'/tau) |y tau|^2 / 2) * c

    c = ||gamma|| / ||u0|| for the free and partial regimes and 1 for the
    repulsive one; p is the number of rescaled axes.  The time-only phase
    that the rescaled equation drops is not applied (see ``frame_phase``).
    Sampling at y tau uses the trigonometric interpolant of u.
    """
    if f.is_rescaled:
        raise InvalidArgument("field is already rescaled")
    flags = rescaled_axes(f.potential, regime)
    target = target or f.grid
    if target.ndim != f.grid.ndim:
        raise InvalidArgument("target grid dimension mismatch")
    for j, flag in enumerate(flags):
        if not flag and (target.N[j] != f.grid.N[j] or target.L[j] != f.grid.L[j]):
            raise InvalidArgument("confined axes must keep the physical grid")
    tau, tau_dot = traj.at(f.t)
    p = sum(flags)
    vals = f.values
    for j, flag in enumerate(flags):
        if flag:
            pts = target.axis(j) * tau
            try:
                vals = fourier_interpolate(vals, f.grid, j, pts)
            except ResolutionError as exc:
                raise ResolutionError(f"y*tau exceeds the physical box on axis {j}") from exc
    chirp = 0.0
    for j, flag in enumerate(flags):
        if flag:
            x = target.coord(j) * tau
            chirp = chirp + x * x
    vals = tau ** (p / 2) * vals * np.exp(-0.5j * (tau_dot / tau) * chirp)
    if regime != "repulsive":
        norm = f.norm() if u0_norm is None else u0_norm
        vals = vals * math.sqrt(gamma_norm_sq(p)) / norm
    frame = RescaledFrame(traj, flags, regime)
    return WaveField(target, vals, f.lam, f.potential, t=f.t, epsilon=default_epsilon(vals),
                     frame=frame)


def frame_phase(traj, t: float, p: int, lam: float, norm_ratio: float = 1.0) -> float:
    """Theta(t) = int_0^t lam (2 ln c - p ln tau(s)) ds with c = ||u0|| / ||gamma||.

    rescale_u_to_v(u)(t) = w(t) exp(-i Theta(t)) where w solves the
    rescaled equation without the time-only term.
    """
    times = traj.times
    k = int(np.searchsorted(times, t, side="right"))
    ts = np.append(times[:k], t) if times[k - 1] < t else times[:k]
    logs = np.log([traj.at(s)[0] for s in ts]) if ts[-1] != times[k - 1] else np.log(traj.tau[:k])
    integral = float(np.sum((logs[1:] + logs[:-1]) / 2 * np.diff(ts))) if ts.size > 1 else 0.0
    return lam * (2 * math.log(norm_ratio) * t - p * integral)


def marginal_density(f: WaveField, traj=None, regime: str | None = None,
                     target: Grid | None = None):
    """rho(t, y) = int |v(t, x', y)|^2 dx', normalized so int rho dy = pi^(d2/2).

    Physical fields are first mapped to v (needs ``traj`` and ``regime``).
    Returns (y_axes, rho) with rho shaped over the rescaled axes.
    """
    if not f.is_rescaled:
        if traj is None or regime is None:
            raise InvalidArgument("physical fields need traj and regime")
        f = rescale_u_to_v(f, traj, regime, target)
    flags = f.frame.rescaled
    g = f.grid
    conf = tuple(j for j, flag in enumerate(flags) if not flag)
    dens = f.density()
    rho = dens.sum(axis=conf) * float(np.prod([g.h[j] for j in conf])) if conf else dens.copy()
    d2 = sum(flags)
    y_cell = float(np.prod([g.h[j] for j, flag in enumerate(flags) if flag]))
    rho = rho * gamma_norm_sq(d2) / (float(rho.sum()) * y_cell)
    axes = [g.axis(j) for j, flag in enumerate(flags) if flag]
    return axes, rho


def marginal_current(f: WaveField) -> np.ndarray:
    """j(t, y) = int Im(conj(v) grad_y v) dx', stacked over rescaled axes."""
    if not f.is_rescaled:
        raise InvalidArgument("marginal current is defined for rescaled-frame fields")
    g = f.grid
    flags = f.frame.rescaled
    conf = tuple(j for j, flag in enumerate(flags) if not flag)
    hx = float(np.prod([g.h[j] for j in conf])) if conf else 1.0
    hat = fftn(f.values)
    conj = np.conj(f.values)
    out = []
    for j, flag in enumerate(flags):
        if flag:
            J2 = (conj * gradient(f.values, g, j, hat)).imag
            out.append(J2.sum(axis=conf) * hx if conf else J2)
    return np.stack(out)


# -- distances and inequalities ---------------------------------------------

def _cumulative_trapezoid(p, dx):
    out = np.empty_like(p, dtype=float)
    out[0] = 0.0
    np.cumsum((p[1:] + p[:-1]) * (dx / 2), out=out[1:])
    return out


def wasserstein1_1d(p, q, dx: float, normalize: bool = False, tol: float = 1e-9) -> float:
    """W1 between two densities on the same uniform axis: int |P - Q| dx.

    CDFs are cumulative trapezoid integrals.  Both inputs must be
    probability densities (trapezoid mass 1 within ``tol``) unless
    ``normalize`` is set.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise InvalidArgument("densities must be 1-D arrays on the same axis")
    if (p < 0).any() or (q < 0).any():
        raise InvalidArgument("densities must be non-negative")
    mp = float(np.sum((p[1:] + p[:-1]) * (dx / 2)))
    mq = float(np.sum((q[1:] + q[:-1]) * (dx / 2)))
    if normalize:
        p, q = p / mp, q / mq
        mp = mq = 1.0
    if abs(mp - 1) > tol or abs(mq - 1) > tol:
        raise MassMismatch(f"densities are not probability densities (masses {mp!r}, {mq!r})")
    diff = np.abs(_cumulative_trapezoid(p, dx) - _cumulative_trapezoid(q, dx))
    return float(np.sum((diff[1:] + diff[:-1]) * (dx / 2)))


def wasserstein1_marginals(p: np.ndarray, q: np.ndarray, grid: Grid, normalize: bool = True) -> np.ndarray:
    """Axis-wise W1 between the 1-D marginals of two densities on ``grid``."""
    out = np.empty(grid.ndim)
    for j in range(grid.ndim):
        other = tuple(i for i in range(grid.ndim) if i != j)
        w = float(np.prod([grid.h[i] for i in other])) if other else 1.0
        pm = p.sum(axis=other) * w if other else p
        qm = q.sum(axis=other) * w if other else q
        out[j] = wasserstein1_1d(pm, qm, grid.h[j], normalize=normalize)
    return out


class LogSobResult(NamedTuple):
    residual: float
    a_star: float
    residual_at_a_star: float


def _logsob(rho, r2, cell, d, a):
    mass = float(rho.sum()) * cell
    m2 = float(np.sum(r2 * rho)) * cell
    ent = float(np.sum(xlogx(rho))) * cell - mass * math.log(mass)
    return a * m2 + d / 2 * mass * math.log(math.pi / a) + ent, mass, m2


def dual_logsob_residual(f, grid: Grid, a: float, density: bool = False) -> LogSobResult:
    """a int|x|^2|f|^2 + (d/2)||f||^2 ln(pi/a) + int |f|^2 ln(|f|^2/||f||^2)  (>= 0).

    Also evaluates the residual at a* = (d/2)||f||^2 / int|x|^2|f|^2, the
    minimizer over a.  Pass ``density=True`` when ``f`` already is |f|^2.
    """
    if not a > 0:
        raise InvalidArgument("a must be positive")
    f = np.asarray(f)
    rho = f.astype(float) if density else (np.abs(f) ** 2)
    if rho.shape != grid.shape:
        raise InvalidArgument("field shape does not match the grid")
    r2 = sum(x * x for x in grid.coords())
    res, mass, m2 = _logsob(rho, r2, grid.cell, grid.ndim, a)
    if not mass > 0:
        raise InvalidArgument("zero field")
    a_star = grid.ndim / 2 * mass / m2
    res_star, _, _ = _logsob(rho, r2, grid.cell, grid.ndim, a_star)
    return LogSobResult(res, a_star, res_star)


def relative_entropy_and_ck(mu, nu, cell: float, floor: float = LOG_FLOOR,
                            tol: float = 1e-8) -> tuple[float, float]:
    """(KL(mu || nu), 2 KL - ||mu - nu||_L1^2); the second is >= 0 by Csiszar-Kullback."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise InvalidArgument("densities must share the grid")
    for name, arr in (("mu", mu), ("nu", nu)):
        m = float(arr.sum()) * cell
        if abs(m - 1) > tol:
            raise MassMismatch(f"{name} has mass {m!r}, expected a probability density")
    if np.any((mu > floor) & (nu <= floor)):
        raise InvalidArgument("nu vanishes where mu does not")
    live = mu > 0
    kl = float(np.sum(mu[live] * (np.log(mu[live]) - np.log(np.maximum(nu[live], floor))))) * cell
    l1 = float(np.sum(np.abs(mu - nu))) * cell
    return kl, 2 * kl - l1 * l1
