"""Strang split-step Fourier solver for the regularized logNLS

    i u_t + 1/2 Lap u = V u + lam ln(eps + |u|^2) u

in the physical frame, and for the rescaled unknown v

    i v_t + 1/2 Lap_x' v + 1/(2 tau^2) Lap_y v = lam ln|v|^2 v + (w^2|x'|^2/2 + lam|y|^2) v

Each step is phase(dt/2) -> kinetic(dt) -> phase(dt/2).  The phase
substep is the exact flow of the potential + nonlinear part because that
flow leaves |u| unchanged pointwise; the kinetic substep is the exact
free propagator in Fourier space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import grid as _grid
from .errors import CoverageError, InvalidArgument, NumericalBlowup, ResolutionError
from .grid import Grid, WaveField
from .potentials import PotentialSpec

# densities below this are clamped before the log when eps = 0
DENSITY_CLAMP = 1e-300
BOUNDARY_GUARD = 1e-10


def log_density(dens: np.ndarray, epsilon: float) -> np.ndarray:
    if epsilon > 0:
        return np.log(epsilon + dens)
    return np.log(np.maximum(dens, DENSITY_CLAMP))


@lru_cache(maxsize=32)
def _physical_operators(grid: Grid, potential: PotentialSpec, dt: float):
    V = potential.on_grid(grid.coords())
    V = np.broadcast_to(V, grid.shape).copy()
    ksq = sum(grid.k(j) ** 2 for j in range(grid.ndim))
    kinetic = np.exp(-0.5j * dt * ksq)
    return V, kinetic


@lru_cache(maxsize=32)
def _rescaled_operators(grid: Grid, potential: PotentialSpec, lam: float, rescaled: tuple):
    W = 0.0
    k_conf = 0.0
    k_resc = 0.0
    for j, (x, flag) in enumerate(zip(grid.coords(), rescaled)):
        if flag:
            W = W + lam * x * x
            k_resc = k_resc + grid.k(j) ** 2
        else:
            s, w = potential.signs[j], potential.omegas[j]
            if s < 0:
                raise InvalidArgument("repulsive axes must be rescaled in a rescaled frame")
            W = W + s * w * w * x * x / 2
            k_conf = k_conf + grid.k(j) ** 2
    W = np.broadcast_to(np.asarray(W, dtype=float), grid.shape).copy()
    k_conf = np.broadcast_to(np.asarray(k_conf, dtype=float), grid.shape).copy()
    k_resc = np.broadcast_to(np.asarray(k_resc, dtype=float), grid.shape).copy()
    return W, k_conf, k_resc


def _check(values, what, step):
    if not np.isfinite(values).all():
        raise NumericalBlowup(f"non-finite values after {what}", step)


def _phase(values, pot, lam, epsilon, half_dt):
    dens = values.real**2 + values.imag**2
    theta = half_dt * (pot + lam * log_density(dens, epsilon))
    return values * np.exp(-1j * theta)


def split_step(field: WaveField, dt: float, step: int = 0) -> WaveField:
    """One Strang step of the physical-frame equation."""
    if not dt > 0:
        raise InvalidArgument("dt must be positive")
    if field.is_rescaled:
        return split_step_rescaled(field, dt, step)
    V, kin = _physical_operators(field.grid, field.potential, float(dt))
    u = _phase(field.values, V, field.lam, field.epsilon, dt / 2)
    _check(u, "first phase substep", step)
    u = _grid.ifftn(_grid.fftn(u) * kin)
    _check(u, "kinetic substep", step)
    u = _phase(u, V, field.lam, field.epsilon, dt / 2)
    _check(u, "second phase substep", step)
    return field.with_values(u, t=field.t + dt)


def split_step_rescaled(field: WaveField, dt: float, step: int = 0) -> WaveField:
    """One Strang step in the rescaled frame; tau is taken at the step midpoint."""
    if not field.is_rescaled:
        raise InvalidArgument("field is not in a rescaled frame")
    frame = field.frame
    if not frame.traj.covers(field.t, field.t + dt):
        raise CoverageError(f"tau trajectory does not span [{field.t}, {field.t + dt}]")
    W, k_conf, k_resc = _rescaled_operators(field.grid, field.potential, float(field.lam), frame.rescaled)
    tau_mid, _ = frame.traj.at(field.t + dt / 2)
    kin = np.exp(-0.5j * dt * (k_conf + k_resc / tau_mid**2))
    v = _phase(field.values, W, field.lam, field.epsilon, dt / 2)
    _check(v, "first phase substep", step)
    v = _grid.ifftn(_grid.fftn(v) * kin)
    _check(v, "kinetic substep", step)
    v = _phase(v, W, field.lam, field.epsilon, dt / 2)
    _check(v, "second phase substep", step)
    return field.with_values(v, t=field.t + dt)


def step_count(t_end: float, dt: float) -> tuple[int, float]:
    """Number of steps and the (possibly shrunk) step landing exactly on t_end."""
    if t_end < 0 or not dt > 0:
        raise InvalidArgument("need t_end >= 0 and dt > 0")
    if t_end == 0:
        return 0, dt
    n = max(1, math.ceil(t_end / dt - 1e-9))
    return n, t_end / n


Hook = Callable[[WaveField], dict]


def run(field: WaveField, t_end: float, dt: float, save_every: int = 1,
        hooks: Sequence[Hook] = (), guard_boundary: bool | None = None,
        record: bool = True):
    """Step ``field`` to ``field.t + t_end``.

    Diagnostics are evaluated at the start, every ``save_every`` steps and
    at the end.  Each hook maps a field to a dict merged into the record's
    ``extra``.  ``guard_boundary`` (default: on for physical repulsive or
    saddle potentials) aborts when boundary density exceeds 1e-10 of peak.

    Returns (final_field, records).
    """
    from .diagnostics import compute_record

    if save_every < 1:
        raise InvalidArgument("save_every must be >= 1")
    n, h = step_count(t_end, dt)
    if guard_boundary is None:
        guard_boundary = (not field.is_rescaled
                          and field.potential.classify() in ("repulsive", "saddle"))
    t0 = field.t
    records = []

    def save(f):
        if guard_boundary:
            frac = _grid.boundary_fraction(f.values, f.grid)
            if frac > BOUNDARY_GUARD:
                raise ResolutionError(f"boundary density {frac:.2e} of peak at t={f.t:.6g}")
        if record:
            rec = compute_record(f)
            for hook in hooks:
                rec.extra.update(hook(f))
            records.append(rec)

    save(field)
    cur = field
    for i in range(n):
        cur = split_step(cur, h, step=i + 1)
        cur.t = t0 + (i + 1) * h
        if (i + 1) % save_every == 0 or i + 1 == n:
            save(cur)
    return cur, records


@dataclass
class StabilityReport:
    times: np.ndarray
    ratio: np.ndarray
    bound: np.ndarray

    @property
    def worst(self) -> float:
        """max over samples after t = 0 of ratio / bound (<= 1 means the bound holds)."""
        q = self.ratio / self.bound
        return float(np.max(q[1:] if q.size > 1 else q))


def l2_stability_probe(u0: WaveField, w0: np.ndarray, t_end: float, dt: float,
                       save_every: int = 1) -> StabilityReport:
    """Evolve u0 and u0 + w0 side by side and compare ||w(t)|| / ||w0|| with exp(4 lam t)."""
    if not u0.lam > 0:
        raise InvalidArgument("the L2 doubling bound is stated for lambda > 0")
    w0 = np.asarray(w0, dtype=complex)
    n, h = step_count(t_end, dt)
    a, b = u0, u0.with_values(u0.values + w0)
    cell = u0.grid.cell
    w_norm0 = math.sqrt(float(np.sum(np.abs(w0) ** 2)) * cell)
    times, ratios = [0.0], [1.0]
    for i in range(n):
        a = split_step(a, h, step=i + 1)
        b = split_step(b, h, step=i + 1)
        if (i + 1) % save_every == 0 or i + 1 == n:
            t = (i + 1) * h
            diff = math.sqrt(float(np.sum(np.abs(b.values - a.values) ** 2)) * cell)
            times.append(t)
            ratios.append(diff / w_norm0 if w_norm0 > 0 else 1.0)
    times = np.array(times)
    return StabilityReport(times, np.array(ratios), np.exp(4 * u0.lam * times))


def scaling_probe(field: WaveField, k: complex, t_end: float, dt: float) -> float:
    """L2 distance between u_k(t) and k u(t) exp(-i lam t ln|k|^2).

    The scaled run uses eps |k|^2 so that the regularized equation keeps
    the invariance exactly.
    """
    k = complex(k)
    if k == 0:
        raise InvalidArgument("k must be nonzero")
    scaled = field.with_values(k * field.values)
    scaled.epsilon = field.epsilon * abs(k) ** 2
    u, _ = run(field, t_end, dt, record=False)
    uk, _ = run(scaled, t_end, dt, record=False)
    pred = k * u.values * np.exp(-1j * field.lam * t_end * math.log(abs(k) ** 2))
    return math.sqrt(float(np.sum(np.abs(uk.values - pred) ** 2)) * field.grid.cell)
