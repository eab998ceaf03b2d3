"""The tau-oscillator family  tau'' = 2 lam / tau + [cubic] / tau**3 - Omega tau.

Gaussian widths and the universal dispersion rates are all driven by
members of this family:

* ``Omega = 0``, no cubic term, data (1, 0): the free dispersion rate
  tau(t) ~ 2 t sqrt(lam ln t);
* ``Omega = omega**2``: bounded, periodic widths (breathers, Gaussons);
* ``Omega = -omega**2``: exponential growth tau ~ mu_inf exp(omega t).

Integration is classical RK4 on a fixed grid, either uniform in t or
uniform in the log clock s = ln(1 + t / c), which keeps long free runs
(t ~ 1e6) and steep repulsive starts (large tau'(0)) cheap while staying
fixed-step and deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import CoverageError, InvalidArgument, SingularityError, ToleranceNotMet

SWITCH_THRESHOLD = 1e100


@dataclass(frozen=True)
class TauParams:
    lam: float
    Omega: float
    include_cubic: bool = True
    tau0: float = 1.0
    tau1: float = 0.0

    def __post_init__(self):
        if not self.tau0 > 0:
            raise InvalidArgument(f"tau0 must be positive, got {self.tau0}")

    @property
    def cubic(self) -> float:
        return 1.0 if self.include_cubic else 0.0

    @property
    def omega(self) -> float:
        """Repulsive frequency sqrt(-Omega); only meaningful for Omega < 0."""
        return math.sqrt(-self.Omega) if self.Omega < 0 else 0.0

    def accel(self, tau):
        return 2 * self.lam / tau + self.cubic / tau**3 - self.Omega * tau

    def first_integral_constant(self) -> float:
        t0, t1 = self.tau0, self.tau1
        return t1 * t1 - 4 * self.lam * math.log(t0) + self.cubic / t0**2 + self.Omega * t0 * t0


@dataclass
class TauTrajectory:
    times: np.ndarray
    tau: np.ndarray
    tau_dot: np.ndarray
    C0: float
    params: TauParams
    mu: np.ndarray | None = None
    clock_scale: float | None = None
    _splines: tuple | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.times)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def covers(self, t0: float, t1: float) -> bool:
        slack = 1e-12 * max(1.0, abs(self.t_end))
        return self.times[0] - slack <= t0 and t1 <= self.t_end + slack

    def at(self, t: float) -> tuple[float, float]:
        """Cubic Hermite interpolation of (tau, tau_dot) at time t."""
        if not self.covers(t, t):
            raise CoverageError(f"t={t} outside tau trajectory [{self.times[0]}, {self.t_end}]")
        if self._splines is None:
            ok = np.isfinite(self.tau)
            tt = self.times[ok]
            self._splines = (
                CubicHermiteSpline(tt, self.tau[ok], self.tau_dot[ok]),
                CubicHermiteSpline(tt, self.tau_dot[ok], self.params.accel(self.tau[ok])),
            )
        s_tau, s_dot = self._splines
        t = min(max(t, self.times[0]), self.t_end)
        return float(s_tau(t)), float(s_dot(t))


def _rk4_step(f, t, x, v, h):
    k1x, k1v = f(t, x, v)
    k2x, k2v = f(t + h / 2, x + h / 2 * k1x, v + h / 2 * k1v)
    k3x, k3v = f(t + h / 2, x + h / 2 * k2x, v + h / 2 * k2v)
    k4x, k4v = f(t + h, x + h * k3x, v + h * k3v)
    return (x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
            v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _even_steps(span, dt):
    # an even count lets the quadrature of mu_inf compare h and 2h rules
    n = max(2, math.ceil(span / dt - 1e-9))
    return n + (n % 2)


def integrate_tau(params: TauParams, t_end: float, dt: float, *, log_clock: bool = False,
                  clock_scale: float = 1.0, switch_threshold: float = SWITCH_THRESHOLD) -> TauTrajectory:
    """Integrate the tau ODE with fixed-step RK4.

    With ``log_clock=False`` the grid is uniform in t with step ``dt``
    (shrunk so the last node lands on ``t_end`` after an even number of
    steps).  With ``log_clock=True``
    the grid is uniform in s = ln(1 + t / clock_scale) and ``dt`` is the
    step in s.

    In the repulsive case the unknown switches to mu = tau exp(-omega t)
    once tau exceeds ``switch_threshold``; ``traj.mu`` is always filled
    for Omega < 0.
    """
    if not (dt > 0 and t_end > 0):
        raise InvalidArgument("dt and t_end must be positive")
    lam, Om, c = params.lam, params.Omega, params.cubic
    omega = params.omega

    def f_tau(t, x, v):
        return v, 2 * lam / x + c / x**3 - Om * x

    def f_mu(t, x, v):
        e2 = math.exp(-2 * omega * t)
        return v, -2 * omega * v + 2 * lam * e2 / x + c * e2 * e2 / x**3

    if log_clock:
        if not clock_scale > 0:
            raise InvalidArgument("clock_scale must be positive")
        s_end = math.log1p(t_end / clock_scale)
        n = _even_steps(s_end, dt)
        h = s_end / n

        def to_t(s):
            return clock_scale * math.expm1(s)

        def wrap(f):
            def g(s, x, v):
                t = to_t(s)
                jac = t + clock_scale
                fx, fv = f(t, x, v)
                return jac * fx, jac * fv
            return g
    else:
        n = _even_steps(t_end, dt)
        h = t_end / n

        def to_t(s):
            return s

        def wrap(f):
            return f

    g_tau, g_mu = wrap(f_tau), wrap(f_mu)
    times = np.empty(n + 1)
    tau = np.empty(n + 1)
    tau_dot = np.empty(n + 1)
    mu = np.empty(n + 1) if Om < 0 else None

    x, v = params.tau0, params.tau1
    in_mu = False
    times[0], tau[0], tau_dot[0] = 0.0, x, v
    if mu is not None:
        mu[0] = x
    for i in range(n):
        s = i * h
        if in_mu:
            x, v = _rk4_step(g_mu, s, x, v, h)
        else:
            x, v = _rk4_step(g_tau, s, x, v, h)
        t = to_t((i + 1) * h)
        if in_mu:
            growth = math.exp(omega * t) if omega * t < 709 else math.inf
            times[i + 1], mu[i + 1] = t, x
            tau[i + 1] = x * growth
            tau_dot[i + 1] = (v + omega * x) * growth
            continue
        step_t = t - times[i]
        if not (x > step_t) or not math.isfinite(x):
            raise SingularityError(f"tau={x:.3e} reached the singular threshold at t={t:.6g}", t=t)
        times[i + 1], tau[i + 1], tau_dot[i + 1] = t, x, v
        if mu is not None:
            mu[i + 1] = x * math.exp(-omega * t)
            if x > switch_threshold:
                in_mu = True
                x, v = mu[i + 1], (v - omega * x) * math.exp(-omega * t)
    return TauTrajectory(times, tau, tau_dot, params.first_integral_constant(), params, mu,
                         clock_scale if log_clock else None)


def first_integral_residual(traj: TauTrajectory, relative: bool = False) -> np.ndarray:
    """Pointwise (tau')**2 - (C0 + 4 lam ln tau - [cubic]/tau**2 - Omega tau**2).

    ``relative=True`` divides by max(1, sum of the magnitudes of the terms),
    which is the meaningful quantity once tau grows exponentially.
    Points where tau overflowed are returned as nan.
    """
    p = traj.params
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        tau, td = traj.tau, traj.tau_dot
        lhs = td * td
        terms = (traj.C0, 4 * p.lam * np.log(tau), -p.cubic / tau**2, -p.Omega * tau * tau)
        res = lhs - (terms[0] + terms[1] + terms[2] + terms[3])
        if relative:
            scale = np.abs(lhs) + sum(np.abs(term) for term in terms)
            res = res / np.maximum(1.0, scale)
    res = np.where(np.isfinite(tau), res, np.nan)
    return res


class FreeRate(NamedTuple):
    times: np.ndarray
    tau_ratio: np.ndarray
    tau_dot_ratio: np.ndarray


def free_rate_check(traj: TauTrajectory) -> FreeRate:
    """tau / (2 t sqrt(lam ln t)) and tau' / (2 sqrt(lam ln t)) for t > e."""
    p = traj.params
    if p.Omega != 0 or p.include_cubic:
        raise InvalidArgument("free rate check needs Omega = 0 and no cubic term")
    if not p.lam > 0:
        raise InvalidArgument("free rate check needs lambda > 0")
    keep = traj.times > math.e
    t = traj.times[keep]
    root = np.sqrt(p.lam * np.log(t))
    return FreeRate(t, traj.tau[keep] / (2 * t * root), traj.tau_dot[keep] / (2 * root))


class MuInfinity(NamedTuple):
    value: float
    tolerance: float
    converged: bool


def _require_repulsive(traj: TauTrajectory) -> float:
    if not traj.params.Omega < 0 or traj.mu is None:
        raise InvalidArgument("mu_infinity needs a repulsive trajectory (Omega < 0)")
    return traj.params.omega


def mu_infinity_limit(traj: TauTrajectory, tol: float = 1e-9) -> MuInfinity:
    """mu(t_end) with mu = tau exp(-omega t).

    Converged if |mu(T) - mu(T/2)| <= tol * max(1, mu(T)); the difference
    is returned as the tolerance.
    """
    _require_repulsive(traj)
    half = int(np.searchsorted(traj.times, traj.t_end / 2))
    residual = abs(float(traj.mu[-1] - traj.mu[half]))
    if residual > tol * max(1.0, abs(float(traj.mu[-1]))):
        raise ToleranceNotMet("mu(t) has not converged", residual)
    return MuInfinity(float(traj.mu[-1]), residual, True)


def _integral_samples(traj: TauTrajectory, omega: float):
    """g(t) = exp(-omega t) F(tau) on the stored grid, evaluated through mu."""
    p = traj.params
    t, mu = traj.times, traj.mu
    e2 = np.exp(-2 * omega * t)
    return 2 * p.lam * e2 / mu + p.cubic * e2 * e2 / mu**3


def _integral_slope(traj: TauTrajectory, omega: float, i: int) -> float:
    p = traj.params
    tau, td, t = traj.tau[i], traj.tau_dot[i], traj.times[i]
    if not math.isfinite(tau):
        return 0.0
    F = 2 * p.lam / tau + p.cubic / tau**3
    dF = -2 * p.lam / tau**2 - 3 * p.cubic / tau**4
    return math.exp(-omega * t) * (-omega * F + dF * td)


def _corrected_trapezoid(G, h, dG0, dGN):
    return h * (G.sum() - (G[0] + G[-1]) / 2) - h * h / 12 * (dGN - dG0)


def mu_infinity_integral(traj: TauTrajectory, tol: float = 1e-6) -> MuInfinity:
    """mu_inf = (tau0 + tau1/omega)/2 + (1/(2 omega)) int_0^inf exp(-omega r) F(tau(r)) dr

    with F = 2 lam / tau + [cubic] / tau**3.  The stored grid is integrated
    by the trapezoid rule with Euler-Maclaurin end corrections (uniform in
    the clock variable), and the tail beyond T uses tau ~ mu(T) exp(omega r).
    The reported tolerance is Richardson error estimate + tail size.
    """
    omega = _require_repulsive(traj)
    p = traj.params
    g = _integral_samples(traj, omega)
    n = len(traj) - 1
    if traj.clock_scale is None:
        h = traj.t_end / n
        jac = np.ones_like(g)
        G = g
        dG0 = _integral_slope(traj, omega, 0)
        dGN = _integral_slope(traj, omega, n)
    else:
        c = traj.clock_scale
        h = math.log1p(traj.t_end / c) / n
        jac = traj.times + c
        G = g * jac
        dG0 = jac[0] * (_integral_slope(traj, omega, 0) * jac[0] + g[0])
        dGN = jac[-1] * (_integral_slope(traj, omega, n) * jac[-1] + g[-1])
    quad = _corrected_trapezoid(G, h, dG0, dGN)
    if n % 2 == 0 and n >= 4:
        coarse = _corrected_trapezoid(G[::2], 2 * h, dG0, dGN)
        quad_err = abs(quad - coarse) / 15
    else:
        quad_err = abs(quad) * 1e-3
    # summation roundoff floor
    quad_err = max(quad_err, 4 * np.finfo(float).eps * math.sqrt(n) * h * float(np.abs(G).sum()))
    T, muT = traj.t_end, float(traj.mu[-1])
    tail = (p.lam * math.exp(-2 * omega * T) / (omega * muT)
            + p.cubic * math.exp(-4 * omega * T) / (4 * omega * muT**3))
    value = 0.5 * (p.tau0 + p.tau1 / omega) + (quad + tail) / (2 * omega)
    tolerance = (quad_err + tail) / (2 * omega)
    if tolerance > tol:
        raise ToleranceNotMet("mu_inf integral not resolved", tolerance)
    return MuInfinity(value, tolerance, True)


def tau_for_regime(regime: str, lam: float, omega: float = 0.0) -> TauParams:
    """tau used to build rescaled frames: free/partial use Omega = 0,
    repulsive uses Omega = -omega**2; both without the cubic term, data (1, 0)."""
    if regime in ("free", "partial"):
        return TauParams(lam=lam, Omega=0.0, include_cubic=False)
    if regime == "repulsive":
        return TauParams(lam=lam, Omega=-omega * omega, include_cubic=False)
    raise InvalidArgument(f"unknown rescaling regime {regime!r}")
