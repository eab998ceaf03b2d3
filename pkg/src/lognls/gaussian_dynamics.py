"""Exact Gaussian solutions under quadratic potentials.

A Gaussian u = b prod_j exp(-a_j x_j**2 / 2) stays Gaussian, with

    i b' = (sum_j a_j / 2) b + lam b ln|b|**2
    i a_j' = a_j**2 + 2 lam Re a_j - Omega_j

The amplitude is integrated through beta = ln b, whose equation is linear
in beta once the widths are known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import InvalidArgument, LossOfIntegrability

if TYPE_CHECKING:
    from .potentials import PotentialSpec


@dataclass(frozen=True)
class GaussianState:
    """u(x) = b prod_j exp(-a_j (x_j - q_j)**2 / 2 + i p_j (x_j - q_j))."""

    a: np.ndarray
    b: complex
    q: np.ndarray = field(default=None)
    p: np.ndarray = field(default=None)
    t: float = 0.0

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", complex(self.b))
        for name in ("q", "p"):
            val = getattr(self, name)
            val = np.zeros(a.size) if val is None else np.atleast_1d(np.asarray(val, dtype=float))
            if val.shape != a.shape:
                raise InvalidArgument(f"{name} must have one entry per axis")
            object.__setattr__(self, name, val)

    @property
    def d(self) -> int:
        return self.a.size

    @property
    def centered(self) -> bool:
        return not (self.q.any() or self.p.any())

    def mass(self) -> float:
        return abs(self.b) ** 2 * float(np.prod(np.sqrt(np.pi / self.a.real)))

    def evaluate(self, coords) -> np.ndarray:
        """Values on broadcastable coordinate arrays (one per axis)."""
        expo = 0.0
        for x, a, q, p in zip(coords, self.a, self.q, self.p):
            y = x - q
            expo = expo - a * y * y / 2 + 1j * p * y
        return self.b * np.exp(expo)

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return (np.array_equal(self.a, other.a) and self.b == other.b
                and np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)
                and self.t == other.t)

    __hash__ = None


@dataclass
class GaussianSeries:
    times: np.ndarray
    a: np.ndarray  # shape (n, d)
    b: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> GaussianState:
        return GaussianState(a=self.a[i], b=self.b[i], t=float(self.times[i]))

    def mass(self) -> np.ndarray:
        return np.abs(self.b) ** 2 * np.prod(np.sqrt(np.pi / self.a.real), axis=1)


def widths_from_tau(tau: float, tau_dot: float) -> complex:
    """a = 1/tau**2 - i tau'/tau."""
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    return complex(1 / tau**2, -tau_dot / tau)


def tau_from_width(alpha: complex) -> tuple[float, float]:
    """Inverse of widths_from_tau: tau0 = 1/sqrt(Re a), tau1 = -Im a / sqrt(Re a)."""
    alpha = complex(alpha)
    if not alpha.real > 0:
        raise InvalidArgument("Re a must be positive")
    root = math.sqrt(alpha.real)
    return 1 / root, -alpha.imag / root


def integrate_gaussian(init: GaussianState, spec: "PotentialSpec", lam: float,
                       t_end: float, dt: float) -> GaussianSeries:
    """RK4 on (a_1..a_d, ln b); grid uniform in t, last node exactly at t_end."""
    if not init.centered:
        raise InvalidArgument("integrate_gaussian needs a centered state; boost afterwards")
    if spec.d != init.d:
        raise InvalidArgument("state and potential dimensions differ")
    if spec.has_linear:
        raise InvalidArgument("linear potential terms are not supported by the Gaussian ODEs")
    if not (dt > 0 and t_end >= 0):
        raise InvalidArgument("dt must be positive and t_end non-negative")
    if init.b == 0:
        raise InvalidArgument("zero amplitude has no logarithm")
    Om = np.asarray(spec.curvatures, dtype=float)
    d = init.d

    def rhs(y):
        a = y[:d]
        out = np.empty_like(y)
        out[:d] = -1j * (a * a + 2 * lam * a.real - Om)
        out[d] = -1j * (a.sum() / 2 + 2 * lam * y[d].real)
        return out

    n = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / n if n else 0.0
    y = np.concatenate([init.a, [np.log(init.b)]])
    ys = np.empty((n + 1, d + 1), dtype=complex)
    ys[0] = y
    for i in range(n):
        k1 = rhs(y)
        k2 = rhs(y + h / 2 * k1)
        k3 = rhs(y + h / 2 * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(y[:d].real > 0):
            raise LossOfIntegrability(f"Re a <= 0 at step {i + 1}; reduce dt")
        ys[i + 1] = y
    times = init.t + h * np.arange(n + 1)
    return GaussianSeries(times, ys[:, :d].copy(), np.exp(ys[:, d]))


def _boost_kinematics(v: float, regime: str, t: float, omega: float | None):
    """Displacement, momentum and phase of the 1-D Galilean-type boosts."""
    if regime == "free":
        return v * t, v, v * v * t / 2
    if omega is None or not omega > 0:
        raise InvalidArgument(f"regime {regime!r} needs omega > 0")
    w = omega
    if regime == "confining":
        c, s = math.cos(w * t), math.sin(w * t)
    elif regime == "repulsive":
        c, s = math.cosh(w * t), math.sinh(w * t)
    else:
        raise InvalidArgument(f"unknown boost regime {regime!r}")
    return v * s / w, v * c, v * v * c * s / (2 * w)


def galilean_boost(obj, v: float, regime: str, t: float, omega: float | None = None, axis: int = 0):
    """Apply the boost  u(t, x - q) exp(i p x - i phi)  along one axis at time t.

    free:      q = v t,              p = v,             phi = v**2 t / 2
    confining: q = v sin(wt)/w,      p = v cos(wt),     phi = v**2 cos sin / (2w)
    repulsive: q = v sinh(wt)/w,     p = v cosh(wt),    phi = v**2 cosh sinh / (2w)

    Works on GaussianState (updates q, p and the phase of b) and on
    WaveField (Fourier translation, then phase multiplication).
    """
    q_b, p_b, phi = _boost_kinematics(v, regime, t, omega)
    if v == 0:
        return obj
    if isinstance(obj, GaussianState):
        if not 0 <= axis < obj.d:
            raise InvalidArgument("axis out of range")
        q = obj.q.copy()
        p = obj.p.copy()
        q[axis] += q_b
        p[axis] += p_b
        b = obj.b * np.exp(1j * (p_b * q[axis] - phi))
        return replace(obj, q=q, p=p, b=complex(b))
    from .grid import WaveField, translate

    if isinstance(obj, WaveField):
        shifted = translate(obj.values, obj.grid, axis, q_b)
        x = obj.grid.coord(axis)
        return obj.with_values(shifted * np.exp(1j * (p_b * x - phi)))
    raise InvalidArgument(f"cannot boost object of type {type(obj).__name__}")


def tensor_product(states: Sequence[GaussianState]) -> GaussianState:
    if not states:
        raise InvalidArgument("need at least one factor")
    b = 1.0 + 0j
    for s in states:
        b *= s.b
    return GaussianState(
        a=np.concatenate([s.a for s in states]),
        b=b,
        q=np.concatenate([s.q for s in states]),
        p=np.concatenate([s.p for s in states]),
        t=states[0].t,
    )
