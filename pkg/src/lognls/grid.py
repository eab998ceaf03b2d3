"""Periodic rectangular grids, complex fields on them, and FFT helpers."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
import scipy.fft as sfft

from .errors import InvalidArgument, ResolutionError

if TYPE_CHECKING:
    from .potentials import PotentialSpec
    from .tau_ode import TauTrajectory

# Thread count handed to scipy.fft; results are bit-deterministic for a fixed value.
FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    global FFT_WORKERS
    if n < 1:
        raise InvalidArgument("thread count must be >= 1")
    FFT_WORKERS = int(n)


def fftn(a):
    return sfft.fftn(a, workers=FFT_WORKERS)


def ifftn(a):
    return sfft.ifftn(a, workers=FFT_WORKERS)


@dataclass(frozen=True)
class Grid:
    N: tuple[int, ...]
    L: tuple[float, ...]

    def __post_init__(self):
        N = tuple(int(n) for n in np.atleast_1d(self.N))
        L = tuple(float(x) for x in np.atleast_1d(self.L))
        if len(N) != len(L) or not N:
            raise InvalidArgument("N and L need one entry per axis")
        for n in N:
            if n < 8 or n & (n - 1):
                raise InvalidArgument(f"point counts must be powers of two >= 8, got {n}")
        if any(not x > 0 for x in L):
            raise InvalidArgument("box lengths must be positive")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)

    @property
    def ndim(self) -> int:
        return len(self.N)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.N

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.L, self.N))

    @property
    def cell(self) -> float:
        return float(np.prod(self.h))

    def axis(self, j: int) -> np.ndarray:
        """Centered 1-D coordinates on [-L/2, L/2)."""
        return (np.arange(self.N[j]) - self.N[j] // 2) * self.h[j]

    def wavenumbers(self, j: int) -> np.ndarray:
        """2 pi m / L in FFT order, m in [-N/2, N/2)."""
        return 2 * np.pi * np.fft.fftfreq(self.N[j], d=self.h[j])

    def _bshape(self, j):
        shape = [1] * self.ndim
        shape[j] = self.N[j]
        return tuple(shape)

    def coord(self, j: int) -> np.ndarray:
        """Axis j coordinates reshaped to broadcast against field arrays."""
        return self.axis(j).reshape(self._bshape(j))

    def coords(self) -> list[np.ndarray]:
        return [self.coord(j) for j in range(self.ndim)]

    def k(self, j: int) -> np.ndarray:
        return self.wavenumbers(j).reshape(self._bshape(j))

    def to_json(self) -> dict:
        return {"N": list(self.N), "L": list(self.L)}

    @classmethod
    def from_json(cls, obj) -> "Grid":
        return cls(tuple(obj["N"]), tuple(obj["L"]))


@dataclass(frozen=True)
class RescaledFrame:
    """The field stores v (rescaled unknown) instead of u.

    ``rescaled`` flags the y axes carrying the 1/(2 tau**2) kinetic
    coefficient and the lam |y|**2 potential; the remaining axes keep the
    physical confining potential.
    """

    traj: "TauTrajectory"
    rescaled: tuple[bool, ...]
    regime: str

    def __post_init__(self):
        object.__setattr__(self, "rescaled", tuple(bool(r) for r in self.rescaled))
        if self.regime not in ("free", "partial", "repulsive"):
            raise InvalidArgument(f"unknown rescaled regime {self.regime!r}")
        if not any(self.rescaled):
            raise InvalidArgument("a rescaled frame needs at least one rescaled axis")


PHYSICAL = "physical"


@dataclass
class WaveField:
    grid: Grid
    values: np.ndarray
    lam: float
    potential: "PotentialSpec"
    t: float = 0.0
    epsilon: float = 0.0
    frame: object = PHYSICAL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise InvalidArgument(f"values shape {self.values.shape} != grid {self.grid.shape}")
        if self.potential.d != self.grid.ndim:
            raise InvalidArgument("potential and grid dimensions differ")
        if self.epsilon < 0:
            raise InvalidArgument("epsilon must be >= 0")
        if self.frame != PHYSICAL:
            if not isinstance(self.frame, RescaledFrame):
                raise InvalidArgument(f"unknown frame {self.frame!r}")
            if len(self.frame.rescaled) != self.grid.ndim:
                raise InvalidArgument("frame axis flags must match the grid dimension")

    @property
    def is_rescaled(self) -> bool:
        return self.frame != PHYSICAL

    def with_values(self, values, t=None) -> "WaveField":
        return replace(self, values=values, t=self.t if t is None else t)

    def density(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2

    def mass(self) -> float:
        return float(self.density().sum() * self.grid.cell)

    def norm(self) -> float:
        return float(np.sqrt(self.mass()))


def default_epsilon(values, rel: float = 1e-12) -> float:
    """Regularization floor: rel times the peak density of the datum."""
    peak = float(np.max(np.abs(values) ** 2)) if np.size(values) else 0.0
    return rel * peak


def gradient(values: np.ndarray, grid: Grid, j: int, hat: np.ndarray | None = None) -> np.ndarray:
    """Spectral derivative along axis j (the Nyquist mode is zeroed)."""
    if hat is None:
        hat = fftn(values)
    k = grid.wavenumbers(j)
    if grid.N[j] % 2 == 0:
        k = k.copy()
        k[grid.N[j] // 2] = 0.0
    k = k.reshape(grid._bshape(j))
    return ifftn(1j * k * hat)


def gradient_sq_norms(values: np.ndarray, grid: Grid, hat: np.ndarray | None = None) -> np.ndarray:
    """Per-axis ||d_j u||**2 via Parseval: (cell / N_total) sum k_j**2 |u_hat|**2."""
    if hat is None:
        hat = fftn(values)
    power = hat.real**2 + hat.imag**2
    scale = grid.cell / power.size
    out = np.empty(grid.ndim)
    for j in range(grid.ndim):
        other = tuple(i for i in range(grid.ndim) if i != j)
        marginal = power.sum(axis=other) if other else power
        out[j] = float(np.dot(grid.wavenumbers(j) ** 2, marginal)) * scale
    return out


def translate(values: np.ndarray, grid: Grid, axis: int, shift: float) -> np.ndarray:
    """f(x - shift) along one axis by Fourier phase multiplication."""
    if shift == 0:
        return values.copy()
    hat = sfft.fft(values, axis=axis, workers=FFT_WORKERS)
    k = grid.k(axis)
    return sfft.ifft(hat * np.exp(-1j * k * shift), axis=axis, workers=FFT_WORKERS)


def fourier_interpolate(values: np.ndarray, grid: Grid, axis: int, points) -> np.ndarray:
    """Evaluate the trigonometric interpolant along ``axis`` at arbitrary points.

    The Nyquist coefficient is split evenly between +-k so that real data
    interpolates to real values.  Points outside [-L/2, L/2) raise.
    """
    points = np.asarray(points, dtype=float)
    half = grid.L[axis] / 2
    if points.size and (points.min() < -half - 1e-12 or points.max() > half + 1e-12):
        raise ResolutionError(f"interpolation points leave the box [-{half}, {half}) on axis {axis}")
    n = grid.N[axis]
    x0 = grid.axis(axis)[0]
    vals = np.moveaxis(np.asarray(values, dtype=complex), axis, 0)
    hat = sfft.fft(vals, axis=0, workers=FFT_WORKERS) / n
    k = grid.wavenumbers(axis)
    phase = np.exp(1j * np.outer(points - x0, k))
    nyq = n // 2
    phase[:, nyq] = np.cos(k[nyq] * (points - x0))
    flat = hat.reshape(n, -1)
    out = (phase @ flat).reshape((points.size,) + vals.shape[1:])
    return np.moveaxis(out, 0, axis)


def boundary_fraction(values: np.ndarray, grid: Grid, width: int = 2) -> float:
    """Max density within ``width`` cells of any face, relative to the peak."""
    dens = np.abs(values) ** 2
    peak = dens.max()
    if peak == 0:
        return 0.0
    worst = 0.0
    for j in range(grid.ndim):
        edge = np.concatenate([np.take(dens, range(width), axis=j).ravel(),
                               np.take(dens, range(grid.N[j] - width, grid.N[j]), axis=j).ravel()])
        worst = max(worst, float(edge.max()))
    return worst / float(peak)
