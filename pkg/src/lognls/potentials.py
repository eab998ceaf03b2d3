"""Diagonal quadratic-plus-linear potentials and Gausson parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NoGaussonError
from .gaussian_dynamics import GaussianState

CONFINING = "confining"
PARTIAL = "partial"
REPULSIVE = "repulsive"
SADDLE = "saddle"
FREE = "free"


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = sum_j sign_j * omega_j**2 * x_j**2 / 2 + linear . x

    ``signs`` takes values in {-1, 0, +1}; an axis with sign 0 stores
    omega = 0 whatever was passed in.
    """

    signs: tuple[int, ...]
    omegas: tuple[float, ...]
    linear: tuple[float, ...] = field(default=())

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) == 0:
            raise InvalidArgument("a potential needs at least one axis")
        if any(s not in (-1, 0, 1) for s in signs):
            raise InvalidArgument(f"axis signs must be -1, 0 or +1, got {signs}")
        if len(self.omegas) != len(signs):
            raise InvalidArgument("signs and omegas must have the same length")
        omegas = tuple(0.0 if s == 0 else float(w) for s, w in zip(signs, self.omegas))
        if any(w < 0 or not math.isfinite(w) for w in omegas):
            raise InvalidArgument(f"frequencies must be finite and >= 0, got {omegas}")
        linear = tuple(float(e) for e in self.linear) or (0.0,) * len(signs)
        if len(linear) != len(signs):
            raise InvalidArgument("linear term must have one entry per axis")
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "linear", linear)

    @property
    def d(self) -> int:
        return len(self.signs)

    @property
    def curvatures(self) -> tuple[float, ...]:
        """Signed curvature Omega_j = sign_j * omega_j**2 per axis."""
        return tuple(s * w * w for s, w in zip(self.signs, self.omegas))

    @property
    def has_linear(self) -> bool:
        return any(e != 0.0 for e in self.linear)

    @classmethod
    def free(cls, d: int = 1) -> "PotentialSpec":
        return cls((0,) * d, (0.0,) * d)

    @classmethod
    def harmonic(cls, omega: float, d: int = 1) -> "PotentialSpec":
        return cls((1,) * d, (float(omega),) * d)

    @classmethod
    def repulsive(cls, omega: float, d: int = 1) -> "PotentialSpec":
        return cls((-1,) * d, (float(omega),) * d)

    def classify(self) -> str:
        kinds = set(self.signs)
        if kinds == {1}:
            return CONFINING
        if kinds == {-1}:
            return REPULSIVE
        if kinds == {0}:
            return FREE
        if kinds == {0, 1}:
            return PARTIAL
        return SADDLE

    def to_json(self) -> dict:
        return {
            "axes": [{"sign": s, "omega": w} for s, w in zip(self.signs, self.omegas)],
            "linear": list(self.linear),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PotentialSpec":
        try:
            axes = obj["axes"]
            signs = [a["sign"] for a in axes]
            omegas = [a.get("omega", 0.0) for a in axes]
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed potential object: {obj!r}") from exc
        return cls(tuple(signs), tuple(omegas), tuple(obj.get("linear", ())))

    def on_grid(self, coords) -> np.ndarray:
        """Evaluate V on the broadcastable coordinate arrays ``coords``."""
        if len(coords) != self.d:
            raise InvalidArgument(f"expected {self.d} coordinate arrays, got {len(coords)}")
        out = 0.0
        for x, s, w, e in zip(coords, self.signs, self.omegas, self.linear):
            if s != 0:
                out = out + s * w * w * x * x / 2
            if e != 0.0:
                out = out + e * x
        return np.asarray(out, dtype=float)


def eval_potential(spec: PotentialSpec, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.d,):
        raise InvalidArgument(f"point has dimension {x.size}, potential has {spec.d}")
    total = 0.0
    for xj, s, w, e in zip(x, spec.signs, spec.omegas, spec.linear):
        total += s * w * w * xj * xj / 2
        total += e * xj
    return float(total)


def gausson_width(lam: float, omega: float) -> float:
    """Positive root k of k**2 + 2*lam*k = omega**2.

    Written as omega**2 / (lam + sqrt(lam**2 + omega**2)) when lam > 0 to
    avoid cancellation; equals -lam + sqrt(lam**2 + omega**2).
    """
    if omega < 0:
        raise InvalidArgument("omega must be >= 0")
    root = math.hypot(lam, omega)
    if lam > 0:
        if omega == 0:
            raise NoGaussonError("no L2 Gausson for lambda > 0 without confinement")
        return omega * omega / (lam + root)
    k = root - lam
    if not k > 0:
        raise NoGaussonError(f"no positive Gausson width for lambda={lam}, omega={omega}")
    return k


def gausson_profile(nu: float, lam: float, kappa: float, d: int) -> GaussianState:
    """Gausson phi_nu = exp(-(nu + kappa d/2) / (2 lam)) exp(-kappa |x|^2 / 2)."""
    if lam == 0:
        raise InvalidArgument("lambda must be nonzero")
    if not kappa > 0:
        raise InvalidArgument("kappa must be positive")
    b = math.exp(-(nu + kappa * d / 2) / (2 * lam))
    return GaussianState(a=np.full(d, kappa, dtype=complex), b=complex(b))


def kappa_to_omega2(kappa: float, lam: float) -> float:
    return kappa * (kappa + 2 * lam)
