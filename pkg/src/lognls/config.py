"""Run configurations: JSON in, validated fields out.

    {
      "potential": {"axes": [{"sign": 1, "omega": 1.0}], "linear": [0.0]},
      "lambda": 1.0,
      "epsilon": null,                      # null -> 1e-12 * peak density
      "grid": {"N": [512], "L": [24.0]},
      "initial": {"gaussian": {"a_re": [1.0], "a_im": [0.0], "amplitude": 1.0,
                               "center": [0.0], "velocity": [0.0]}}
               | {"gausson": {"nu": -0.5, "kappa": 1.0}}
               | {"snapshot": "path/to/field.lnls"},
      "time": {"dt": 1e-3, "t_end": 10.0, "save_every": 100},
      "frame": "physical" | {"rescaled": {"regime": "free", "tau_step": 1e-4}}
    }

Validation collects every problem before anything is computed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import gamma_norm_sq, rescaled_axes
from .errors import ConfigError, InvalidArgument
from .gaussian_dynamics import GaussianState
from .grid import Grid, RescaledFrame, WaveField, default_epsilon
from .potentials import PotentialSpec, gausson_profile
from .snapshot import read_snapshot
from .tau_ode import integrate_tau, tau_for_regime

TOP_KEYS = {"potential", "lambda", "epsilon", "grid", "initial", "time", "frame"}
REQUIRED = ("potential", "lambda", "grid", "initial", "time")


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _num_list(obj, key, d, problems, where, positive=False):
    val = obj.get(key)
    if val is None:
        return None
    if not isinstance(val, list) or not all(_is_num(v) for v in val):
        problems.append(f"{where}.{key}: expected a list of numbers")
        return None
    if d is not None and len(val) != d:
        problems.append(f"{where}.{key}: expected {d} entries, got {len(val)}")
    if positive and any(v <= 0 for v in val):
        problems.append(f"{where}.{key}: entries must be positive")
    return val


def validate(cfg) -> list[str]:
    """Every problem found in ``cfg``, as human-readable strings."""
    problems: list[str] = []
    if not isinstance(cfg, dict):
        return ["config: expected a JSON object"]
    for key in sorted(set(cfg) - TOP_KEYS):
        problems.append(f"{key}: unknown key")
    for key in REQUIRED:
        if key not in cfg:
            problems.append(f"{key}: missing")

    d = None
    pot = cfg.get("potential")
    if pot is not None:
        try:
            d = PotentialSpec.from_json(pot).d
        except (InvalidArgument, KeyError, TypeError, ValueError) as exc:
            problems.append(f"potential: {exc}")

    if "lambda" in cfg and not _is_num(cfg["lambda"]):
        problems.append("lambda: expected a finite number")
    eps = cfg.get("epsilon")
    if eps is not None and (not _is_num(eps) or eps < 0):
        problems.append("epsilon: expected null or a number >= 0")

    grid = cfg.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            problems.append("grid: expected an object")
        else:
            N = grid.get("N")
            if not isinstance(N, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in N):
                problems.append("grid.N: expected a list of integers")
            else:
                for n in N:
                    if n < 8 or n & (n - 1):
                        problems.append(f"grid.N: {n} is not a power of two >= 8")
                if d is not None and len(N) != d:
                    problems.append(f"grid.N: expected {d} entries, got {len(N)}")
            if grid.get("L") is None:
                problems.append("grid.L: missing")
            _num_list(grid, "L", d, problems, "grid", positive=True)

    init = cfg.get("initial")
    if init is not None:
        if not isinstance(init, dict) or len(init) != 1:
            problems.append("initial: expected exactly one of gaussian, gausson, snapshot")
        else:
            (kind, body), = init.items()
            if kind == "gaussian":
                if not isinstance(body, dict):
                    problems.append("initial.gaussian: expected an object")
                else:
                    if body.get("a_re") is None:
                        problems.append("initial.gaussian.a_re: missing")
                    _num_list(body, "a_re", d, problems, "initial.gaussian", positive=True)
                    for key in ("a_im", "center", "velocity"):
                        _num_list(body, key, d, problems, "initial.gaussian")
                    amp = body.get("amplitude", 1.0)
                    if not (_is_num(amp) or (isinstance(amp, list) and len(amp) == 2
                                             and all(_is_num(v) for v in amp))):
                        problems.append("initial.gaussian.amplitude: expected a number or [re, im]")
            elif kind == "gausson":
                if not isinstance(body, dict):
                    problems.append("initial.gausson: expected an object")
                else:
                    if not _is_num(body.get("nu")):
                        problems.append("initial.gausson.nu: expected a number")
                    kap = body.get("kappa")
                    if not _is_num(kap) or kap <= 0:
                        problems.append("initial.gausson.kappa: expected a positive number")
                    if cfg.get("lambda") == 0:
                        problems.append("initial.gausson: needs lambda != 0")
            elif kind == "snapshot":
                if not isinstance(body, str):
                    problems.append("initial.snapshot: expected a file path")
            else:
                problems.append(f"initial.{kind}: unknown initial datum kind")

    tm = cfg.get("time")
    if tm is not None:
        if not isinstance(tm, dict):
            problems.append("time: expected an object")
        else:
            if not _is_num(tm.get("dt")) or tm.get("dt") <= 0:
                problems.append("time.dt: expected a positive number")
            if not _is_num(tm.get("t_end")) or tm.get("t_end") < 0:
                problems.append("time.t_end: expected a number >= 0")
            se = tm.get("save_every", 1)
            if not isinstance(se, int) or isinstance(se, bool) or se < 1:
                problems.append("time.save_every: expected an integer >= 1")

    frame = cfg.get("frame", "physical")
    if frame != "physical":
        body = frame.get("rescaled") if isinstance(frame, dict) and len(frame) == 1 else None
        if not isinstance(body, dict):
            problems.append('frame: expected "physical" or {"rescaled": {...}}')
        else:
            regime = body.get("regime")
            if regime not in ("free", "partial", "repulsive"):
                problems.append("frame.rescaled.regime: expected free, partial or repulsive")
            step = body.get("tau_step", 1e-4)
            if not _is_num(step) or step <= 0:
                problems.append("frame.rescaled.tau_step: expected a positive number")
            if pot is not None and regime in ("free", "partial", "repulsive") and d is not None:
                try:
                    spec = PotentialSpec.from_json(pot)
                except Exception:  # already reported above
                    spec = None
                if spec is not None:
                    cls = spec.classify()
                    if cls != regime:
                        problems.append(f"frame.rescaled.regime: {regime} frame needs a {regime} potential, got {cls}")
                    if spec.has_linear:
                        problems.append("frame.rescaled: linear potential terms are not supported")
                    if regime == "repulsive" and len(set(spec.omegas)) != 1:
                        problems.append("frame.rescaled: repulsive frames need one common omega")
    return problems


@dataclass
class RunConfig:
    raw: dict
    potential: PotentialSpec
    lam: float
    grid: Grid
    dt: float
    t_end: float
    save_every: int
    base_dir: Path

    @property
    def regime(self) -> str | None:
        frame = self.raw.get("frame", "physical")
        return None if frame == "physical" else frame["rescaled"]["regime"]


def load_config(source, base_dir=None) -> RunConfig:
    """Parse and validate a run config given as a dict or a JSON file path."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: invalid JSON ({exc})"]) from exc
        base_dir = base_dir or path.parent
    else:
        raw = source
    problems = validate(raw)
    if problems:
        raise ConfigError(problems)
    tm = raw["time"]
    return RunConfig(raw, PotentialSpec.from_json(raw["potential"]), float(raw["lambda"]),
                     Grid.from_json(raw["grid"]), float(tm["dt"]), float(tm["t_end"]),
                     int(tm.get("save_every", 1)), Path(base_dir or "."))


def initial_values(cfg: RunConfig) -> tuple[np.ndarray, float]:
    """(values, t0) of the initial datum on the config grid."""
    init = cfg.raw["initial"]
    g = cfg.grid
    if "gaussian" in init:
        body = init["gaussian"]
        d = g.ndim
        amp = body.get("amplitude", 1.0)
        amp = complex(*amp) if isinstance(amp, list) else complex(amp)
        a = np.asarray(body["a_re"], float) + 1j * np.asarray(body.get("a_im", [0.0] * d), float)
        st = GaussianState(a, amp, body.get("center", [0.0] * d), body.get("velocity", [0.0] * d))
        return st.evaluate(g.coords()), 0.0
    if "gausson" in init:
        body = init["gausson"]
        st = gausson_profile(float(body["nu"]), cfg.lam, float(body["kappa"]), g.ndim)
        return st.evaluate(g.coords()), 0.0
    path = Path(init["snapshot"])
    if not path.is_absolute():
        path = cfg.base_dir / path
    snap = read_snapshot(path)
    if snap["grid"] != g:
        raise ConfigError([f"initial.snapshot: grid {snap['grid'].to_json()} differs from config grid"])
    return snap["values"], float(snap["t"])


def build_field(cfg: RunConfig) -> WaveField:
    """Initial WaveField; rescaled frames get v0 (normalized to ||gamma|| unless repulsive)
    and a tau trajectory covering the whole run."""
    vals, t0 = initial_values(cfg)
    eps_cfg = cfg.raw.get("epsilon")
    frame_cfg = cfg.raw.get("frame", "physical")
    if frame_cfg == "physical":
        eps = default_epsilon(vals) if eps_cfg is None else float(eps_cfg)
        return WaveField(cfg.grid, vals, cfg.lam, cfg.potential, t=t0, epsilon=eps)
    body = frame_cfg["rescaled"]
    regime = body["regime"]
    if t0 != 0:
        raise ConfigError(["frame.rescaled: rescaled runs start from t = 0"])
    flags = rescaled_axes(cfg.potential, regime)
    omega = cfg.potential.omegas[0] if regime == "repulsive" else 0.0
    params = tau_for_regime(regime, cfg.lam, omega)
    horizon = cfg.t_end + max(1.0, 2 * cfg.dt)
    traj = integrate_tau(params, horizon, float(body.get("tau_step", 1e-4)), log_clock=True)
    if regime != "repulsive":
        norm = math.sqrt(float(np.sum(np.abs(vals) ** 2)) * cfg.grid.cell)
        vals = vals * math.sqrt(gamma_norm_sq(sum(flags))) / norm
    eps = default_epsilon(vals) if eps_cfg is None else float(eps_cfg)
    return WaveField(cfg.grid, vals, cfg.lam, cfg.potential, t=0.0, epsilon=eps,
                     frame=RescaledFrame(traj, flags, regime))
