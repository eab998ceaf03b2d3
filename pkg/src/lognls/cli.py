"""Command line front end.

    lognls simulate --config run.json --out DIR
    lognls tau --lambda 1 --omega2 0 --cubic off --tau0 1 --tau1 0 --dt 1e-3 --t-end 10 --out traj.csv
    lognls gaussian --config run.json --out series.csv
    lognls experiment NAME [--config overrides.json] [--eta ..] [--T ..] --out DIR
    lognls experiment all --jobs 2 --out DIR
    lognls check-inequality --input density.csv --a 1.0

Exit codes: 0 all checks passed, 2 some check failed, 1 execution error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "on", "true", "yes"):
        return True
    if low in ("0", "off", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _seed(text: str) -> int:
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lognls", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--out", required=True, help=out_help)
        p.add_argument("--threads", type=int, default=1, help="FFT worker threads (default 1)")
        p.add_argument("--seed", type=_seed, default=None, help="random seed (u64)")

    p = sub.add_parser("simulate", help="run a config-driven simulation")
    p.add_argument("--config", required=True)
    common(p, "output directory")

    p = sub.add_parser("tau", help="integrate the tau oscillator")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--omega2", type=float, required=True, help="signed curvature Omega")
    p.add_argument("--cubic", type=_bool, default=True)
    p.add_argument("--tau0", type=float, default=1.0)
    p.add_argument("--tau1", type=float, default=0.0)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--log-clock", action="store_true", help="uniform steps in ln(1 + t)")
    common(p, "CSV file")

    p = sub.add_parser("gaussian", help="integrate the Gaussian ODEs for a run config")
    p.add_argument("--config", required=True)
    common(p, "CSV file")

    p = sub.add_parser("experiment", help="run a named experiment (or all)")
    p.add_argument("name", help="experiment name, or 'all' to run every experiment")
    p.add_argument("--jobs", type=int, default=1, help="parallel experiments with 'all'")
    p.add_argument("--config", help="JSON overrides {params: {...}, thresholds: {...}}")
    p.add_argument("--eta", type=float)
    p.add_argument("--T", type=float, help="final time (params.t_end)")
    common(p, "output directory")

    p = sub.add_parser("check-inequality", help="dual log-Sobolev audit of a 1-D density")
    p.add_argument("--input", required=True, help="CSV with columns x and density (or re, im)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--out", help="optional JSON output path")
    return ap


def _print_checks(report) -> int:
    for c in report["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"{mark}  {c['name']}: {c['value']!r} {c['relation']} {c['threshold']!r}")
    print(f"hash {report['meta']['hash']}")
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_simulate(args) -> int:
    from .experiments import run_simulation

    report = run_simulation(args.config, args.out, threads=args.threads, seed=args.seed or 0)
    return _print_checks(report)


def cmd_tau(args) -> int:
    from .grid import set_fft_workers
    from .tau_ode import TauParams, first_integral_residual, integrate_tau

    set_fft_workers(args.threads)
    params = TauParams(args.lam, args.omega2, args.cubic, args.tau0, args.tau1)
    traj = integrate_tau(params, args.t_end, args.dt, log_clock=args.log_clock)
    res = first_integral_residual(traj, relative=args.omega2 < 0)
    _write_csv(args.out, ["t", "tau", "tau_dot", "residual"],
               zip(traj.times, traj.tau, traj.tau_dot, res))
    print(f"max |residual| {float(np.nanmax(np.abs(res))):.3e}; tau(t_end) {float(traj.tau[-1])!r}")
    return EXIT_OK


def cmd_gaussian(args) -> int:
    from .config import load_config
    from .errors import ConfigError
    from .gaussian_dynamics import GaussianState, integrate_gaussian
    from .potentials import gausson_profile

    cfg = load_config(args.config)
    init = cfg.raw["initial"]
    d = cfg.grid.ndim
    if "gaussian" in init:
        body = init["gaussian"]
        amp = body.get("amplitude", 1.0)
        amp = complex(*amp) if isinstance(amp, list) else complex(amp)
        if any(body.get("center", [0] * d)) or any(body.get("velocity", [0] * d)):
            raise ConfigError(["initial.gaussian: the Gaussian ODEs need a centered datum"])
        a = np.asarray(body["a_re"], float) + 1j * np.asarray(body.get("a_im", [0.0] * d), float)
        st = GaussianState(a, amp)
    elif "gausson" in init:
        st = gausson_profile(init["gausson"]["nu"], cfg.lam, init["gausson"]["kappa"], d)
    else:
        raise ConfigError(["initial: the gaussian command needs a gaussian or gausson datum"])
    ser = integrate_gaussian(st, cfg.potential, cfg.lam, cfg.t_end, cfg.dt)
    header = ["t"] + [f"re_a_{j}" for j in range(d)] + [f"im_a_{j}" for j in range(d)]
    header += ["abs_b", "arg_b", "mass"]
    mass = ser.mass()
    rows = (
        [t, *a.real, *a.imag, abs(b), math.atan2(b.imag, b.real), m]
        for t, a, b, m in zip(ser.times, ser.a, ser.b, mass)
    )
    _write_csv(args.out, header, rows, every=cfg.save_every)
    print(f"mass drift {float(np.ptp(mass) / mass[0]):.3e}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .errors import ConfigError
    from .experiments import NAMES, run_experiment, run_experiments

    if args.name == "all":
        if args.config or args.eta is not None or args.T is not None:
            raise ConfigError(["experiment all: overrides apply to a single experiment"])
        results = run_experiments(NAMES, args.out, args.seed, args.threads, args.jobs)
        for name in NAMES:
            print(f"{'PASS' if results[name] else 'FAIL'}  {name}")
        return EXIT_OK if all(results.values()) else EXIT_FAILED
    overrides = {}
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{args.config}: invalid JSON ({exc})"]) from exc
    params = overrides.setdefault("params", {})
    if args.eta is not None:
        params["eta"] = args.eta
    if args.T is not None:
        params["t_end"] = args.T
    report = run_experiment(args.name, overrides, seed=args.seed, out_dir=args.out,
                            threads=args.threads)
    return _print_checks(report)


def cmd_check_inequality(args) -> int:
    from .diagnostics import dual_logsob_residual
    from .errors import InvalidArgument

    with open(args.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "x" not in rows[0]:
        raise InvalidArgument(f"{args.input}: expected a header with column x")
    x = np.array([float(r["x"]) for r in rows])
    if "density" in rows[0]:
        dens = np.array([float(r["density"]) for r in rows])
    elif "re" in rows[0] and "im" in rows[0]:
        dens = np.array([float(r["re"]) ** 2 + float(r["im"]) ** 2 for r in rows])
    else:
        raise InvalidArgument(f"{args.input}: expected a density column or re/im columns")
    h = np.diff(x)
    if x.size < 8 or np.any(np.abs(h - h[0]) > 1e-9 * max(1.0, abs(h[0]))) or h[0] <= 0:
        raise InvalidArgument(f"{args.input}: x must be uniform, increasing, with >= 8 points")
    grid = _AuditGrid(x, float(h[0]))
    res = dual_logsob_residual(dens, grid, args.a, density=True)
    out = {"a": args.a, "residual": res.residual, "a_star": res.a_star,
           "residual_at_a_star": res.residual_at_a_star, "passed": res.residual >= -1e-8}
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK if out["passed"] else EXIT_FAILED


class _AuditGrid:
    """Minimal 1-D grid view over arbitrary uniform sample points."""

    def __init__(self, x, h):
        self._x = x
        self.shape = x.shape
        self.ndim = 1
        self.cell = h

    def coords(self):
        return [self._x]


def _write_csv(path, header, rows, every: int = 1) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i, row in enumerate(rows):
                if i % every == 0:
                    w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


COMMANDS = {"simulate": cmd_simulate, "tau": cmd_tau, "gaussian": cmd_gaussian,
            "experiment": cmd_experiment, "check-inequality": cmd_check_inequality}


def main(argv=None) -> int:
    from .errors import ConfigError, LogNLSError

    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"lognls: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (LogNLSError, OSError, ValueError) as exc:
        print(f"lognls: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
