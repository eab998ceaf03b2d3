"""Acceptance criteria, each judged at its stated tolerance.

Every check prints one PASS/FAIL line (also collected into the terminal
summary).  Long experiments run their versioned presets.
"""
import math
import time

import numpy as np
import pytest

from lognls import (GaussianState, Grid, PotentialSpec, TauParams, WaveField, default_epsilon,
                    first_integral_residual, free_rate_check, integrate_gaussian, integrate_tau,
                    mu_infinity_integral, mu_infinity_limit, run)
from lognls.diagnostics import dual_logsob_residual, relative_entropy_and_ck
from lognls.experiments import run_experiment
from lognls.schema import report_schema_validate
from lognls.variational import (VariationalContext, action_and_nehari, ground_energy,
                                random_sigma_perturbation, spectral_floor_check)

import conftest
from conftest import gausson_field, l2

RELATIONS = {"<=": lambda v, t: v <= t, ">=": lambda v, t: v >= t,
             "in": lambda v, t: t[0] <= v <= t[1]}


def judge(crit: int, label: str, value, relation: str, threshold) -> bool:
    ok = bool(RELATIONS[relation](value, threshold))
    line = f"{'PASS' if ok else 'FAIL'}  [{crit:2d}] {label}: {value:.6g} {relation} {threshold}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    return ok


def judge_report(crit: int, report: dict, path=None) -> bool:
    ok = True
    for c in report["checks"]:
        if c["relation"] == "true":
            ok &= judge(crit, c["name"], float(c["value"]), ">=", 1.0)
        else:
            ok &= judge(crit, c["name"], c["value"], c["relation"], c["threshold"])
    if path is not None:
        ok &= judge(crit, "report schema violations", len(report_schema_validate(path)), "<=", 0)
    return ok


# -- 1, 2: conservation and stationarity ------------------------------------------

@pytest.fixture(scope="module")
def gausson_run():
    f = gausson_field(N=512, L=24.0, lam=1.0, kappa=1.0, nu=-0.5)
    start = time.process_time()
    fin, recs = run(f, 10.0, 1e-3, save_every=100)
    return f, fin, recs, time.process_time() - start


def test_c01_conservation(gausson_run):
    _, _, recs, cpu = gausson_run
    m = np.array([r.mass for r in recs])
    e = np.array([r.energy_eps for r in recs])
    ok = judge(1, "relative mass drift", float(np.max(np.abs(m / m[0] - 1))), "<=", 1e-10)
    ok &= judge(1, "relative E_eps drift", float(np.max(np.abs(e / e[0] - 1))), "<=", 1e-6)
    ok &= judge(1, "runtime, single thread (s)", cpu, "<=", 60.0)
    assert ok


def test_c02_gausson_stationarity(gausson_run):
    f, fin, _, _ = gausson_run
    err = l2(np.abs(fin.values) - np.abs(f.values), f.grid.cell) / f.norm()
    assert judge(2, "|| |u(T)| - phi || / ||phi||", err, "<=", 1e-4)


# -- 3: Gaussian oracle ---------------------------------------------------------------

def test_c03_gaussian_oracle():
    lam, T = 1.0, 5.0
    g = Grid((512,), (24.0,))
    spec = PotentialSpec.harmonic(math.sqrt(3.0))
    st = GaussianState([2.0], 1.0)
    vals = st.evaluate(g.coords())
    errs = []
    for dt in (1e-3, 2e-3):
        fin, _ = run(WaveField(g, vals, lam, spec, epsilon=default_epsilon(vals)), T, dt, record=False)
        ser = integrate_gaussian(st, spec, lam, T, 1e-4)
        ref = ser[len(ser) - 1].evaluate(g.coords())
        errs.append(l2(fin.values - ref, g.cell) / l2(ref, g.cell))
    ok = judge(3, "PDE vs Gaussian ODE L2 discrepancy (dt=1e-3)", errs[0], "<=", 1e-4)
    ok &= judge(3, "Strang error ratio under dt doubling", errs[1] / errs[0], ">=", 3.0)
    assert ok


# -- 4, 5, 6: tau ODE ------------------------------------------------------------------

def test_c04_tau_first_integral():
    ok = True
    for name, Omega, cubic, rel in (("free", 0.0, False, False), ("confining", 3.0, True, False),
                                    ("repulsive", -3.0, True, True)):
        traj = integrate_tau(TauParams(1.0, Omega, cubic), 10.0, 1e-3)
        res = float(np.nanmax(np.abs(first_integral_residual(traj, relative=rel))))
        kind = "relative" if rel else "absolute"
        ok &= judge(4, f"first integral residual, {name} ({kind})", res, "<=", 1e-8)
    traj = integrate_tau(TauParams(1.0, 3.0, True), 10.0, 1e-3)
    ok &= judge(4, "fixed point tau = 1 at (lam=1, Omega=3)", float(np.max(np.abs(traj.tau - 1))),
                "<=", 1e-12)
    assert ok


def test_c05_free_rate():
    start = time.process_time()
    traj = integrate_tau(TauParams(1.0, 0.0, False), 1e6, 1e-4, log_clock=True)
    ratio = float(free_rate_check(traj).tau_ratio[-1])
    ok = judge(5, "tau(1e6) / (2e6 sqrt(ln 1e6))", ratio, "in", (0.9, 1.1))
    ok &= judge(5, "runtime (s)", time.process_time() - start, "<=", 10.0)
    assert ok


def _mu_traj(tau1):
    return integrate_tau(TauParams(1.0, -1.0, True, 1.0, float(tau1)), 30.0, 2e-4, log_clock=True,
                         clock_scale=1 / max(1.0, tau1))


def test_c06_mu_infinity_cross_oracle():
    ok = True
    for tau1 in (0, 10, 100):
        traj = _mu_traj(tau1)
        gap = abs(mu_infinity_limit(traj).value - mu_infinity_integral(traj).value)
        ok &= judge(6, f"|mu_limit - mu_integral|, tau1={tau1}", gap, "<=", 1e-6)
    assert ok


@pytest.mark.xfail(strict=True, reason="Q(tau1) increases toward lam/omega; see decisions ledger")
def test_c06_mu_infinity_expansion_monotone():
    Q = []
    for tau1 in (10, 100, 1000):
        mu = mu_infinity_integral(_mu_traj(tau1)).value
        Q.append(abs(mu - (1.0 + tau1) / 2) * tau1 / math.log(tau1))
    print("Q(10), Q(100), Q(1000) =", Q)
    assert judge(6, "expansion Q(tau1) non-increasing (max successive increase)",
                 float(np.max(np.diff(Q))), "<=", 0.0)


# -- 7, 8: inequalities and ground energy -----------------------------------------------

def test_c07_dual_logsob_and_ck():
    g = Grid((1024,), (24.0,))
    x = g.axis(0)
    rng = np.random.default_rng(20240607)
    worst, worst_ck = math.inf, math.inf
    for _ in range(1000):
        n = rng.integers(1, 5)
        rho = sum(rng.uniform(0.05, 1) * np.exp(-rng.uniform(0.2, 4) * (x - rng.uniform(-3, 3)) ** 2)
                  for _ in range(n))
        a = rng.uniform(0.05, 5)
        worst = min(worst, dual_logsob_residual(rho, g, a, density=True).residual)
        mu = rho / (rho.sum() * g.cell)
        a_star = 0.5 / (float(np.sum(x * x * mu)) * g.cell)
        nu = np.exp(-a_star * x * x) * math.sqrt(a_star / math.pi)
        nu = nu / (nu.sum() * g.cell)
        worst_ck = min(worst_ck, relative_entropy_and_ck(mu, nu, g.cell)[1])
    eq = dual_logsob_residual(np.exp(-1.7 * x * x), g, 1.7, density=True).residual
    ok = judge(7, "min dual log-Sobolev residual over 1000 mixtures", worst, ">=", -1e-8)
    ok &= judge(7, "equality case residual (matched Gaussian)", abs(eq), "<=", 1e-8)
    ok &= judge(7, "min Csiszar-Kullback slack over the corpus", worst_ck, ">=", -1e-9)
    assert ok


def test_c08_ground_energy_and_floor():
    ctx = VariationalContext(1.0, 1.0, -0.5, 1)
    g = Grid((512,), (24.0,))
    res = action_and_nehari(ctx.gausson_field(g), ctx)
    D = ground_energy(ctx)
    ok = judge(8, "|S(phi) - D(nu)| / |D(nu)|", abs(res.S - D) / abs(D), "<=", 1e-8)
    ok &= judge(8, "|I(phi)| / |S(phi)|", abs(res.I) / abs(res.S), "<=", 1e-8)
    rng = np.random.default_rng(11)
    base = ctx.gausson_field(g)
    worst = min(spectral_floor_check(base.with_values(random_sigma_perturbation(g, rng)), ctx.kappa)
                for _ in range(100))
    ok &= judge(8, "min spectral floor gap over 100 random Sigma fields", worst, ">=", -1e-8)
    x = g.axis(0)
    excited = base.with_values(x * np.exp(-ctx.kappa * x * x / 2) + 0j)
    gap = spectral_floor_check(excited, ctx.kappa)
    ok &= judge(8, "|floor gap - 2 kappa ||u||^2| on the first excited mode",
                abs(gap - 2 * ctx.kappa * excited.mass()), "<=", 1e-6)
    assert ok


# -- 9-13: experiments ------------------------------------------------------------------

def _experiment(crit, name, tmp_path, budget=None):
    start = time.process_time()
    report = run_experiment(name, out_dir=tmp_path / name)
    cpu = time.process_time() - start
    ok = judge_report(crit, report, tmp_path / name / "report.json")
    if budget is not None:
        ok &= judge(crit, f"{name} runtime (s)", cpu, "<=", budget)
    return ok


@pytest.mark.slow
def test_c09_orbital_stability(tmp_path):
    assert _experiment(9, "orbital-stability", tmp_path, budget=600.0)


@pytest.mark.slow
def test_c10_free_universality(tmp_path):
    assert _experiment(10, "free-universality", tmp_path)


@pytest.mark.slow
def test_c11_partial_confinement(tmp_path):
    assert _experiment(11, "partial-confinement", tmp_path)


@pytest.mark.slow
def test_c12_repulsive_rate(tmp_path):
    assert _experiment(12, "repulsive-rate", tmp_path)


@pytest.mark.slow
def test_c12_repulsive_nonuniversality(tmp_path):
    assert _experiment(12, "repulsive-nonuniversality", tmp_path)


def test_c13_tensorization(tmp_path):
    assert _experiment(13, "tensorization", tmp_path)


def test_c13_invariances(tmp_path):
    assert _experiment(13, "invariance-suite", tmp_path)


# -- 14: determinism ----------------------------------------------------------------------

def test_c14_determinism(tmp_path):
    over = {"params": {"t_end": 0.5}}
    for d in ("a", "b"):
        run_experiment("tensorization", over, seed=7, out_dir=tmp_path / d, threads=1)
        run_experiment("orbital-stability", {"params": {"t_end": 1.0, "n_seeds": 2,
                                                        "stationary": {"t_end": 0.5}}},
                       seed=7, out_dir=tmp_path / d / "orbital", threads=1)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    same = sum((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    assert judge(14, f"byte-identical artifacts ({len(files)} files)", same, ">=", len(files))
