"""Experiment registry: named, parameterized runs that produce CSV tables
plus a metrics dictionary.  The service and the command-line client both
dispatch through :func:`run_experiment`.

Runs are deterministic for a given parameter set (stochastic initial
conditions always flow through a seeded generator), so repeated runs emit
byte-identical tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import asympt, floquet, greens, lineops, modecouple, patstab, phaseplane, singular
from .errors import BadParameterError, UnknownExperimentError
from .numkit import solve_ode


# ---------------------------------------------------------------------------
# table plumbing


@dataclass
class Table:
    header: list
    rows: list


@dataclass
class RunResult:
    tables: dict
    metrics: dict


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(table: Table) -> str:
    lines = [",".join(table.header)]
    for row in table.rows:
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


@dataclass
class ExperimentSpec:
    name: str
    description: str
    defaults: dict
    runner: Callable[[dict], RunResult]


REGISTRY: dict = {}


def register(name: str, description: str, defaults: dict):
    def wrap(fn):
        REGISTRY[name] = ExperimentSpec(name=name, description=description,
                                        defaults=dict(defaults), runner=fn)
        return fn

    return wrap


def list_experiments() -> list:
    return [(name, REGISTRY[name].description) for name in sorted(REGISTRY)]


def _coerce(value, template, key: str):
    if isinstance(template, bool):
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise BadParameterError(f"parameter {key!r} expects a boolean, got {value!r}")
    if isinstance(template, int) and not isinstance(template, bool):
        try:
            return int(float(value))
        except (TypeError, ValueError):
            raise BadParameterError(f"parameter {key!r} expects an integer, got {value!r}")
    if isinstance(template, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise BadParameterError(f"parameter {key!r} expects a number, got {value!r}")
    return str(value)


def resolve_params(name: str, overrides: Optional[dict] = None) -> dict:
    if name not in REGISTRY:
        raise UnknownExperimentError(f"unknown experiment {name!r}")
    spec = REGISTRY[name]
    params = dict(spec.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise BadParameterError(
                f"unknown parameter {key!r} for experiment {name!r} "
                f"(valid: {', '.join(sorted(params))})")
        params[key] = _coerce(value, params[key], key)
    return params


def run_experiment(name: str, overrides: Optional[dict] = None):
    """Resolve parameters and run; returns (params, RunResult)."""
    params = resolve_params(name, overrides)
    return params, REGISTRY[name].runner(params)


# ---------------------------------------------------------------------------
# phase-plane and model catalog


@register("phaseplane",
          "Classify catalog equilibria (pendulum, predator-prey, Hopf)",
          {"omega": 1.0, "gamma": 0.1, "a": 1.0, "c": 1.0, "alpha": 1.0,
           "mu": 1.0})
def _run_phaseplane(p):
    entries = [
        phaseplane.pendulum(p["omega"], p["gamma"]),
        phaseplane.lotka_volterra(p["a"], p["c"], p["alpha"]),
        phaseplane.hopf_exemplar(p["mu"]),
    ]
    rows = []
    counts = {}
    for entry in entries:
        eqs = phaseplane.find_equilibria(entry.system, entry.known_equilibria)
        for eq in eqs:
            kind = eq.kind.value if eq.kind else "n/a"
            stab = eq.stability.value if eq.stability else "n/a"
            rows.append([entry.name, eq.point[0], eq.point[1],
                         eq.eigenvalues[0].real, eq.eigenvalues[0].imag,
                         eq.eigenvalues[1].real, eq.eigenvalues[1].imag,
                         kind, stab])
            counts[kind] = counts.get(kind, 0) + 1
    table = Table(["model", "x", "y", "re_lambda1", "im_lambda1",
                   "re_lambda2", "im_lambda2", "kind", "stability"], rows)
    return RunResult(tables={"phaseplane.csv": table},
                     metrics={"n_equilibria": len(rows), "kinds": counts})


# ---------------------------------------------------------------------------
# Sturm-Liouville


@register("sturm",
          "Transcendental eigenvalues and expansion solve of the mixed-end problem",
          {"n_max": 20, "mu": 2.0, "solve": True, "n_terms": 200, "n_x": 201})
def _run_sturm(p):
    eigs = lineops.sl_eigen(lineops.RobinExample(), p["n_max"])
    f = lambda x: np.asarray(x, dtype=float)
    sol = lineops.expansion_solve(eigs, f, p["mu"],
                                  min(p["n_terms"], p["n_max"]))
    rows = []
    for i in range(p["n_max"]):
        rows.append([i + 1, eigs.lambdas[i], eigs.norm_constants[i],
                     sol.b[i] if i < sol.b.size else 0.0,
                     sol.c[i] if i < sol.c.size else 0.0])
    tables = {"sturm.csv": Table(["n", "lambda", "norm_const", "b_n", "c_n"], rows)}
    metrics = {"lambda_1": float(eigs.lambdas[0]),
               "root_1": float(math.sqrt(eigs.lambdas[0]))}
    if p["solve"]:
        big = lineops.sl_eigen(lineops.RobinExample(), max(p["n_terms"], p["n_max"]))
        series = lineops.expansion_solve(big, f, p["mu"], p["n_terms"])
        rt2 = math.sqrt(2.0)
        closed = lambda x: (np.sin(rt2 * np.asarray(x))
                            / (math.sin(rt2) + rt2 * math.cos(rt2))
                            - np.asarray(x) / 2.0)
        xs = np.linspace(0.0, 1.0, p["n_x"])
        us = series(xs)
        ug = closed(xs)
        tables["sturm_solution.csv"] = Table(
            ["x", "u_series", "u_green"],
            [[x, u, g] for x, u, g in zip(xs, us, ug)])
        metrics["max_gap_series_vs_green"] = float(np.max(np.abs(us - ug)))
        metrics["n_terms"] = p["n_terms"]
    return RunResult(tables=tables, metrics=metrics)


# ---------------------------------------------------------------------------
# Green's functions


@register("greens",
          "Surface samples and solution checks for a catalog Green's function",
          {"example": "ex1", "n_x": 61, "n_xi": 21, "seed": 12345})
def _run_greens(p):
    name = p["example"]
    G = greens.catalog_example(name)
    x0, x1 = G.domain
    pad = 1e-3 * (x1 - x0)
    xs = np.linspace(x0 + pad, x1 - pad, p["n_x"])
    xis = np.linspace(x0 + pad, x1 - pad, p["n_xi"])
    surface = [[x, xi, float(G(np.asarray(x), np.asarray(xi)))]
               for xi in xis for x in xs]
    tables = {f"greens_{name}_surface.csv": Table(["x", "xi", "G"], surface)}
    rng = np.random.default_rng(p["seed"])
    samples = x0 + pad + (x1 - x0 - 2 * pad) * rng.random(50)
    cont = max(G.continuity_gap(s) for s in samples)
    jump = max(G.jump_gap(s) for s in samples)
    metrics = {"max_continuity_gap": cont, "max_jump_gap": jump}
    if name == "ex1":
        u = greens.apply_green(G, lambda s: np.asarray(s, dtype=float))
        closed = lambda x: (x**2 / 2.0 - 0.5) * x - x**3 / 3.0
        gaps = [abs(u(float(x)) - closed(float(x))) for x in xs]
        tables["greens_ex1_solution.csv"] = Table(
            ["x", "u", "u_closed"],
            [[float(x), u(float(x)), closed(float(x))] for x in xs])
        metrics["max_solution_gap"] = max(gaps)
    elif name == "sl2":
        u = greens.apply_green(G, lambda s: -np.asarray(s, dtype=float))
        rt2 = math.sqrt(2.0)
        closed = lambda x: (math.sin(rt2 * x)
                            / (math.sin(rt2) + rt2 * math.cos(rt2)) - x / 2.0)
        gaps = [abs(u(float(x)) - closed(float(x))) for x in xs]
        tables["greens_sl2_solution.csv"] = Table(
            ["x", "u", "u_closed"],
            [[float(x), u(float(x)), closed(float(x))] for x in xs])
        metrics["max_solution_gap"] = max(gaps)
    elif name == "modified":
        Gm, _ = greens.modified_green(1.0)
        u = greens.apply_modified(Gm, lambda x: np.cos(math.pi * np.asarray(x)))
        exact = lambda x: -math.cos(math.pi * x) / math.pi**2
        us = np.array([u(float(x)) for x in xs])
        ex = np.array([exact(float(x)) for x in xs])
        gap = float(np.max(np.abs((us - np.mean(us)) - (ex - np.mean(ex)))))
        tables["greens_modified_solution.csv"] = Table(
            ["x", "u", "u_closed_plus_const"],
            [[float(x), float(uu), float(ee)] for x, uu, ee in zip(xs, us, ex)])
        metrics["max_solution_gap_mod_constant"] = gap
    return RunResult(tables=tables, metrics=metrics)


# ---------------------------------------------------------------------------
# oscillator asymptotics


@register("duffing-pl",
          "Strained-time cubic-oscillator solution against the RK run",
          {"eps": 0.05, "A": 1.0, "t_end": 60.0, "tol": 1e-10, "n_out": 601})
def _run_duffing_pl(p):
    eps, A = p["eps"], p["A"]
    sys = asympt.oscillator_system("duffing", eps)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, p["t_end"],
                     np.array([0.0, A]), p["tol"])
    ts = np.linspace(0.0, p["t_end"], p["n_out"])
    u_num = np.interp(ts, traj.t, traj.y[:, 0])
    u_asym = asympt.duffing_pl_eval(A, eps, ts)
    period = asympt.measure_period(traj.t, traj.y[:, 0])
    pred = 2.0 * math.pi / asympt.duffing_frequency(A, eps)
    table = Table(["t", "u_asym", "u_numeric"],
                  [[t, a, b] for t, a, b in zip(ts, u_asym, u_num)])
    return RunResult(
        tables={"duffing_pl.csv": table},
        metrics={"period_measured": period, "period_theory": pred,
                 "period_error": abs(period - pred),
                 "max_gap": float(np.max(np.abs(u_num - u_asym)))})


@register("vdp-pl",
          "Relaxation-free limit-cycle amplitude and frequency check",
          {"eps": 0.1, "t_end": 340.0, "tol": 1e-10, "n_out": 1701})
def _run_vdp_pl(p):
    eps = p["eps"]
    sys = asympt.oscillator_system("vdp", eps)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, p["t_end"],
                     np.array([2.0, 0.0]), p["tol"])
    ts = np.linspace(0.0, p["t_end"], p["n_out"])
    u_num = np.interp(ts, traj.t, traj.y[:, 0])
    u_asym = asympt.vdp_pl_eval(eps, ts)
    amp = asympt.limit_cycle_amplitude(traj, eps)
    period = asympt.measure_period(traj.t, traj.y[:, 0],
                                   discard_before=30.0 / max(eps, 0.05))
    pred = 2.0 * math.pi / asympt.vdp_frequency(eps)
    table = Table(["t", "u_asym", "u_numeric"],
                  [[t, a, b] for t, a, b in zip(ts, u_asym, u_num)])
    return RunResult(
        tables={"vdp_pl.csv": table},
        metrics={"amplitude_measured": amp, "amplitude_theory": 2.0,
                 "period_measured": period, "period_theory": pred,
                 "period_rel_error": abs(period - pred) / pred})


@register("ms-damped",
          "Two-time damped oscillator vs its exact solution",
          {"eps": 0.1, "alpha": 1.0, "t_end": 50.0, "n_out": 1001, "tol": 1e-10})
def _run_ms_damped(p):
    eps, alpha = p["eps"], p["alpha"]
    ts = np.linspace(0.0, p["t_end"], p["n_out"])
    u_asym = asympt.ms_damped_eval(alpha, eps, ts)
    u_exact = asympt.ms_damped_exact(alpha, eps, ts)
    sys = asympt.oscillator_system("ms-damped", eps)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, p["t_end"],
                     np.array([alpha, 0.0]), p["tol"])
    u_num = np.interp(ts, traj.t, traj.y[:, 0])
    table = Table(["t", "u_asym", "u_exact", "u_numeric"],
                  [[t, a, e, n] for t, a, e, n in zip(ts, u_asym, u_exact, u_num)])
    gap = float(np.max(np.abs(u_asym - u_exact)))
    return RunResult(tables={"ms_damped.csv": table},
                     metrics={"max_gap_vs_exact": gap, "gap_over_eps": gap / eps})


@register("vdp-ms",
          "Two-time transient envelope of the van der Pol oscillator",
          {"eps": 0.1, "alpha": 0.5, "t_end": 50.0, "n_out": 1001, "tol": 1e-10})
def _run_vdp_ms(p):
    eps, alpha = p["eps"], p["alpha"]
    sys = asympt.oscillator_system("vdp", eps)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, p["t_end"],
                     np.array([alpha, 0.0]), p["tol"])
    ts = np.linspace(0.0, p["t_end"], p["n_out"])
    u_num = np.interp(ts, traj.t, traj.y[:, 0])
    u_asym = asympt.vdp_ms_eval(alpha, eps, ts)
    amp = asympt.vdp_ms_amplitude(alpha, eps, ts)
    # numerical envelope via peak interpolation
    peaks_t, peaks = _signal_peaks(traj.t, traj.y[:, 0])
    env_pred = asympt.vdp_ms_amplitude(alpha, eps, peaks_t)
    rel = np.abs(peaks - env_pred) / env_pred
    table = Table(["t", "u_asym", "u_numeric", "amp_asym"],
                  [[t, a, n, m] for t, a, n, m in zip(ts, u_asym, u_num, amp)])
    return RunResult(tables={"vdp_ms.csv": table},
                     metrics={"max_envelope_rel_error": float(np.max(rel)),
                              "final_amplitude": float(peaks[-1])})


def _signal_peaks(t, u):
    """Quadratic-interpolated local maxima of |u|."""
    a = np.abs(u)
    idx = np.nonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    keep = a[idx] > 0.05 * np.max(a)
    idx = idx[keep]
    ts, vals = [], []
    for i in idx:
        y0, y1, y2 = a[i - 1], a[i], a[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        ts.append(t[i] + shift * (t[i + 1] - t[i]))
        vals.append(y1 - 0.25 * (y0 - y2) * shift)
    return np.array(ts), np.array(vals)


@register("response",
          "Forced cubic-oscillator response curves (free and damped)",
          {"kappa": 1.0, "gamma": 0.2, "Delta": 0.1, "Gamma": 0.2,
           "omega_min": 0.5, "omega_max": 2.0, "n_omega": 151,
           "beta_min": -1.0, "beta_max": 2.0, "n_beta": 151})
def _run_response(p):
    omegas = np.linspace(p["omega_min"], p["omega_max"], p["n_omega"])
    und = asympt.duffing_response(p["kappa"], p["gamma"], 0.0, omegas)
    rows_u = []
    for pt in und:
        amps = (pt.amplitudes + [math.nan] * 3)[:3]
        rows_u.append([pt.omega] + amps)
    betas = np.linspace(p["beta_min"], p["beta_max"], p["n_beta"])
    damp = asympt.duffing_response(p["kappa"], p["Gamma"], p["Delta"], betas)
    rows_d = []
    n_multi = 0
    for pt in damp:
        amps = (pt.amplitudes + [math.nan] * 3)[:3]
        n_multi += len(pt.amplitudes) == 3
        rows_d.append([pt.omega] + amps)
    return RunResult(
        tables={"response_undamped.csv": Table(["omega", "A1", "A2", "A3"], rows_u),
                "response_damped.csv": Table(["beta", "R1", "R2", "R3"], rows_d)},
        metrics={"n_multivalued_beta": int(n_multi)})


# ---------------------------------------------------------------------------
# boundary layers, WKB, relaxation oscillator


@register("blayer",
          "Matched-asymptotics solutions vs exact/collocation references",
          {"case": "single", "eps": 0.01, "n_x": 1001})
def _run_blayer(p):
    xs = np.linspace(0.0, 1.0, p["n_x"])
    if p["case"] == "single":
        exact, uniform = singular.bl_example1(p["eps"], xs)
        table = Table(["x", "exact", "uniform"],
                      [[x, e, u] for x, e, u in zip(xs, exact, uniform)])
        gap = float(np.max(np.abs(exact - uniform)))
        return RunResult(tables={"blayer_single.csv": table},
                         metrics={"max_gap": gap, "eps": p["eps"]})
    if p["case"] == "double":
        xg, ug = singular.bl_double_collocation(p["eps"])
        uu = singular.bl_double_uniform(p["eps"], xg)
        table = Table(["x", "uniform", "collocation"],
                      [[x, a, b] for x, a, b in zip(xg, uu, ug)])
        gap = float(np.max(np.abs(uu - ug)))
        return RunResult(tables={"blayer_double.csv": table},
                         metrics={"max_gap": gap, "eps": p["eps"]})
    raise BadParameterError(f"case must be 'single' or 'double', got {p['case']!r}")


@register("wkb",
          "Phase-integral eigenvalues for the quartic profile vs grid oracle",
          {"n_max": 20, "n_grid": 4000})
def _run_wkb(p):
    Q = lambda x: (np.asarray(x, dtype=float) + math.pi) ** 4
    grid = singular.wkb_eigen_grid_oracle(Q, p["n_max"], p["n_grid"])
    rows = []
    for n in range(1, p["n_max"] + 1):
        E, _ = singular.wkb_eigen(Q, n)
        closed = 9.0 * n * n / (49.0 * math.pi**4)
        rel = abs(E - grid[n - 1]) / grid[n - 1]
        rows.append([n, E, closed, grid[n - 1], rel])
    table = Table(["n", "E_wkb", "E_closed", "E_grid", "rel_err"], rows)
    return RunResult(tables={"wkb_eigen.csv": table},
                     metrics={"rel_err_first": rows[0][4],
                              "rel_err_last": rows[-1][4]})


@register("rayleigh",
          "Relaxation-oscillator trajectory and limit-cycle period",
          {"eps": 0.05, "t_end": 20.0, "tol": 1e-10, "n_out": 2001})
def _run_rayleigh(p):
    traj = singular.rayleigh_simulate(p["eps"], p["t_end"], tol=p["tol"])
    ts = np.linspace(0.0, p["t_end"], p["n_out"])
    us = np.interp(ts, traj.t, traj.y[:, 0])
    vs = np.interp(ts, traj.t, traj.y[:, 1])
    period = singular.rayleigh_period(p["eps"], tol=p["tol"])
    table = Table(["t", "u", "v"], [[t, u, v] for t, u, v in zip(ts, us, vs)])
    return RunResult(tables={"rayleigh.csv": table},
                     metrics={"period_measured": period,
                              "period_relaxation_limit":
                                  singular.rayleigh_relaxation_period_limit()})


# ---------------------------------------------------------------------------
# pattern formation


def _spectrum_table(series: patstab.SpectrumSeries, k_cut: float) -> Table:
    keep = (series.k >= 0) & (series.k <= k_cut)
    ks = series.k[keep]
    rows = []
    for i, t in enumerate(series.times):
        for j, k in enumerate(ks):
            rows.append([float(t), float(k), float(series.mags[i, keep][j])])
    return Table(["t", "k", "mag"], rows)


def growth_window(series: patstab.SpectrumSeries, amp: float,
                  lo_factor: float = 3.0, hi_ratio: float = 0.05) -> tuple:
    """Linear-stage window: sidebands grown past ``lo_factor * amp`` but
    still below ``hi_ratio`` of the saturated level."""
    band = np.where(series.k != 0.0)[1] if series.k.ndim > 1 else series.k != 0.0
    m = np.max(series.mags[:, series.k != 0.0], axis=1)
    sat = float(np.max(m))
    ok = (m >= lo_factor * amp) & (m <= hi_ratio * sat)
    idx = np.nonzero(ok)[0]
    if idx.size < 3:
        ok = m <= hi_ratio * sat
        idx = np.nonzero(ok)[0]
    if idx.size < 3:
        idx = np.arange(min(len(series.times), 5))
    return float(series.times[idx[0]]), float(series.times[idx[-1]])


def _mi_metrics(result: patstab.SimResult, amp: float, k_theory: float):
    window = growth_window(result.spectrum, amp)
    meas = patstab.measure_dominant_k(result.spectrum, window,
                                      min_start_mag=0.3 * amp)
    dk = float(result.spectrum.k[1] - result.spectrum.k[0])
    slope_theory = float(patstab.growth_rate(result.model, meas.k_hat))
    return meas, {
        "k_hat": meas.k_hat,
        "k_max_theory": k_theory,
        "dk": dk,
        "k_gap_in_bins": abs(meas.k_hat - k_theory) / dk,
        "slope": meas.slope,
        "slope_theory_at_k_hat": slope_theory,
        "slope_rel_error": (abs(meas.slope - slope_theory)
                            / slope_theory if slope_theory else math.nan),
        "window_t0": window[0],
        "window_t1": window[1],
        "reliable": meas.reliable,
    }


@register("fk-mi",
          "Reaction-diffusion branch selection and k=0 dominance",
          {"mu": 1.0, "L": 20.0 * math.pi, "n": 1024, "t_end": 40.0,
           "seed": 12345, "amp": 1e-3, "dt": 0.01, "record_every": 0.25})
def _run_fk(p):
    model = patstab.FisherKolmogorov(mu=p["mu"])
    result = patstab.simulate(model, patstab.NoisyUniform(p["amp"]), L=p["L"],
                              n=p["n"], t_end=p["t_end"], seed=p["seed"],
                              dt=p["dt"], record_every=p["record_every"])
    band = patstab.kmax_band(model)
    meas, metrics = _mi_metrics(result, p["amp"], band.k_max or 0.0)
    u = np.real(result.final.values)
    root = math.sqrt(p["mu"])
    frac = float(np.mean((np.abs(u - root) < 0.01) | (np.abs(u + root) < 0.01)))
    metrics["branch_fraction"] = frac
    metrics["max_imag"] = float(np.max(np.abs(np.imag(result.final.values))))
    table = _spectrum_table(result.spectrum, k_cut=2.0)
    return RunResult(tables={"fk_spectrum.csv": table}, metrics=metrics)


@register("ks-mi",
          "Fourth-order damped interface model: sideband growth vs theory",
          {"mu": 0.4, "L": 8.0 * math.pi, "n": 2048, "t_end": 40.0,
           "seed": 12345, "amp": 1e-3, "dt": 0.01, "record_every": 0.5})
def _run_ks(p):
    model = patstab.KuramotoSivashinsky(mu=p["mu"])
    result = patstab.simulate(model, patstab.NoisyUniform(p["amp"]), L=p["L"],
                              n=p["n"], t_end=p["t_end"], seed=p["seed"],
                              dt=p["dt"], record_every=p["record_every"])
    k_theory = 1.0 / math.sqrt(2.0 * p["mu"]) if p["mu"] > 0 else math.nan
    meas, metrics = _mi_metrics(result, p["amp"], k_theory)
    table = _spectrum_table(result.spectrum,
                            k_cut=2.5 * k_theory if p["mu"] > 0 else 10.0)
    return RunResult(tables={"ks_spectrum.csv": table}, metrics=metrics)


@register("nls-mi",
          "Focusing envelope plane-wave sidebands vs the closed-form band",
          {"A": 1.0, "L": 16.0 * math.pi, "n": 1024, "t_end": 6.5,
           "seed": 12345, "amp": 1e-3, "dt": 1e-3, "record_every": 0.1})
def _run_nls(p):
    # the noise seeds half a band past the edge so stable-side slopes are a
    # real measurement rather than mixing debris
    model = patstab.NlsCw(mu=1.0, A=p["A"])
    result = patstab.simulate(model,
                              patstab.CwPlusNoise(p["A"], p["amp"],
                                                  band_factor=1.5),
                              L=p["L"], n=p["n"], t_end=p["t_end"],
                              seed=p["seed"], dt=p["dt"],
                              record_every=p["record_every"])
    meas, metrics = _mi_metrics(result, p["amp"], math.sqrt(2.0) * p["A"])
    # stable-side check over the whole linear stage (out-of-band bins never
    # saturate): bins whose modulus beat fits in the window have near-zero
    # fitted slopes, and every outside bin stays amplitude-bounded while
    # the band grows by orders of magnitude
    window = (0.0, metrics["window_t1"])
    span = window[1] - window[0]
    edge = patstab.measure_dominant_k(result.spectrum, window,
                                      min_start_mag=0.3 * p["amp"])
    beyond = edge.k_bins > 2.0 * p["A"]
    finite = np.isfinite(edge.slopes)
    beat = np.full_like(edge.k_bins, math.inf)
    osc = edge.k_bins**4 / 4.0 - edge.k_bins**2 * p["A"] ** 2
    has_beat = osc > 0
    beat[has_beat] = math.pi / np.sqrt(osc[has_beat])
    resolved = beyond & finite & (beat <= span)
    metrics["max_slope_beyond_band_resolved"] = (
        float(np.max(edge.slopes[resolved])) if np.any(resolved) else math.nan)
    sp = result.spectrum
    tsel = (sp.times >= window[0]) & (sp.times <= window[1])
    pos = sp.k > 2.0 * p["A"]
    mags = sp.mags[np.ix_(tsel, pos)]
    seeded = mags[0] > 0.3 * p["amp"]
    ratios = np.max(mags[:, seeded], axis=0) / mags[0, seeded]
    metrics["max_bounded_ratio_beyond_band"] = float(np.max(ratios))
    metrics["n_bins_beyond_band"] = int(np.sum(beyond & finite))
    table = _spectrum_table(result.spectrum, k_cut=3.0 * p["A"])
    return RunResult(tables={"nls_spectrum.csv": table}, metrics=metrics)


@register("soliton-damping",
          "Damped soliton peak decay vs the slow-flow rate",
          {"gamma": 1.0, "eps": 0.05, "t_end": 10.0, "n": 1024,
           "L": 16.0 * math.pi, "dt": 1e-3})
def _run_soliton(p):
    res = patstab.soliton_decay_experiment(p["gamma"], p["eps"], p["t_end"],
                                           L=p["L"], n=p["n"], dt=p["dt"])
    table = Table(["t", "peak"], [[t, v] for t, v in zip(res.times, res.peaks)])
    predicted_ratio = math.exp(res.predicted * p["t_end"])
    return RunResult(
        tables={"soliton_decay.csv": table},
        metrics={"rate_fitted": res.rate, "rate_theory": res.predicted,
                 "rate_rel_error": (abs(res.rate - res.predicted)
                                    / abs(res.predicted) if res.predicted else abs(res.rate)),
                 "amplitude_ratio": res.amplitude_ratio,
                 "amplitude_ratio_theory": predicted_ratio})


@register("lpm-spectrum",
          "Discrete spectra of the linearized soliton operators",
          {"halfwidth": 20.0, "n": 2000})
def _run_lpm(p):
    rows = []
    metrics = {}
    for op, name in ((patstab.SechOperator.L_MINUS, "L-"),
                     (patstab.SechOperator.L_PLUS, "L+")):
        spec = patstab.lpm_spectrum(op, p["halfwidth"], p["n"])
        for v in spec.discrete:
            rows.append([name, float(v)])
        metrics[f"{name}_discrete"] = [float(v) for v in spec.discrete]
        metrics[f"{name}_continuum_edge"] = spec.continuum_edge
    table = Table(["operator", "eigenvalue"], rows)
    return RunResult(tables={"lpm_spectrum.csv": table}, metrics=metrics)


@register("opo-threshold",
          "Parametric-oscillator pump threshold",
          {"alpha": 1.0, "Delta1": 0.0, "Delta2": 0.0, "S": 0.5})
def _run_opo(p):
    th = patstab.opo_threshold(p["alpha"], p["Delta1"], p["Delta2"])
    pump = th.steady_pump(p["S"])
    table = Table(["alpha", "Delta1", "Delta2", "re_S_c", "im_S_c", "abs_S_c"],
                  [[p["alpha"], p["Delta1"], p["Delta2"],
                    th.S_c.real, th.S_c.imag, th.abs_S_c]])
    return RunResult(tables={"opo_threshold.csv": table},
                     metrics={"abs_S_c": th.abs_S_c,
                              "signal_stable_at_S": th.signal_stable(p["S"]),
                              "steady_pump_re": pump.real,
                              "steady_pump_im": pump.imag})


# ---------------------------------------------------------------------------
# waveguide modes and switching


@register("well-modes",
          "Bound modes of the square-well waveguide",
          {"halfwidth": 40.0, "n": 2048})
def _run_well_modes(p):
    modes = modecouple.well_modes(p["halfwidth"], p["n"])
    rows = [[i + 1, float(v)] for i, v in enumerate(modes.lambdas)]
    table = Table(["n", "lambda"], rows)
    return RunResult(tables={"well_modes.csv": table},
                     metrics={"n_bound": int(modes.lambdas.size),
                              "lambdas": [float(v) for v in modes.lambdas]})


@register("mode-switch",
          "Resonant index-modulation energy transfer between modes",
          {"eps": 0.2, "omega": 0.0, "t_on": 0.0, "t_off": 1000.0,
           "halfwidth": 40.0, "n": 2048, "dt": 0.02, "record_every": 5.0,
           "from_mode": 1, "to_mode": 3})
def _run_mode_switch(p):
    modes = modecouple.well_modes(p["halfwidth"], p["n"])
    omega = p["omega"] if p["omega"] != 0.0 else None
    res = modecouple.resonant_switch_experiment(
        modes, from_mode=p["from_mode"], to_mode=p["to_mode"], eps=p["eps"],
        omega=omega, t_on=p["t_on"], t_off=p["t_off"], dt=p["dt"],
        record_every=p["record_every"])
    header = ["t"] + [f"E{i + 1}" for i in range(res.energies.shape[1])]
    rows = [[t] + list(map(float, row))
            for t, row in zip(res.times, res.energies)]
    table = Table(header, rows)
    idx = p["to_mode"] - 1
    return RunResult(
        tables={"mode_switch.csv": table},
        metrics={"omega": res.omega,
                 "final_target_energy": float(res.energies[-1, idx]),
                 "final_source_energy": float(res.energies[-1, p["from_mode"] - 1]),
                 "max_leakage": float(np.max(np.abs(res.leakage))),
                 "norm_drift": float(np.max(np.abs(res.norm - res.norm[0])))})


# ---------------------------------------------------------------------------
# Floquet and return maps


_VARIANTS = {v.value: v for v in floquet.HillVariant}


@register("floquet-chart",
          "Discriminant vs forcing frequency with stability boundaries",
          {"variant": "linear-down", "delta": 1.0, "eps": 0.5,
           "omega_min": 1.0, "omega_max": 10.0, "n_omega": 46, "tol": 1e-10})
def _run_floquet_chart(p):
    if p["variant"] not in _VARIANTS:
        raise BadParameterError(
            f"variant must be one of {sorted(_VARIANTS)}, got {p['variant']!r}")
    omegas = np.linspace(p["omega_min"], p["omega_max"], p["n_omega"])
    chart = floquet.stability_chart(_VARIANTS[p["variant"]], p["delta"],
                                    p["eps"], omegas, tol=p["tol"])
    rows = [[r.omega, r.Gamma, r.stable] for r in chart.rows]
    table = Table(["omega", "Gamma", "stable"], rows)
    return RunResult(tables={"floquet_chart.csv": table},
                     metrics={"boundaries": [float(b) for b in chart.boundaries],
                              "n_unstable": int(sum(not r.stable for r in chart.rows))})


@register("floquet-gamma",
          "Square-wave closed-form discriminant vs the integrated one",
          {"delta": 0.1, "eps": 0.5, "omega": 5.0, "tol": 1e-11})
def _run_floquet_gamma(p):
    closed = floquet.mathieu_piecewise_gamma(p["delta"], p["eps"], p["omega"])
    prob = floquet.HillProblem(floquet.HillVariant.PIECEWISE_INVERTED,
                               p["delta"], p["eps"], p["omega"])
    rk = floquet.discriminant(prob, tol=p["tol"])
    table = Table(["omega", "Gamma_closed", "Gamma_rk", "stable"],
                  [[p["omega"], closed, rk.Gamma, rk.stable]])
    return RunResult(tables={"floquet_gamma.csv": table},
                     metrics={"Gamma_closed": closed, "Gamma_rk": rk.Gamma,
                              "gap": abs(closed - rk.Gamma)})


@register("poincare",
          "Strobed return map of the damped-driven bistable oscillator",
          {"delta": 0.1, "kappa": 0.25, "gamma": 1.5, "omega": 1.0,
           "n_points": 500, "transient": 100, "k_max": 8, "cycle_tol": 1e-3,
           "tol": 1e-9})
def _run_poincare(p):
    params = floquet.DuffingChaosParams(delta=p["delta"], kappa=p["kappa"],
                                        gamma=p["gamma"], omega=p["omega"])
    pts = floquet.poincare_map(params, n_points=p["n_points"],
                               transient=p["transient"], tol=p["tol"])
    cycle = floquet.detect_cycle(pts, p["k_max"], p["cycle_tol"])
    table = Table(["x", "xdot"], [[float(a), float(b)] for a, b in pts])
    return RunResult(tables={"poincare.csv": table},
                     metrics={"cycle_period": cycle if cycle is not None else "none",
                              "n_points": p["n_points"]})
