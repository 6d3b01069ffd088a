import math

import numpy as np
import pytest

from apx import asympt
from apx.numkit import fft, solve_ode


def _rk(kind, eps, t_end, y0, tol=1e-11):
    sys = asympt.oscillator_system(kind, eps)
    return solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, t_end,
                     np.asarray(y0, dtype=float), tol)


# ---------------------------------------------------------------------------
# regular perturbation catalog


def test_reg_ivp_unperturbed_is_cosh():
    t = np.linspace(0.0, 2.0, 21)
    assert np.allclose(asympt.reg_ivp_eval(1.0, 0.0, 0.0, t), np.cosh(t), atol=1e-14)


def test_reg_ivp_correction_initial_conditions():
    # u1(0) = 0 and u1'(0) = 0 for any (A, B): difference quotient check
    h = 1e-6
    for A, B in ((1.0, 0.0), (0.5, -0.3), (2.0, 1.0)):
        u1 = lambda t: (asympt.reg_ivp_eval(A, B, 1.0, t)
                        - asympt.reg_ivp_order0(A, B, t))
        assert abs(u1(0.0)) < 1e-12
        assert abs((u1(h) - u1(-h)) / (2 * h)) < 1e-8


def test_reg_ivp_error_is_second_order():
    A, B, t1 = 1.0, 0.0, 1.0
    errs = []
    for eps in (0.01, 0.005):
        traj = _rk("reg-ivp", eps, t1, [A, B])
        errs.append(abs(asympt.reg_ivp_eval(A, B, eps, t1) - traj.final[0]))
    assert errs[0] <= 5.0 * 0.01**2
    assert errs[0] / errs[1] > 3.4  # O(eps^2)


def test_reg_bvp_boundary_values():
    assert asympt.reg_bvp_eval(0.0, 0.0, 0.5) == 0.0
    assert asympt.reg_bvp_eval(1.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert asympt.reg_bvp_eval(1.0, 0.0, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_reg_bvp_vs_shooting_oracle():
    A, B, eps = 1.0, 0.0, 0.05

    def shoot(slope):
        sys = asympt.oscillator_system("reg-ivp", eps)
        return solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, 1.0,
                         [A, slope], 1e-11).final[0] - B

    lo, hi = -3.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if shoot(lo) * shoot(mid) <= 0:
            hi = mid
        else:
            lo = mid
    slope = 0.5 * (lo + hi)
    sys = asympt.oscillator_system("reg-ivp", eps)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, 1.0,
                     [A, slope], 1e-11)
    xs = np.linspace(0.0, 1.0, 51)
    u_num = np.interp(xs, traj.t, traj.y[:, 0])
    gap = np.max(np.abs(u_num - asympt.reg_bvp_eval(A, B, xs)))
    assert gap < 3.0 * eps  # leading-order truncation is O(eps)


def test_eig_perturb_values():
    lam1, _ = asympt.eig_perturb(1, 1.0, [2.0])
    assert lam1 == 2.0
    lam1, coeffs = asympt.eig_perturb(1, 1.0, [0.0, 1.0])
    assert lam1 == 0.0
    assert coeffs[1] == pytest.approx(1.0 / ((1 - 4) * math.pi**2))
    # a_n = 0 -> no eigenvalue shift
    assert asympt.eig_perturb(2, 3.0, [1.0, 0.0, 1.0])[0] == 0.0


def test_secular_term_grows_linearly():
    A = 1.0
    ts = np.array([(k + 0.25) * 2.0 * math.pi for k in (1, 2, 4, 8)])
    vals = np.abs(asympt.naive_secular_term(A, ts))
    assert np.allclose(vals / ts, 1.0, atol=1e-12)  # |u1| = A t at quarter phase


# ---------------------------------------------------------------------------
# frequency corrections


def test_omega1_cubic():
    assert asympt.pl_omega1(lambda u: -(u**3), 1.0) == pytest.approx(3.0 / 8.0, abs=1e-12)


def test_omega1_even_nonlinearity_vanishes():
    for A in (0.5, 1.0, 2.0):
        assert abs(asympt.pl_omega1(lambda u: -(u**2), A)) < 1e-12


def test_omega1_linear_matches_sqrt_expansion():
    assert asympt.pl_omega1(lambda u: -u, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_omega1_amplitude_scaling_for_cubic():
    base = asympt.pl_omega1(lambda u: -(u**3), 1.0)
    for A in (0.5, 1.5, 3.0):
        got = asympt.pl_omega1(lambda u: -(u**3), A)
        assert got == pytest.approx(A * A * base, rel=1e-10)


def test_duffing_pl_reduces_at_zero_eps():
    t = np.linspace(0.0, 10.0, 101)
    assert np.allclose(asympt.duffing_pl_eval(1.0, 0.0, t), np.sin(t), atol=1e-14)


def test_duffing_period_measured():
    eps, A = 0.05, 1.0
    traj = _rk("duffing", eps, 80.0, [0.0, A])
    period = asympt.measure_period(traj.t, traj.y[:, 0])
    predicted = 2.0 * math.pi / asympt.duffing_frequency(A, eps)
    assert abs(period - predicted) < 10.0 * eps**2


def test_duffing_third_harmonic_amplitude():
    eps, A = 0.05, 1.0
    w = asympt.duffing_frequency(A, eps)
    T = 2.0 * math.pi / w
    n, cycles = 1024, 32
    traj = _rk("duffing", eps, cycles * T, [0.0, A])
    ts = np.linspace(0.0, cycles * T, n, endpoint=False)
    us = np.interp(ts, traj.t, traj.y[:, 0])
    spec = np.abs(fft(us)) / n
    fundamental_bin = cycles
    third_bin = 3 * cycles
    third_amp = 2.0 * spec[third_bin]  # one-sided amplitude
    predicted = eps * A**3 / 32.0
    assert predicted / 1.5 <= third_amp <= predicted * 1.5
    assert 2.0 * spec[fundamental_bin] == pytest.approx(A, rel=0.05)


def test_vdp_pl_amplitude_at_zero():
    assert asympt.vdp_pl_eval(0.0, 0.0) == pytest.approx(2.0)


def test_vdp_limit_cycle_amplitude(vdp_long_run):
    assert abs(vdp_long_run["amplitude"] - 2.0) <= 0.05


def test_vdp_measured_period_is_classical(vdp_long_run):
    # the measured frequency correction is -eps^2/16 (the classical series),
    # resolved here to well under a ppm
    eps = vdp_long_run["eps"]
    classical = 2.0 * math.pi / (1.0 - eps * eps / 16.0)
    assert abs(vdp_long_run["period"] - classical) / classical < 1e-5


@pytest.mark.xfail(strict=True,
                   reason="printed second frequency correction (+7/16) "
                          "disagrees with the integrator and the classical "
                          "series (-1/16); the 0.5% tolerance misses by "
                          "~3 ppm of the period (see decisions ledger)")
def test_vdp_period_against_printed_correction(vdp_long_run):
    eps = vdp_long_run["eps"]
    predicted = 2.0 * math.pi / asympt.vdp_frequency(eps)
    assert abs(vdp_long_run["period"] - predicted) / predicted <= 0.005


# ---------------------------------------------------------------------------
# multiple scales


def test_ms_damped_reduces_at_zero_eps():
    t = np.linspace(0.0, 10.0, 101)
    assert np.allclose(asympt.ms_damped_eval(1.0, 0.0, t), np.cos(t), atol=1e-14)


def test_ms_damped_vs_exact():
    eps, alpha = 0.1, 1.0
    err = abs(asympt.ms_damped_eval(alpha, eps, 10.0)
              - asympt.ms_damped_exact(alpha, eps, 10.0))
    assert err <= 3.0 * eps


def test_ms_damped_exact_solves_ode():
    eps, alpha = 0.07, 1.3
    traj = _rk("ms-damped", eps, 12.0, [alpha, 0.0])
    assert abs(traj.final[0] - asympt.ms_damped_exact(alpha, eps, 12.0)) < 1e-8


def test_ms_damped_envelope_bound():
    eps, alpha = 0.1, 1.0
    t = np.linspace(0.0, 60.0, 601)
    assert np.all(np.abs(asympt.ms_damped_eval(alpha, eps, t))
                  <= alpha * np.exp(-eps * t) + 1e-14)


def test_vdp_ms_on_cycle_amplitude_constant():
    t = np.linspace(0.0, 50.0, 501)
    amp = asympt.vdp_ms_amplitude(2.0, 0.1, t)
    assert np.allclose(amp, 2.0, atol=1e-13)


def test_vdp_ms_limit():
    assert asympt.vdp_ms_amplitude(0.5, 0.1, 1e6) == pytest.approx(2.0, abs=1e-9)


def test_vdp_ms_envelope_vs_rk():
    eps, alpha = 0.1, 0.5
    traj = _rk("vdp", eps, 50.0, [alpha, 0.0], tol=1e-10)
    # peaks of |u| against predicted envelope
    a = np.abs(traj.y[:, 0])
    idx = np.nonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    idx = idx[a[idx] > 0.2]
    env = asympt.vdp_ms_amplitude(alpha, eps, traj.t[idx])
    rel = np.abs(a[idx] - env) / env
    assert np.max(rel) <= 0.10


# ---------------------------------------------------------------------------
# convergence-order sweep (asymptotic error halves at claimed order)


@pytest.mark.parametrize("kind,order", [("reg-ivp", 2), ("duffing", 1), ("ms-damped", 1)])
def test_catalog_convergence_order(kind, order):
    # the strained-time object pins its correction ICs in stretched time, so
    # against the (0, A) run its max-norm error is first order in eps; the
    # two-term regular expansion is second order
    window = 10.0
    errs = []
    for eps in (0.1, 0.05):
        if kind == "reg-ivp":
            traj = _rk(kind, eps, 2.0, [1.0, 0.0])
            ts = np.linspace(0.0, 2.0, 41)
            asym = asympt.reg_ivp_eval(1.0, 0.0, eps, ts)
        elif kind == "duffing":
            traj = _rk(kind, eps, window, [0.0, 1.0])
            ts = np.linspace(0.0, window, 201)
            asym = asympt.duffing_pl_eval(1.0, eps, ts)
        else:
            traj = _rk(kind, eps, window, [1.0, 0.0])
            ts = np.linspace(0.0, window, 201)
            asym = asympt.ms_damped_eval(1.0, eps, ts)
        num = np.interp(ts, traj.t, traj.y[:, 0])
        errs.append(np.max(np.abs(num - asym)))
    ratio = errs[0] / errs[1]
    assert ratio >= (3.4 if order == 2 else 1.7)


# ---------------------------------------------------------------------------
# response curves


def test_undamped_response_branches():
    kappa, omega = 1.0, 1.5
    pts = asympt.duffing_response(kappa, 0.0, 0.0, [omega])
    roots = pts[0].amplitudes
    expected = math.sqrt(4.0 * (omega**2 - 1.0) / (3.0 * kappa))
    assert sorted(np.round(roots, 10)) == pytest.approx(
        sorted([-expected, 0.0, expected]), abs=1e-10)


def test_damped_response_zero_forcing():
    pts = asympt.duffing_response(1.0, 0.0, 0.1, [0.5])
    assert pts[0].amplitudes == [0.0]


def test_damped_response_cusp_window():
    betas = np.linspace(-0.5, 2.0, 401)
    pts = asympt.duffing_response(1.0, 0.2, 0.1, betas)
    multi = [p.omega for p in pts if len(p.amplitudes) == 3]
    assert multi, "no multivalued window found"
    assert min(multi) > 0.0  # window sits at positive beta (stiffening side)


def test_damped_response_roots_satisfy_relation():
    betas = np.linspace(-0.5, 2.0, 101)
    pts = asympt.duffing_response(1.0, 0.2, 0.1, betas)
    for p in pts:
        for R in p.amplitudes:
            res = asympt.damped_response_residual(R, p.omega, 0.1, 0.2)
            assert abs(res) <= 1e-10


def test_undamped_response_roots_satisfy_relation():
    omegas = np.linspace(0.5, 2.0, 41)
    pts = asympt.duffing_response(1.0, 0.3, 0.0, omegas)
    for p in pts:
        for A in p.amplitudes:
            res = 0.75 * 1.0 * A**3 + (1.0 - p.omega**2) * A - 0.3
            assert abs(res) <= 1e-10
