"""Perturbation-method catalog: regular expansions, a quadrature-based
strained-time (frequency-correction) engine, multiple-scales closed forms,
and forced-oscillator response curves, with measurement helpers for the
numerical cross-checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numkit import OdeSystem, Trajectory, quad, solve_ode


# ---------------------------------------------------------------------------
# regular perturbation catalog


def reg_ivp_eval(A: float, B: float, eps: float, t):
    """Two-term expansion for u'' - u = eps u^2 with u(0)=A, u'(0)=B."""
    t = np.asarray(t, dtype=float)
    u0 = 0.5 * (A + B) * np.exp(t) + 0.5 * (A - B) * np.exp(-t)
    u1 = ((A * A - 2 * A * B - 2 * B * B) / 6.0 * np.exp(t)
          + (A * A + 2 * A * B - 2 * B * B) / 6.0 * np.exp(-t)
          + (A + B) ** 2 / 12.0 * np.exp(2 * t)
          + (A - B) ** 2 / 12.0 * np.exp(-2 * t)
          - (A * A - B * B) / 2.0)
    out = u0 + eps * u1
    return out if out.shape else float(out)


def reg_ivp_order0(A: float, B: float, t):
    t = np.asarray(t, dtype=float)
    out = 0.5 * (A + B) * np.exp(t) + 0.5 * (A - B) * np.exp(-t)
    return out if out.shape else float(out)


def reg_bvp_eval(A: float, B: float, x):
    """Leading-order solution of u'' - u = eps u^2 with u(0)=A, u(1)=B:

        u0 = (A - B e)/(1 - e^2) exp(x) - (e A - B)/(1 - e^2) exp(1 - x),

    which meets both boundary values exactly.
    """
    x = np.asarray(x, dtype=float)
    e = math.e
    c1 = (A - B * e) / (1.0 - e * e)
    c2 = (e * A - B) / (1.0 - e * e)
    out = c1 * np.exp(x) - c2 * np.exp(1.0 - x)
    return out if out.shape else float(out)


def eig_perturb(n: int, A: float, f_coeffs: Sequence[float]):
    """First eigenvalue correction and correction-series coefficients for
    u'' + lambda u = eps f with Dirichlet conditions on [0, 1].

    ``f_coeffs[m-1]`` is the coefficient of sin(m pi x) in f.  Returns
    (lambda_1, coefficient list for u_1 with the resonant term normalized
    to zero).
    """
    if A == 0.0:
        raise ValueError("A must be nonzero")
    a = list(f_coeffs)
    a_n = a[n - 1] if n - 1 < len(a) else 0.0
    lam1 = a_n / A
    coeffs = []
    for m1, am in enumerate(a):
        m = m1 + 1
        if m == n:
            coeffs.append(0.0)  # C = 0 normalization
        else:
            coeffs.append(am / ((n * n - m * m) * math.pi**2))
    return lam1, coeffs


def naive_secular_term(A: float, t):
    """First correction of the naive regular expansion of
    u'' + (1 + eps)^2 u = 0: grows linearly in t."""
    t = np.asarray(t, dtype=float)
    out = -A * t * np.sin(t)
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# strained-time (frequency-correction) engine


def pl_omega1(f, A: float, n: int = 2048) -> float:
    """First frequency correction for u'' + u = eps f(u) with u0 = A sin(tau):
    removing the resonant projection gives
    omega_1 = -(1/(2 pi A)) int_0^{2pi} f(A sin tau) sin tau dtau."""
    if A == 0.0:
        raise ValueError("A must be nonzero")
    val = quad(lambda tau: np.asarray(f(A * np.sin(tau))) * np.sin(tau),
               0.0, 2.0 * math.pi, n)
    return -val / (2.0 * math.pi * A)


def duffing_pl_eval(A: float, eps: float, t):
    """Two-term strained-time solution of u'' + u + eps u^3 = 0 with
    u(0) = 0, u'(0) = A."""
    t = np.asarray(t, dtype=float)
    tau = (1.0 + 3.0 * eps * A * A / 8.0) * t
    out = (A * np.sin(tau)
           + eps * (3.0 * A**3 / 32.0 * np.sin(tau) - A**3 / 32.0 * np.sin(3.0 * tau)))
    return out if out.shape else float(out)


def duffing_frequency(A: float, eps: float) -> float:
    return 1.0 + 3.0 * eps * A * A / 8.0


def vdp_pl_eval(eps: float, t):
    """Limit-cycle solution of the van der Pol oscillator through second
    order in the frequency: amplitude 2, omega = 1 + 7 eps^2 / 16."""
    t = np.asarray(t, dtype=float)
    w = 1.0 + 7.0 * eps * eps / 16.0
    out = (2.0 * np.cos(w * t)
           + eps * (0.75 * np.sin(w * t) - 0.25 * np.sin(3.0 * w * t)))
    return out if out.shape else float(out)


def vdp_frequency(eps: float) -> float:
    return 1.0 + 7.0 * eps * eps / 16.0


# ---------------------------------------------------------------------------
# multiple scales


def ms_damped_eval(alpha: float, eps: float, t):
    """Leading multiple-scales solution of u'' + 2 eps u' + (1 + eps) u = 0:
    u0 = alpha exp(-eps t) cos(t + eps t / 2)."""
    t = np.asarray(t, dtype=float)
    tau = eps * t
    out = alpha * np.exp(-tau) * np.cos(t + tau / 2.0)
    return out if out.shape else float(out)


def ms_damped_exact(alpha: float, eps: float, t):
    """Exact solution of the same oscillator for comparison."""
    t = np.asarray(t, dtype=float)
    w = math.sqrt(1.0 + eps - eps * eps)
    out = (alpha * np.exp(-eps * t) * np.cos(w * t)
           + eps * alpha / w * np.exp(-eps * t) * np.sin(w * t))
    return out if out.shape else float(out)


def vdp_ms_eval(alpha: float, eps: float, t):
    """Transient-capturing multiple-scales solution of van der Pol:
    amplitude rho(tau)^(1/2) relaxes onto the limit cycle of radius 2."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    t = np.asarray(t, dtype=float)
    tau = eps * t
    amp = 2.0 * alpha / np.sqrt(alpha * alpha + (4.0 - alpha * alpha) * np.exp(-tau))
    out = amp * np.cos(t)
    return out if out.shape else float(out)


def vdp_ms_amplitude(alpha: float, eps: float, t):
    t = np.asarray(t, dtype=float)
    tau = eps * t
    out = 2.0 * alpha / np.sqrt(alpha * alpha + (4.0 - alpha * alpha) * np.exp(-tau))
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# response curves


@dataclass
class ResponsePoint:
    omega: float  # driving frequency, or beta = omega^2 - 1 for the damped form
    amplitudes: list


def cubic_real_roots(c3: float, c2: float, c1: float, c0: float,
                     imag_tol: float = 1e-10) -> list:
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (Cardano), ascending."""
    if c3 == 0.0:
        if c2 == 0.0:
            return [] if c1 == 0.0 else [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return sorted([(-c1 - r) / (2 * c2), (-c1 + r) / (2 * c2)])
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    roots = []
    if disc > 0:
        s = cmath.sqrt(disc)
        u = (-q / 2.0 + s) ** (1.0 / 3.0)
        # real cube roots of possibly negative reals
        u = math.copysign(abs(-q / 2.0 + s.real) ** (1.0 / 3.0), (-q / 2.0 + s.real))
        v = math.copysign(abs(-q / 2.0 - s.real) ** (1.0 / 3.0), (-q / 2.0 - s.real))
        roots = [u + v + shift]
    else:
        r = math.sqrt(max(-(p / 3.0) ** 3, 0.0))
        if r == 0.0:
            roots = [shift, shift, shift] if q == 0.0 else [shift - math.copysign(abs(q) ** (1 / 3), q)]
        else:
            phi = math.acos(max(-1.0, min(1.0, -q / (2.0 * r))))
            m = 2.0 * math.sqrt(-p / 3.0)
            roots = [m * math.cos((phi + 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]
    cleaned = []
    for x in roots:
        val = ((x + a) * x + b) * x + c
        # one Newton polish against the monic cubic
        der = (3.0 * x + 2.0 * a) * x + b
        if der != 0.0:
            x -= val / der
        cleaned.append(x)
    return sorted(cleaned)


def duffing_response(kappa: float, gamma: float, delta: float, omega_grid) -> list:
    """Forced-oscillator response curves.

    With ``delta == 0`` (no damping): for each omega in the grid, the real
    amplitudes A solving (3 kappa / 4) A^3 + (1 - omega^2) A - gamma = 0,
    equivalent to omega^2 = 1 + (3/4) kappa A^2 - gamma / A.

    With ``delta > 0``: the scaled damped relation; ``delta`` and ``gamma``
    are the scaled damping and forcing (Delta, Gamma) and the grid holds
    beta = omega^2 - 1 values.  The returned amplitudes are the real
    nonnegative R with R^2 {Delta^2 + (beta - 3 R^2 / 4)^2} = Gamma^2.
    """
    points = []
    if delta == 0.0:
        for w in np.asarray(omega_grid, dtype=float):
            roots = cubic_real_roots(0.75 * kappa, 0.0, 1.0 - w * w, -gamma)
            points.append(ResponsePoint(omega=float(w), amplitudes=roots))
        return points
    for beta in np.asarray(omega_grid, dtype=float):
        # cubic in z = R^2: (9/16) z^3 - (3/2) beta z^2 + (Delta^2 + beta^2) z - Gamma^2
        roots = cubic_real_roots(9.0 / 16.0, -1.5 * beta,
                                 delta * delta + beta * beta, -gamma * gamma)
        amps = [math.sqrt(max(z, 0.0)) for z in roots if z >= -1e-12]
        points.append(ResponsePoint(omega=float(beta), amplitudes=amps))
    return points


def damped_response_residual(R: float, beta: float, Delta: float, Gamma: float) -> float:
    return R * R * (Delta * Delta + (beta - 0.75 * R * R) ** 2) - Gamma * Gamma


# ---------------------------------------------------------------------------
# measurement helpers for the oscillator cross-checks


def oscillator_system(kind: str, eps: float) -> OdeSystem:
    """RK-ready first-order forms of the cataloged oscillators."""
    if kind == "duffing":
        rhs = lambda t, y, p: np.array([y[1], -y[0] - eps * y[0] ** 3])
    elif kind == "vdp":
        rhs = lambda t, y, p: np.array([y[1], -y[0] - eps * (y[0] ** 2 - 1.0) * y[1]])
    elif kind == "reg-ivp":
        rhs = lambda t, y, p: np.array([y[1], y[0] + eps * y[0] ** 2])
    elif kind == "ms-damped":
        rhs = lambda t, y, p: np.array([y[1], -2.0 * eps * y[1] - (1.0 + eps) * y[0]])
    else:
        raise KeyError(f"unknown oscillator {kind!r}")
    return OdeSystem(dim=2, rhs=rhs)


def upward_crossings(t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Times of upward zero crossings of a sampled signal, by linear
    interpolation between accepted steps."""
    s = np.sign(u)
    idx = np.nonzero((s[:-1] <= 0) & (s[1:] > 0))[0]
    times = []
    for i in idx:
        if u[i + 1] == u[i]:
            continue
        frac = -u[i] / (u[i + 1] - u[i])
        times.append(t[i] + frac * (t[i + 1] - t[i]))
    return np.array(times)


def measure_period(t: np.ndarray, u: np.ndarray, discard_before: float = 0.0) -> float:
    """Mean spacing of upward zero crossings after a transient."""
    times = upward_crossings(t, u)
    times = times[times >= discard_before]
    if times.size < 3:
        raise ValueError("not enough crossings to measure a period")
    return float(np.mean(np.diff(times)))


def limit_cycle_amplitude(traj: Trajectory, eps: float, periods: float = 5.0,
                          period_guess: float = 2 * math.pi) -> float:
    """Max |u| over the last few periods after discarding the slow transient
    (t < 30 / max(eps, 0.05))."""
    t_min = 30.0 / max(eps, 0.05)
    t_lo = max(t_min, traj.t[-1] - periods * period_guess)
    mask = traj.t >= t_lo
    if not np.any(mask):
        raise ValueError(f"trajectory ends at t={traj.t[-1]:.3g}, before the "
                         f"transient cutoff {t_lo:.3g}")
    return float(np.max(np.abs(traj.y[mask, 0])))
