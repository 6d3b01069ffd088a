"""Boundary-layer solutions and layer-location logic, the exponential-phase
(WKB) term hierarchy with its validity bookkeeping and eigenvalue formulas,
and the Rayleigh relaxation oscillator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import TurningPointError, UnsupportedLayerError
from .numkit import (OdeSystem, Trajectory, eig_sym_tridiag, find_root,
                     gauss_quad, quad, solve_ode)
from .asympt import upward_crossings


# ---------------------------------------------------------------------------
# boundary layers


def bl_example1(eps: float, x):
    """Exact and leading-order uniform solutions of
    eps u'' + (1 + eps) u' + u = 0, u(0) = 0, u(1) = 1.

    Returns (exact, uniform) where uniform = exp(1 - x) - exp(1 - x/eps).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    exact = (np.exp(-x) - np.exp(-x / eps)) / (math.exp(-1.0) - math.exp(-1.0 / eps))
    uniform = np.exp(1.0 - x) - np.exp(1.0 - x / eps)
    if exact.shape:
        return exact, uniform
    return float(exact), float(uniform)


class LayerSide(Enum):
    LEFT = "left"
    RIGHT = "right"
    INTERNAL = "internal"


@dataclass
class LayerReport:
    location: LayerSide
    width_exponent: Fraction
    x_star: Optional[float] = None
    reason: str = ""


def layer_locate(b, domain, n_samples: int = 257) -> LayerReport:
    """Boundary-layer location for eps u'' + b(x) u' + c(x) u = 0.

    Sign-definite b puts an O(eps) layer at the inflow end (the inner
    exponential is bounded only there); a single simple zero of b produces
    an internal layer of width eps^(1/2).
    """
    x0, x1 = domain
    xs = np.linspace(x0, x1, n_samples)
    try:
        bs = np.asarray(b(xs), dtype=float)
        if bs.shape != xs.shape:
            raise ValueError
    except Exception:
        bs = np.array([float(b(v)) for v in xs])
    if np.all(bs > 0):
        return LayerReport(LayerSide.LEFT, Fraction(1),
                           reason="b > 0: inner exponential bounded only at the left end")
    if np.all(bs < 0):
        return LayerReport(LayerSide.RIGHT, Fraction(1),
                           reason="b < 0: inner exponential bounded only at the right end")
    sign_flips = np.nonzero(np.sign(bs[:-1]) * np.sign(bs[1:]) < 0)[0]
    zeros = [find_root(b, (xs[i], xs[i + 1])) for i in sign_flips]
    zeros += [float(xs[i]) for i in np.nonzero(bs == 0.0)[0] if x0 < xs[i] < x1]
    zeros = sorted(set(round(z, 12) for z in zeros))
    if len(zeros) != 1:
        raise UnsupportedLayerError(f"b has {len(zeros)} interior zeros; need exactly one")
    z = zeros[0]
    h = 1e-6 * max(1.0, abs(z))
    slope = (float(b(z + h)) - float(b(z - h))) / (2.0 * h)
    if slope == 0.0:
        raise UnsupportedLayerError("zero of b is not simple")
    return LayerReport(LayerSide.INTERNAL, Fraction(1, 2), x_star=z,
                       reason="simple interior zero of b: dominant balance gives width eps^(1/2)")


def bl_double_uniform(eps: float, x):
    """Two-layer uniform solution of eps u'' - x^2 u' - u = 0 with
    u(0) = u(1) = 1: exp(-x/sqrt(eps)) + exp(-(1-x)/eps)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-x / math.sqrt(eps)) + np.exp(-(1.0 - x) / eps)
    return out if out.shape else float(out)


def bl_double_collocation(eps: float, n: int = 2000) -> tuple:
    """Finite-difference oracle for the double-layer problem on a stretched
    grid (clustered at both ends).  Returns (x nodes, u values)."""
    # map s in [0,1] -> x with tanh clustering at both endpoints
    s = np.linspace(0.0, 1.0, n + 1)
    beta = 6.0
    raw = np.tanh(beta * (s - 0.5))
    x = (raw - raw[0]) / (raw[-1] - raw[0])
    m = n - 1
    A = np.zeros((m, m))
    rhs = np.zeros(m)
    for i in range(1, n):
        hm = x[i] - x[i - 1]
        hp = x[i + 1] - x[i]
        # second-order nonuniform stencils
        a2 = 2.0 / (hm * (hm + hp))
        b2 = -2.0 / (hm * hp)
        c2 = 2.0 / (hp * (hm + hp))
        a1 = -hp / (hm * (hm + hp))
        b1 = (hp - hm) / (hm * hp)
        c1 = hm / (hp * (hm + hp))
        bx = -x[i] ** 2
        row = i - 1
        diag = eps * b2 + bx * b1 - 1.0
        lo = eps * a2 + bx * a1
        hi = eps * c2 + bx * c1
        A[row, row] = diag
        if row > 0:
            A[row, row - 1] = lo
        else:
            rhs[row] -= lo * 1.0  # u(0) = 1
        if row < m - 1:
            A[row, row + 1] = hi
        else:
            rhs[row] -= hi * 1.0  # u(1) = 1
    u = np.linalg.solve(A, rhs)
    return x, np.r_[1.0, u, 1.0]


# ---------------------------------------------------------------------------
# WKB hierarchy


class WkbCatalog(Enum):
    AIRY = "airy"
    PARABOLIC_CYL = "parabolic-cylinder"
    LOG_SQUARED = "log-squared"
    POWER_QUARTIC = "power-quartic"


@dataclass
class WkbTerms:
    """Phase-hierarchy terms of the plus branch; S0 and S2 flip sign on the
    minus branch while S1 and S3 are branch-independent."""

    S0: Callable
    S1: Callable
    S2: Callable
    S3: Callable

    def branch(self, sign: int):
        s = 1.0 if sign >= 0 else -1.0
        return (lambda x: s * self.S0(x), self.S1,
                lambda x: s * self.S2(x), self.S3)


def _fd1(f, x, h):
    return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h)


def _fd2(f, x, h):
    return (np.asarray(f(x + h)) - 2.0 * np.asarray(f(x)) + np.asarray(f(x - h))) / (h * h)


def wkb_terms(Q, dQ=None, d2Q=None, catalog: Optional[WkbCatalog] = None,
              nu: float = 0.0, anchor: float = 0.0) -> WkbTerms:
    """Terms of the exponential-phase expansion for eps^2 u'' = Q(x) u sped
    through fourth order:

        S0 = +- int sqrt(Q),  S1 = -(1/4) ln Q,
        S2 = +- int [Q''/(8 Q^(3/2)) - 5 Q'^2 / (32 Q^(5/2))],
        S3 = -Q''/(16 Q^2) + 5 Q'^2 / (64 Q^3).

    Catalog entries return the closed forms directly; the generic path uses
    Gauss quadrature from ``anchor`` and finite differences when derivative
    callables are not supplied.
    """
    if catalog is WkbCatalog.AIRY:
        return WkbTerms(
            S0=lambda x: 2.0 / 3.0 * np.asarray(x, dtype=float) ** 1.5,
            S1=lambda x: -0.25 * np.log(np.asarray(x, dtype=float)),
            S2=lambda x: 5.0 / 48.0 * np.asarray(x, dtype=float) ** -1.5,
            S3=lambda x: 5.0 / 64.0 * np.asarray(x, dtype=float) ** -3.0,
        )
    if catalog is WkbCatalog.PARABOLIC_CYL:
        def S0(x):
            x = np.asarray(x, dtype=float)
            return x * x / 4.0 - (nu + 0.5) * np.log(x)

        q = lambda x: np.asarray(x, dtype=float) ** 2 / 4.0 - nu - 0.5
        dq = lambda x: np.asarray(x, dtype=float) / 2.0
        d2q = lambda x: np.full_like(np.asarray(x, dtype=float), 0.5)
        return WkbTerms(
            S0=S0,
            S1=lambda x: np.log(0.25 * np.asarray(x, dtype=float) ** -0.5),
            S2=_s2_quadrature(q, dq, d2q, anchor=max(anchor, 2.0 * math.sqrt(max(nu + 0.5, 0.0)) + 1.0)),
            S3=_s3_closed(q, dq, d2q),
        )
    if catalog is WkbCatalog.LOG_SQUARED:
        def S2(x):
            lx = np.log(np.asarray(x, dtype=float))
            return 0.125 * np.log(lx) + 3.0 / 16.0 * lx ** -2

        def S3(x):
            lx = np.log(np.asarray(x, dtype=float))
            return 3.0 / 16.0 * lx ** -4 - 1.0 / 16.0 * lx ** -2

        return WkbTerms(
            S0=lambda x: 0.5 * np.log(np.asarray(x, dtype=float)) ** 2,
            S1=lambda x: 0.5 * np.log(np.asarray(x, dtype=float))
            - 0.5 * np.log(np.log(np.asarray(x, dtype=float))),
            S2=S2,
            S3=S3,
        )
    if catalog is WkbCatalog.POWER_QUARTIC:
        return WkbTerms(
            S0=lambda x: ((np.asarray(x, dtype=float) + math.pi) ** 3 - math.pi**3) / 3.0,
            S1=lambda x: -np.log(np.asarray(x, dtype=float) + math.pi),
            S2=lambda x: ((np.asarray(x, dtype=float) + math.pi) ** -3 - math.pi**-3) / 3.0,
            S3=lambda x: 0.5 * (np.asarray(x, dtype=float) + math.pi) ** -6,
        )
    # generic path
    dq = dQ if dQ is not None else (lambda x: _fd1(Q, np.asarray(x, dtype=float), 1e-5))
    d2q = d2Q if d2Q is not None else (lambda x: _fd2(Q, np.asarray(x, dtype=float), 1e-4))

    def S0(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        _check_positive(Q, xs)
        out = np.array([gauss_quad(lambda s: np.sqrt(np.asarray(Q(s))), anchor, xv,
                                   order=48, panels=4) for xv in xs])
        return out if np.ndim(x) else float(out[0])

    return WkbTerms(
        S0=S0,
        S1=lambda x: -0.25 * np.log(_checked_q(Q, x)),
        S2=_s2_quadrature(Q, dq, d2q, anchor),
        S3=_s3_closed(Q, dq, d2q),
    )


def _check_positive(Q, xs):
    q = np.asarray(Q(xs), dtype=float)
    if np.any(q <= 0.0):
        raise TurningPointError("Q <= 0 on the evaluation set (turning point)")


def _checked_q(Q, x):
    xs = np.asarray(x, dtype=float)
    _check_positive(Q, np.atleast_1d(xs))
    return np.asarray(Q(xs), dtype=float)


def _s2_quadrature(Q, dq, d2q, anchor):
    def integrand(s):
        q = np.asarray(Q(s), dtype=float)
        return (np.asarray(d2q(s)) / (8.0 * q ** 1.5)
                - 5.0 * np.asarray(dq(s)) ** 2 / (32.0 * q ** 2.5))

    def S2(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        _check_positive(Q, xs)
        out = np.array([gauss_quad(integrand, anchor, xv, order=48, panels=4)
                        for xv in xs])
        return out if np.ndim(x) else float(out[0])

    return S2


def _s3_closed(Q, dq, d2q):
    def S3(x):
        q = _checked_q(Q, x)
        return (-np.asarray(d2q(x)) / (16.0 * q * q)
                + 5.0 * np.asarray(dq(x)) ** 2 / (64.0 * q ** 3))

    return S3


@dataclass
class WkbValidity:
    """Series bookkeeping at the endpoints of an evaluation range.

    ``ordered[n]`` reports |delta S_{n+1}| < 0.1 |S_n| (adjacent-term
    ordering) and ``small[n]`` reports |delta^n S_{n+1}| < 0.1 (tail bound
    for truncating after S_n); ``retain_through`` is the smallest valid
    truncation (1 = physical optics) and ``first_omitted`` the index where
    the series is cut.
    """

    ordered: list
    small: list
    retain_through: int
    first_omitted: int


def wkb_validity(terms: WkbTerms, delta: float, x_range) -> WkbValidity:
    xs = np.array([x_range[0], x_range[-1]], dtype=float)
    S = [terms.S0, terms.S1, terms.S2, terms.S3]
    vals = [np.asarray(s(xs), dtype=float) for s in S]
    ordered = []
    small = []
    for n in range(3):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(delta * vals[n + 1]) / np.abs(vals[n])
        ordered.append(bool(np.all(ratio[np.isfinite(ratio)] < 0.1)))
        small.append(bool(np.all(np.abs(delta**n * vals[n + 1]) < 0.1)))
    retain = next((n for n in (1, 2) if small[n]), 3)
    return WkbValidity(ordered=ordered, small=small, retain_through=retain,
                       first_omitted=retain + 1)


def wkb_eigen(Q, n: int, domain=(0.0, math.pi)):
    """Large-eigenvalue approximation for u'' + E Q(x) u = 0 with Dirichlet
    ends: E_n = [n pi / int sqrt(Q)]^2 and u_n = Q^(-1/4) sin(sqrt(E_n) phase).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x0, x1 = domain
    _check_positive(Q, np.linspace(x0, x1, 257))
    total = gauss_quad(lambda s: np.sqrt(np.asarray(Q(s))), x0, x1, order=64, panels=8)
    E = (n * math.pi / total) ** 2
    rootE = math.sqrt(E)

    def u(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        phase = np.array([gauss_quad(lambda s: np.sqrt(np.asarray(Q(s))), x0, xv,
                                     order=48, panels=4) for xv in xs])
        out = np.asarray(Q(xs), dtype=float) ** -0.25 * np.sin(rootE * phase)
        return out if np.ndim(x) else float(out[0])

    return E, u


def wkb_eigen_grid_oracle(Q, n_modes: int, n_grid: int = 4000,
                          domain=(0.0, math.pi)) -> np.ndarray:
    """Finite-difference oracle for u'' + E Q u = 0 (Dirichlet): the
    generalized problem is symmetrized by the diagonal Q^(1/2) similarity."""
    x0, x1 = domain
    h = (x1 - x0) / n_grid
    xs = x0 + h * np.arange(1, n_grid)
    qs = np.asarray(Q(xs), dtype=float)
    if np.any(qs <= 0):
        raise TurningPointError("grid oracle requires Q > 0")
    diag = 2.0 / (h * h * qs)
    off = -1.0 / (h * h * np.sqrt(qs[:-1] * qs[1:]))
    upper = ((n_modes + 2) * math.pi / gauss_quad(
        lambda s: np.sqrt(np.asarray(Q(s))), x0, x1, order=64, panels=8)) ** 2
    vals = eig_sym_tridiag(diag, off, value_range=(0.0, upper))
    return vals[:n_modes]


# ---------------------------------------------------------------------------
# Rayleigh relaxation oscillator


def rayleigh_outer(v0):
    """Slow-branch relation u = v - v^3/3 of the Rayleigh oscillator."""
    v0 = np.asarray(v0, dtype=float)
    out = v0 - v0**3 / 3.0
    return out if out.shape else float(out)


def rayleigh_inner_residual(v0: float, xi: float, C: float) -> float:
    """Defect of the transition-layer relation
    -2/9 ln|v0 + 2| + 2/9 ln|v0 - 1| - 1/(3 (v0 - 1)) = -(xi + C)/3."""
    if v0 in (-2.0, 1.0):
        raise ValueError("v0 must avoid the logarithmic singularities at -2 and 1")
    lhs = (-2.0 / 9.0 * math.log(abs(v0 + 2.0))
           + 2.0 / 9.0 * math.log(abs(v0 - 1.0))
           - 1.0 / (3.0 * (v0 - 1.0)))
    return lhs - (-(xi + C) / 3.0)


def rayleigh_system(eps: float) -> OdeSystem:
    """u' = v, eps v' = v - v^3/3 - u."""

    def rhs(t, y, p):
        return np.array([y[1], (y[1] - y[1] ** 3 / 3.0 - y[0]) / eps])

    return OdeSystem(dim=2, rhs=rhs)


def rayleigh_simulate(eps: float, t_end: float, y0=(0.0, 1.9),
                      tol: float = 1e-10) -> Trajectory:
    if not 0.0 < eps <= 0.2:
        raise ValueError("eps must lie in (0, 0.2]")
    sys = rayleigh_system(eps)
    return solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, t_end,
                     np.asarray(y0, dtype=float), tol)


def rayleigh_period(eps: float, n_cycles: int = 6, tol: float = 1e-10) -> float:
    """Limit-cycle period measured from upward crossings of u = 0 with v > 0."""
    # settle onto the cycle first, then time the crossings
    t_end = 3.0 + 2.5 * n_cycles
    traj = rayleigh_simulate(eps, t_end, tol=tol)
    mask = traj.y[:, 1] > 0.0
    u = np.where(mask, traj.y[:, 0], np.nan)
    # crossings of u through zero restricted to the v > 0 half-plane
    times = []
    for i in range(len(traj.t) - 1):
        if mask[i] and mask[i + 1] and traj.y[i, 0] <= 0.0 < traj.y[i + 1, 0]:
            frac = -traj.y[i, 0] / (traj.y[i + 1, 0] - traj.y[i, 0])
            times.append(traj.t[i] + frac * (traj.t[i + 1] - traj.t[i]))
    times = np.asarray(times)
    if times.size < 3:
        raise ValueError("not enough limit-cycle crossings; extend t_end")
    tail = times[times >= times[-1] - (n_cycles - 1) * np.mean(np.diff(times))]
    return float(np.mean(np.diff(tail)))


def rayleigh_relaxation_period_limit(n: int = 2048) -> float:
    """Quadrature oracle for the eps -> 0 period: twice the slow-branch
    transit time int_1^2 (v^2 - 1)/v dv (= 3 - 2 ln 2)."""
    half = quad(lambda v: (np.asarray(v) ** 2 - 1.0) / np.asarray(v), 1.0, 2.0, n)
    return 2.0 * half
