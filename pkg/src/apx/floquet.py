"""Floquet discriminants for periodically forced pendulum models, the
piecewise-constant closed form, stability charts with boundary location,
and strobed (return-map) dynamics for the damped-driven oscillator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .numkit import find_root, solve_ode


class HillVariant(Enum):
    LINEAR_DOWN = "linear-down"            # x'' + (d + e sin wt) x = 0
    LINEAR_INVERTED = "linear-inverted"    # x'' - (d + e sin wt) x = 0
    NONLINEAR_DOWN = "nonlinear-down"      # x'' + (d + e sin wt) sin x = 0
    NONLINEAR_INVERTED = "nonlinear-inverted"
    PIECEWISE_INVERTED = "piecewise-inverted"  # square-wave modulation


@dataclass(frozen=True)
class HillProblem:
    variant: HillVariant
    delta: float
    eps: float
    omega: float

    @property
    def T(self) -> float:
        return 2.0 * math.pi / self.omega

    def p2(self, t: float) -> float:
        """Coefficient of x in x'' + p2(t) x = 0 (linearized forms)."""
        if self.variant is HillVariant.PIECEWISE_INVERTED:
            mod = self.eps if (t % self.T) < self.T / 2.0 else -self.eps
            return -(self.delta + mod)
        base = self.delta + self.eps * math.sin(self.omega * t)
        if self.variant in (HillVariant.LINEAR_DOWN, HillVariant.NONLINEAR_DOWN):
            return base
        return -base

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        if self.variant in (HillVariant.NONLINEAR_DOWN, HillVariant.NONLINEAR_INVERTED):
            sign = 1.0 if self.variant is HillVariant.NONLINEAR_DOWN else -1.0
            coeff = self.delta + self.eps * math.sin(self.omega * t)
            return np.array([y[1], -sign * coeff * math.sin(y[0])])
        return np.array([y[1], -self.p2(t) * y[0]])


@dataclass
class FundamentalPair:
    x1_T: float
    dx1_T: float
    x2_T: float
    dx2_T: float

    @property
    def wronskian(self) -> float:
        return self.x1_T * self.dx2_T - self.dx1_T * self.x2_T


@dataclass
class FloquetResult:
    Gamma: float
    multipliers: tuple
    stable: bool


def fundamental_pair(prob: HillProblem, tol: float = 1e-11) -> FundamentalPair:
    """Integrate the two fundamental solutions (x(0), x'(0)) = (1, 0) and
    (0, 1) over one period; the piecewise variant is integrated half-period
    by half-period so the coefficient jump is hit exactly."""
    T = prob.T

    def propagate(y0):
        if prob.variant is HillVariant.PIECEWISE_INVERTED:
            mid = solve_ode(lambda t, y: prob.rhs(t, y), 0.0, T / 2.0,
                            y0, tol).final
            return solve_ode(lambda t, y: prob.rhs(t, y), T / 2.0, T,
                             mid, tol).final
        return solve_ode(lambda t, y: prob.rhs(t, y), 0.0, T, y0, tol).final

    a = propagate(np.array([1.0, 0.0]))
    b = propagate(np.array([0.0, 1.0]))
    return FundamentalPair(x1_T=a[0], dx1_T=a[1], x2_T=b[0], dx2_T=b[1])


def discriminant(prob: HillProblem, tol: float = 1e-11) -> FloquetResult:
    """Gamma = x1(T) + x2'(T); multipliers alpha +- sqrt(alpha^2 - 1) with
    alpha = Gamma/2 (their product is 1); stable iff |Gamma| <= 2."""
    pair = fundamental_pair(prob, tol)
    gamma = pair.x1_T + pair.dx2_T
    alpha = gamma / 2.0
    root = complex(alpha * alpha - 1.0) ** 0.5
    mult = (alpha + root, alpha - root)
    return FloquetResult(Gamma=float(gamma), multipliers=mult,
                         stable=bool(abs(gamma) <= 2.0 + 1e-9))


def mathieu_piecewise_gamma(delta: float, eps: float, omega: float) -> float:
    """Closed-form discriminant for the square-wave inverted pendulum
    x'' - (delta +- eps) x = 0 on alternating half-periods:

        Gamma = 2 cosh(p T/2) cosh(q T/2)
              + (p/q + q/p) sinh(p T/2) sinh(q T/2),

    with p = sqrt(delta + eps), q = sqrt(delta - eps) and T = 2 pi / omega.
    delta < eps is rewritten with real trigonometry (q -> i s turns cosh/sinh
    into cos/sin) and delta = eps uses the series limit of the q -> 0 factor.
    """
    if delta + eps <= 0:
        raise ValueError("delta + eps must be positive for the catalog form")
    T = 2.0 * math.pi / omega
    p = math.sqrt(delta + eps)
    hp = p * T / 2.0
    diff = delta - eps
    if abs(diff) < 1e-12:
        return 2.0 * math.cosh(hp) + hp * math.sinh(hp)
    if diff > 0:
        q = math.sqrt(diff)
        hq = q * T / 2.0
        return (2.0 * math.cosh(hp) * math.cosh(hq)
                + (p / q + q / p) * math.sinh(hp) * math.sinh(hq))
    s = math.sqrt(-diff)
    hs = s * T / 2.0
    return (2.0 * math.cosh(hp) * math.cos(hs)
            + (p / s - s / p) * math.sinh(hp) * math.sin(hs))


@dataclass
class ChartRow:
    omega: float
    Gamma: float
    stable: bool


@dataclass
class StabilityChart:
    rows: list
    boundaries: list  # omegas where |Gamma| crosses 2


def stability_chart(variant: HillVariant, delta: float, eps: float,
                    omega_grid: Sequence[float], tol: float = 1e-11,
                    boundary_tol: float = 1e-6) -> StabilityChart:
    """Discriminant along a frequency grid with bisection-located crossings
    of Gamma = +-2."""
    def gamma_of(w: float) -> float:
        return discriminant(HillProblem(variant, delta, eps, w), tol).Gamma

    omegas = np.asarray(omega_grid, dtype=float)
    gammas = np.array([gamma_of(w) for w in omegas])
    rows = [ChartRow(float(w), float(g), bool(abs(g) <= 2.0 + 1e-9))
            for w, g in zip(omegas, gammas)]
    boundaries = []
    for target in (2.0, -2.0):
        h = gammas - target
        for i in np.nonzero(h[:-1] * h[1:] < 0)[0]:
            boundaries.append(find_root(lambda w: gamma_of(w) - target,
                                        (omegas[i], omegas[i + 1]),
                                        tol=boundary_tol))
    return StabilityChart(rows=rows, boundaries=sorted(boundaries))


# ---------------------------------------------------------------------------
# strobed return map for the damped-driven oscillator


@dataclass(frozen=True)
class DuffingChaosParams:
    """x'' + delta x' - x + kappa x^3 = gamma cos(omega t)."""

    delta: float = 0.1
    kappa: float = 0.25
    gamma: float = 1.5
    omega: float = 1.0


def poincare_map(params: DuffingChaosParams, n_points: int= 500,
                 transient: int = 100, y0=(0.0, 0.0),
                 tol: float = 1e-9) -> np.ndarray:
    """(x, x') strobed at the forcing period after discarding ``transient``
    periods."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    T = 2.0 * math.pi / params.omega

    def f(t, y):
        return np.array([
            y[1],
            -params.delta * y[1] + y[0] - params.kappa * y[0] ** 3
            + params.gamma * math.cos(params.omega * t),
        ])

    y = np.asarray(y0, dtype=float)
    t = 0.0
    for _ in range(transient):
        y = solve_ode(f, t, t + T, y, tol).final
        t += T
    points = np.zeros((n_points, 2))
    for i in range(n_points):
        y = solve_ode(f, t, t + T, y, tol).final
        t += T
        points[i] = y
    return points


def detect_cycle(points: np.ndarray, k_max: int, tol: float) -> Optional[int]:
    """Smallest period k <= k_max with max |p_{n+k} - p_n| < tol over the
    tail half of the iterates; None when no such cycle exists."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 4 * k_max:
        raise ValueError("need at least 4 * k_max points")
    tail = pts[pts.shape[0] // 2:]
    for k in range(1, k_max + 1):
        gaps = np.linalg.norm(tail[k:] - tail[:-k], axis=1)
        if gaps.size and float(np.max(gaps)) < tol:
            return k
    return None
